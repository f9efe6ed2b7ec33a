#include <doctest.h>

#include "mdr/corpus_io.hpp"
#include "mdr/errors.hpp"
#include "mdr/ranked_list.hpp"
#include "support/oracles.hpp"

using namespace mdr;
using testutil::scratch;
using testutil::slurp;
using testutil::spit;

TEST_CASE("corpus loads records and skips blank lines") {
    auto dir = scratch("corpus_load");
    spit(dir / "c.jsonl",
         "{\"doc_id\":\"d1\",\"text\":\"flu shot\"}\n\n{\"doc_id\":\"d2\",\"text\":\"x\",\"title\":\"T\"}\n");
    auto docs = load_corpus(dir / "c.jsonl");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "d1");
    CHECK(docs[1].title == std::optional<std::string>("T"));
}

TEST_CASE("duplicate doc id is rejected and named") {
    auto dir = scratch("corpus_dup");
    spit(dir / "c.jsonl", "{\"doc_id\":\"d1\",\"text\":\"a\"}\n{\"doc_id\":\"d1\",\"text\":\"b\"}\n");
    try {
        load_corpus(dir / "c.jsonl");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("d1") != std::string::npos);
    }
}

TEST_CASE("malformed records report line and field") {
    auto dir = scratch("corpus_bad");
    spit(dir / "a.jsonl", "{\"doc_id\":\"d1\",\"text\":\"a\"}\nnot json\n");
    CHECK_THROWS_AS(load_corpus(dir / "a.jsonl"), ParseError);
    spit(dir / "b.jsonl", "{\"doc_id\":\"d1\",\"text\":\"   \"}\n");
    try {
        load_corpus(dir / "b.jsonl");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.field() == "text");
        CHECK(e.line() == 1);
    }
    spit(dir / "c.jsonl", "{\"text\":\"a\"}\n");
    CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), ParseError);
}

TEST_CASE("evidence accepts article_id") {
    auto dir = scratch("evidence_id");
    spit(dir / "e.jsonl", "{\"article_id\":\"e1\",\"text\":\"vaccines work\"}\n");
    auto ev = load_evidence(dir / "e.jsonl");
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].doc_id == "e1");
}

TEST_CASE("qrels modes") {
    auto dir = scratch("qrels");
    spit(dir / "q.txt", "1 0 d1 1\n1 0 d2 0\n1 0 d3 2\n");
    CHECK_THROWS_AS(load_qrels(dir / "q.txt", QrelsMode::strict), ParseError);
    auto q = load_qrels(dir / "q.txt", QrelsMode::permissive);
    REQUIRE(q.size() == 3);
    CHECK(q[2].label == 1);
    spit(dir / "dup.txt", "1 0 d1 1\n1 0 d1 0\n");
    CHECK_THROWS_AS(load_qrels(dir / "dup.txt"), ParseError);
}

TEST_CASE("run invariants") {
    std::vector<RunEntry> ok{{"1", "a", 1, 0.9, "t"}, {"1", "b", 2, 0.9, "t"}, {"2", "a", 1, 0.1, "t"}};
    CHECK_NOTHROW(validate_run(ok));

    auto gap = ok;
    gap[1].rank = 3;
    CHECK_THROWS_AS(validate_run(gap), ValidationError);

    auto inverted = ok;
    inverted[1].score = 0.95;
    CHECK_THROWS_AS(validate_run(inverted), ValidationError);

    auto tie_order = ok;
    std::swap(tie_order[0].doc_id, tie_order[1].doc_id);
    CHECK_THROWS_AS(validate_run(tie_order), ValidationError);

    auto dup = ok;
    dup[1].doc_id = "a";
    CHECK_THROWS_AS(validate_run(dup), ValidationError);

    std::vector<RunEntry> split{{"1", "a", 1, 0.9, "t"}, {"2", "a", 1, 0.1, "t"}, {"1", "b", 2, 0.5, "t"}};
    CHECK_THROWS_AS(validate_run(split), ValidationError);
}

TEST_CASE("run write/read round trip is exact") {
    auto dir = scratch("run_rt");
    RankedList l{"7", {{"d2", 0.123456789}, {"d1", 0.123456711}, {"d3", -0.0000001}}};
    auto entries = to_run_entries({l}, "bm25");
    write_run(entries, dir / "r.run");
    CHECK(read_run(dir / "r.run") == entries);
    // quantization merged the first two scores into a tie broken by doc id
    CHECK(entries[0].doc_id == "d1");
    CHECK(slurp(dir / "r.run") == "7 Q0 d1 1 0.123457 bm25\n7 Q0 d2 2 0.123457 bm25\n7 Q0 d3 3 0.000000 bm25\n");
}

TEST_CASE("write_run refuses invalid input before touching the file") {
    auto dir = scratch("run_invalid");
    spit(dir / "r.run", "keep\n");
    std::vector<RunEntry> bad{{"1", "a", 2, 0.5, "t"}};
    CHECK_THROWS_AS(write_run(bad, dir / "r.run"), ValidationError);
    CHECK(slurp(dir / "r.run") == "keep\n");
}

TEST_CASE("run score formatting") {
    CHECK(format_run_score(0.5) == "0.500000");
    CHECK(format_run_score(-0.0) == "0.000000");
    CHECK(format_run_score(-1e-9) == "0.000000");
    CHECK(quantize_run_score(0.12345678) == 0.123457);
}
