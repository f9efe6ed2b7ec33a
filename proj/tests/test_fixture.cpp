#include <doctest.h>

#include "mdr/corpus_io.hpp"
#include "support/oracles.hpp"

using namespace mdr;

TEST_CASE("bundled fixture matches its generator") {
    auto dir = testutil::scratch("fixture_regen");
    REQUIRE(std::system(("\"" + std::string(MDR_MAKE_FIXTURE) + "\" \"" + dir.string() + "\"").c_str()) == 0);
    for (auto f : {"corpus.jsonl", "evidence.jsonl", "topics.jsonl", "qrels.txt"}) {
        CHECK_MESSAGE(testutil::slurp(dir / f) == testutil::slurp(testutil::data_dir() / "fixture" / f), f);
    }
}

TEST_CASE("fixture shape") {
    const auto fx = testutil::data_dir() / "fixture";
    CHECK(load_corpus(fx / "corpus.jsonl").size() == 200);
    CHECK(load_topics(fx / "topics.jsonl").size() == 5);
    const auto qrels = load_qrels(fx / "qrels.txt");
    std::map<std::string, int> relevant;
    for (const auto& q : qrels) relevant[q.topic_id] += q.label;
    CHECK(relevant.size() == 5);
    for (const auto& [t, n] : relevant) CHECK_MESSAGE(n > 0, t);
}
