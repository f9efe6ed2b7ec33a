#include <doctest.h>

#include "mdr/bm25.hpp"
#include "mdr/errors.hpp"
#include "mdr/inverted_index.hpp"
#include "support/oracles.hpp"

using namespace mdr;

namespace {

std::vector<Document> random_corpus(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n; ++i) {
        std::string text;
        const std::size_t len = 1 + rng() % 25;
        for (std::size_t j = 0; j < len; ++j) text += "w" + std::to_string(rng() % vocab) + " ";
        docs.push_back({"d" + std::to_string(1000 + i), text, std::nullopt});
    }
    return docs;
}

}  // namespace

TEST_CASE("two-document hand value") {
    auto idx = build_index({{"d0", "a b", std::nullopt}, {"d1", "b", std::nullopt}});
    const double s = bm25_score(idx, {"a"}, 0);
    CHECK(s == doctest::Approx(std::log(2.0) * 2.2 / 2.5).epsilon(1e-12));
    CHECK(std::abs(s - 0.6100) < 1e-4);
    CHECK(bm25_score(idx, {"a"}, 1) == 0.0);
    CHECK(bm25_score(idx, {"zzz"}, 0) == 0.0);
    CHECK_THROWS_AS(bm25_score(idx, {"a"}, 2), ValidationError);
}

TEST_CASE("query terms count once") {
    auto idx = build_index({{"d0", "a b", std::nullopt}, {"d1", "b", std::nullopt}});
    CHECK(bm25_score(idx, {"a", "a"}, 0) == bm25_score(idx, {"a"}, 0));
}

TEST_CASE("doubling tf increases the score") {
    auto one = build_index({{"d0", "a b c d", std::nullopt}, {"d1", "b c", std::nullopt}});
    auto two = build_index({{"d0", "a a c d", std::nullopt}, {"d1", "b c", std::nullopt}});
    CHECK(bm25_score(two, {"a"}, 0) > bm25_score(one, {"a"}, 0));
}

TEST_CASE("parameter domains") {
    CHECK_THROWS_AS((Bm25Params{-0.1, 0.75}.validate()), ValidationError);
    CHECK_THROWS_AS((Bm25Params{1.2, 1.5}.validate()), ValidationError);
    CHECK_THROWS_AS((Bm25Params{0.0, 0.75}.validate()), ValidationError);
    CHECK_NOTHROW((Bm25Params{0.01, 0.0}.validate()));
    CHECK_NOTHROW((Bm25Params{1.2, 1.0}.validate()));
}

TEST_CASE("retrieve equals brute-force scoring on random corpora") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        auto docs = random_corpus(rng, 100, 40);
        auto idx = build_index(docs);
        std::vector<std::vector<std::string>> toks;
        for (const auto& d : docs) toks.push_back(tokenize(d.text));
        Topic topic{"q", "w" + std::to_string(rng() % 40) + " w" + std::to_string(rng() % 40) + " w" +
                             std::to_string(rng() % 40)};
        const auto q = tokenize(topic.text);

        std::vector<std::pair<double, std::string>> expect;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const double s = oracle::bm25(toks, q, i);
            bool matches = false;
            for (const auto& t : q) matches = matches || std::count(toks[i].begin(), toks[i].end(), t) > 0;
            if (matches) expect.emplace_back(s, docs[i].doc_id);
        }
        std::sort(expect.begin(), expect.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        const std::size_t n = 1 + rng() % 60;
        if (expect.size() > n) expect.resize(n);

        const auto got = retrieve(idx, topic, n);
        REQUIRE(got.items.size() == expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i) {
            CHECK(got.items[i].doc_id == expect[i].second);
            CHECK(got.items[i].score == doctest::Approx(expect[i].first).epsilon(1e-12));
        }
    }
}

TEST_CASE("parallel batch retrieval equals the serial reference") {
    std::mt19937_64 rng(5);
    auto idx = build_index(random_corpus(rng, 300, 50));
    std::vector<Topic> topics;
    for (int i = 0; i < 40; ++i) {
        topics.push_back({"t" + std::to_string(i), "w" + std::to_string(rng() % 50) + " w" + std::to_string(rng() % 50)});
    }
    CHECK(retrieve_batch(idx, topics, 50) == retrieve_batch_serial(idx, topics, 50));
}

TEST_CASE("index serialization round trip") {
    Tokenizer tok;
    tok.stemmer = Stemmer::porter;
    tok.stopwords = {"the"};
    auto idx = build_index({{"d0", "the running dogs", std::nullopt}, {"d1", "dogs run", std::nullopt}}, tok);
    const std::string bytes = idx.serialize();
    CHECK(bytes.substr(0, 8) == "MDRINDEX");
    auto back = InvertedIndex::deserialize(bytes);
    CHECK(back.serialize() == bytes);
    CHECK(back.tokenizer() == tok);
    CHECK(back.postings("dog").size() == 2);
    CHECK(back.doc_ids() == idx.doc_ids());
    CHECK(back.avg_doc_length() == idx.avg_doc_length());

    CHECK_THROWS_AS(InvertedIndex::deserialize(bytes.substr(0, bytes.size() - 3)), ValidationError);
    std::string wrong = bytes;
    wrong[0] = 'X';
    CHECK_THROWS_AS(InvertedIndex::deserialize(wrong), ValidationError);
}

TEST_CASE("build_index rejects empty corpus and duplicate ids") {
    CHECK_THROWS_AS(build_index({}), ValidationError);
    CHECK_THROWS_AS(build_index({{"a", "x", std::nullopt}, {"a", "y", std::nullopt}}), ValidationError);
}
