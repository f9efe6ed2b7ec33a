#include <doctest.h>

#include "mdr/errors.hpp"
#include "mdr/metrics.hpp"
#include "support/oracles.hpp"

using namespace mdr;

namespace {

std::vector<RunEntry> make_run(const std::vector<std::pair<std::string, std::vector<std::string>>>& topics) {
    std::vector<RunEntry> run;
    for (const auto& [t, docs] : topics) {
        for (std::size_t i = 0; i < docs.size(); ++i) {
            run.push_back({t, docs[i], static_cast<int>(i + 1), 100.0 - static_cast<double>(i), "r"});
        }
    }
    return run;
}

}  // namespace

TEST_CASE("worked examples") {
    std::vector<std::string> r3{"x", "a", "b"};
    const double ndcg = ndcg_at_k(r3, {"a", "b"}, 10);
    CHECK(std::round(ndcg * 1e4) / 1e4 == 0.6934);

    std::vector<std::string> r10{"a", "x1", "b", "x2", "x3", "x4", "x5", "x6", "x7", "x8"};
    CHECK(precision_at_k(r10, {"a", "b"}) == doctest::Approx(0.2));
    CHECK(mrr_at_k(r10, {"a", "b"}) == 1.0);
    CHECK(std::round(average_precision(r10, {"a", "b"}) * 1e4) / 1e4 == 0.8333);

    CHECK(mrr_at_k(r10, {"x1"}) == 0.5);
    std::vector<std::string> r11(10, "");
    for (int i = 0; i < 10; ++i) r11[i] = "n" + std::to_string(i);
    r11.push_back("late");
    CHECK(mrr_at_k(r11, {"late"}) == 0.0);
    CHECK(ndcg_at_k(r10, {"zz"}) == 0.0);
    CHECK(precision_at_k({"a"}, {"a"}) == doctest::Approx(0.1));
    CHECK_THROWS_AS(ndcg_at_k(r10, {"a"}, 0), ValidationError);
}

TEST_CASE("random instances match the brute-force oracle") {
    std::mt19937_64 rng(2024);
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t n = 1 + rng() % 20;
        std::vector<std::string> ranking;
        for (std::size_t i = 0; i < n; ++i) ranking.push_back("d" + std::to_string(i));
        for (std::size_t i = n; i > 1; --i) std::swap(ranking[i - 1], ranking[rng() % i]);
        std::set<std::string> rel;
        for (std::size_t i = 0; i < 25; ++i)
            if (rng() % 3 == 0) rel.insert("d" + std::to_string(i));
        CHECK(std::abs(ndcg_at_k(ranking, rel) - oracle::ndcg(ranking, rel, 10)) <= 1e-12);
        CHECK(std::abs(precision_at_k(ranking, rel) - oracle::precision(ranking, rel, 10)) <= 1e-12);
        CHECK(std::abs(mrr_at_k(ranking, rel) - oracle::mrr(ranking, rel, 10)) <= 1e-12);
        CHECK(std::abs(average_precision(ranking, rel) - oracle::ap(ranking, rel)) <= 1e-12);
    }
}

TEST_CASE("perfect run scores one everywhere") {
    Qrels q({{"1", "a", 1}, {"1", "b", 1}, {"2", "c", 1}, {"2", "z", 0}});
    auto rep = evaluate_run(make_run({{"1", {"a", "b"}}, {"2", {"c", "z"}}}), q);
    CHECK(rep.mean.ndcg10 == 1.0);
    CHECK(rep.mean.mrr10 == 1.0);
    CHECK(rep.mean.map == 1.0);
    CHECK(rep.mean.p10 == doctest::Approx(0.15));
    CHECK(rep.mean.topic_id == "all");
}

TEST_CASE("topic bookkeeping") {
    Qrels q({{"1", "a", 1}, {"2", "b", 0}, {"3", "c", 1}});
    auto rep = evaluate_run(make_run({{"1", {"a"}}, {"2", {"b"}}, {"9", {"c"}}}), q);
    REQUIRE(rep.per_topic.size() == 2);
    CHECK(rep.per_topic[0].topic_id == "1");
    CHECK(rep.per_topic[1].topic_id == "3");
    CHECK(rep.per_topic[1].ndcg10 == 0.0);
    CHECK(rep.no_relevant == std::vector<std::string>{"2"});
    CHECK(rep.missing_from_run == std::vector<std::string>{"3"});
    CHECK(rep.unjudged == std::vector<std::string>{"9"});
    CHECK(rep.mean.ndcg10 == doctest::Approx(0.5));

    auto j = report_to_json(rep);
    CHECK(j["aggregate"]["num_topics"] == 2);
    CHECK(j["per_topic"].size() == 2);
    CHECK(j["skipped_no_relevant"] == nlohmann::json::array({"2"}));

    CHECK_THROWS_AS(evaluate_run(make_run({{"9", {"c"}}}), Qrels({{"1", "a", 1}})), ValidationError);
}

TEST_CASE("parallel evaluation equals the serial reference") {
    std::mt19937_64 rng(31);
    std::vector<QrelEntry> qrels;
    std::vector<std::pair<std::string, std::vector<std::string>>> topics;
    for (int t = 0; t < 60; ++t) {
        const std::string tid = "t" + std::to_string(t);
        std::vector<std::string> docs;
        for (int i = 0; i < 50; ++i) {
            docs.push_back("d" + std::to_string(i));
            if (rng() % 4 == 0) qrels.push_back({tid, "d" + std::to_string(i), 1});
        }
        for (std::size_t i = docs.size(); i > 1; --i) std::swap(docs[i - 1], docs[rng() % i]);
        topics.emplace_back(tid, docs);
    }
    auto run = make_run(topics);
    Qrels q(qrels);
    auto a = evaluate_run(run, q), b = evaluate_run_serial(run, q);
    CHECK(a.per_topic == b.per_topic);
    CHECK(a.mean == b.mean);
}
