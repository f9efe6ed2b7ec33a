#include <doctest.h>

#include "mdr/checksum.hpp"
#include "mdr/errors.hpp"
#include "mdr/pipeline.hpp"
#include "support/oracles.hpp"

using namespace mdr;
using nlohmann::json;
using testutil::slurp;

namespace {

fs::path fixture(const std::string& name) { return testutil::data_dir() / "fixture" / name; }

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::map<std::string, bool> skipped(const PipelineResult& r) {
    std::map<std::string, bool> m;
    for (const auto& s : r.stages) m[s.stage] = s.skipped;
    return m;
}

}  // namespace

TEST_CASE("config parsing") {
    json j = {{"corpus", "c.jsonl"},
              {"evidence", "/abs/e.jsonl"},
              {"lexical", {{"k1", 0.9}, {"n", 100}, {"stemmer", "porter"}}},
              {"credibility", {{"k", 5}, {"schedule", "uniform"}}},
              {"enhancement", {{"representation", "integer:1000"}, {"template", "tc"}}},
              {"rerank", {{"variant", "bm25cat"}, {"scorer", "stub:3"}, {"batch_size", 8}}},
              {"fusion", {{"wt", 0.7}, {"wc", 0.3}}}};
    auto c = PipelineConfig::from_json(j, "/base");
    CHECK(c.corpus == fs::path("/base/c.jsonl"));
    CHECK(c.evidence == fs::path("/abs/e.jsonl"));
    CHECK(c.bm25.k1 == 0.9);
    CHECK(c.bm25.b == 0.75);
    CHECK(c.first_stage_n == 100);
    CHECK(c.stemmer == Stemmer::porter);
    CHECK(c.credibility.k == 5);
    CHECK(c.enhancement.representation == ScoreRepresentation::integer(1000));
    CHECK(c.rerank.variant == InputVariant::bm25cat);
    CHECK(c.rerank.tag == "bm25cat");
    CHECK(c.scorer.batch_size == 8);
    CHECK(c.fusion.w_topicality == 0.7);

    auto back = PipelineConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());

    CHECK_THROWS_AS(PipelineConfig::from_json({{"corpsu", "x"}}), ValidationError);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"lexical", {{"k3", 1}}}}), ValidationError);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"lexical", {{"k1", "high"}}}}), ValidationError);
}

TEST_CASE("scorer backend precedence") {
    CHECK(resolve_scorer_backend(std::string("stub:1"), "http://env", "stub:3") == "stub:1");
    CHECK(resolve_scorer_backend(std::nullopt, "http://env", "stub:3") == "http://env");
    CHECK(resolve_scorer_backend(std::nullopt, "", "stub:3") == "stub:3");
    CHECK(resolve_scorer_backend(std::nullopt, nullptr, "stub:3") == "stub:3");
}

TEST_CASE("missing input is a validation error before any work") {
    auto dir = testutil::scratch("pipeline_missing");
    auto cfg = PipelineConfig::load(testutil::fixture_config(dir, dir / "out"));
    cfg.corpus = dir / "nope.jsonl";
    CHECK_THROWS_AS(run_pipeline(cfg), ValidationError);
    CHECK_FALSE(fs::exists(dir / "out"));

    testutil::spit(dir / "bad.json", "{\"corpus\": \"nope.jsonl\", \"evidence\": \"x\", \"topics\": \"y\", \"qrels\": \"z\"}");
    CHECK(testutil::cli("--config " + q(dir / "bad.json") + " pipeline") == 1);
    CHECK(testutil::cli("eval --run " + q(dir / "absent.run") + " --qrels " + q(fixture("qrels.txt"))) == 1);
    CHECK(testutil::cli("no-such-command") == 1);
}

TEST_CASE("unchanged reruns skip stages; changes rerun only what depends on them") {
    auto dir = testutil::scratch("pipeline_skip");
    auto cfg = PipelineConfig::load(testutil::fixture_config(dir, dir / "out"));
    auto first = run_pipeline(cfg);
    for (const auto& [stage, skip] : skipped(first)) CHECK_MESSAGE(!skip, stage);
    const auto run_bytes = slurp(first.run);
    const auto manifest_bytes = slurp(first.manifest);

    auto second = run_pipeline(cfg);
    for (const auto& [stage, skip] : skipped(second)) CHECK_MESSAGE(skip, stage);
    CHECK(slurp(second.run) == run_bytes);
    CHECK(slurp(second.manifest) == manifest_bytes);

    cfg.rerank.variant = InputVariant::plain_ce;
    auto third = skipped(run_pipeline(cfg));
    CHECK(third["index"]);
    CHECK(third["retrieve"]);
    CHECK(third["cred"]);
    CHECK(third["enhance"]);
    CHECK_FALSE(third["rerank"]);
    CHECK_FALSE(third["eval"]);

    // a damaged artifact forces its stage (and everything reading it) to rerun
    testutil::spit(dir / "out" / "cred.jsonl", "{}\n");
    auto fourth = skipped(run_pipeline(cfg));
    CHECK(fourth["retrieve"]);
    CHECK_FALSE(fourth["cred"]);
    CHECK(fourth["enhance"]);  // cred bytes are restored, so its inputs match again

    auto manifest = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(manifest["config"]["rerank"]["variant"] == "plain_ce");
    CHECK(manifest["stages"].size() == 7);
    for (const auto& s : manifest["stages"]) {
        for (const auto& [role, in] : s["inputs"].items()) CHECK(in["sha256"] == sha256_file(in["path"].get<std::string>()));
    }
}

TEST_CASE("staged subcommands reproduce the pipeline byte for byte") {
    auto dir = testutil::scratch("pipeline_staged");
    const auto config = testutil::fixture_config(dir, dir / "e2e");
    REQUIRE(testutil::cli("--config " + q(config) + " pipeline") == 0);

    const fs::path s = dir / "staged";
    fs::create_directories(s);
    REQUIRE(testutil::cli("index --corpus " + q(fixture("corpus.jsonl")) + " --out " + q(s / "index.bin")) == 0);
    REQUIRE(testutil::cli("index --corpus " + q(fixture("evidence.jsonl")) + " --out " + q(s / "evidence_index.bin")) == 0);
    REQUIRE(testutil::cli("retrieve --index " + q(s / "index.bin") + " --topics " + q(fixture("topics.jsonl")) +
                          " --n 500 --k1 1.2 --b 0.75 --out " + q(s / "first_stage.run")) == 0);
    REQUIRE(testutil::cli("cred --index " + q(s / "evidence_index.bin") + " --evidence " + q(fixture("evidence.jsonl")) +
                          " --corpus " + q(fixture("corpus.jsonl")) + " --topics " + q(fixture("topics.jsonl")) +
                          " --run " + q(s / "first_stage.run") + " --k 3 --schedule linear_decay --embedder stub:7 --out " +
                          q(s / "cred.jsonl")) == 0);
    REQUIRE(testutil::cli("enhance --run " + q(s / "first_stage.run") + " --cred " + q(s / "cred.jsonl") +
                          " --template c2 --repr decimal:4 --corpus " + q(fixture("corpus.jsonl")) + " --out " +
                          q(s / "enhanced.jsonl")) == 0);
    REQUIRE(testutil::cli("rerank --variant rel_stat --template c2 --repr decimal:4 --run " + q(s / "first_stage.run") +
                          " --cred " + q(s / "cred.jsonl") + " --corpus " + q(fixture("corpus.jsonl")) + " --topics " +
                          q(fixture("topics.jsonl")) + " --scorer stub:42 --out " + q(s / "reranked.run")) == 0);
    REQUIRE(testutil::cli("eval --run " + q(s / "reranked.run") + " --qrels " + q(fixture("qrels.txt")) + " --out " +
                          q(s / "report.json")) == 0);

    for (auto f : {"index.bin", "evidence_index.bin", "first_stage.run", "cred.jsonl", "enhanced.jsonl", "reranked.run",
                   "report.json"}) {
        CHECK_MESSAGE(slurp(s / f) == slurp(dir / "e2e" / f), f);
    }

    REQUIRE(testutil::cli("fuse --run " + q(s / "first_stage.run") + " --cred " + q(s / "cred.jsonl") +
                          " --wt 0.5 --wc 0.5 --out " + q(s / "wam.run")) == 0);
    REQUIRE(testutil::cli("compare --runs " + q(s / "first_stage.run") + " " + q(s / "wam.run") + " " +
                          q(s / "reranked.run") + " --qrels " + q(fixture("qrels.txt")) + " --metric ndcg10 --out " +
                          q(s / "sig.json")) == 0);
    auto sig = json::parse(slurp(s / "sig.json"));
    CHECK(sig["comparisons"].size() == 3);
    CHECK(sig["comparisons"][0]["n_comparisons"] == 3);
}

TEST_CASE("sweep writes one tagged run per distinct configuration") {
    auto dir = testutil::scratch("pipeline_sweep");
    auto cfg = PipelineConfig::load(testutil::fixture_config(dir, dir / "out"));
    SweepPlan plan;
    plan.variants = {InputVariant::plain_ce, InputVariant::rel_stat, InputVariant::bm25cat};
    plan.templates = {StatementTemplate::c1, StatementTemplate::c2, StatementTemplate::score_only};
    plan.representations = {ScoreRepresentation::decimal(4), ScoreRepresentation::integer(100)};
    plan.metrics = {Metric::ndcg10};
    auto res = run_sweep(cfg, plan);
    const std::vector<std::string> expect{"bm25",
                                          "wam",
                                          "plain_ce",
                                          "rel_stat.c1.decimal4",
                                          "rel_stat.c2.decimal4",
                                          "rel_stat.c1.integer100",
                                          "rel_stat.c2.integer100",
                                          "bm25cat.decimal4",
                                          "bm25cat.integer100"};
    CHECK(res.tags == expect);
    for (const auto& t : expect) CHECK(fs::exists(dir / "out" / "sweep" / (t + ".json")));
    auto summary = json::parse(slurp(res.summary));
    CHECK(summary["comparisons"].size() == expect.size() * (expect.size() - 1) / 2);
    CHECK(summary["aggregates"].contains("rel_stat.c2.decimal4"));
}
