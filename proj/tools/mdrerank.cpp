// mdrerank: command-line front end for the retrieve / credibility / enhance /
// rerank / evaluate stages.
//
//   mdrerank [--threads N] [--config cfg.json] <subcommand> [flags]
//
// Values in --config seed the flag defaults; flags given explicitly win. The
// scorer backend resolves as --scorer, then $MDRERANK_SCORER, then config.
//
// Exit codes: 0 ok, 1 validation, 2 runtime, 3 remote scorer/embedder.

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "mdr/errors.hpp"
#include "mdr/pipeline.hpp"

namespace {

using namespace mdr;

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kRemote = 3 };

std::optional<std::string> prescan_config(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return std::nullopt;
}

std::vector<Metric> parse_metrics(const std::vector<std::string>& names) {
    std::vector<Metric> out;
    for (const auto& n : names) out.push_back(parse_metric(n));
    if (out.empty()) out.assign(std::begin(kAllMetrics), std::end(kAllMetrics));
    return out;
}

QrelsMode parse_qrels_mode(const std::string& s) {
    if (s == "strict") return QrelsMode::strict;
    if (s == "permissive") return QrelsMode::permissive;
    throw ValidationError("--qrels-mode must be strict or permissive");
}

void print_aggregate(const EvalReport& r) {
    std::printf("%s\tndcg@10 %.4f\tp@10 %.4f\tmrr@10 %.4f\tmap %.4f\ttopics %zu\n", r.run_tag.c_str(),
                r.mean.ndcg10, r.mean.p10, r.mean.mrr10, r.mean.map, r.per_topic.size());
}

int run(int argc, char** argv) {
    PipelineConfig cfg;
    if (auto path = prescan_config(argc, argv)) cfg = PipelineConfig::load(*path);

    CLI::App app{"Credibility-aware two-stage retrieval"};
    app.require_subcommand(1);
    std::string config_path;
    int threads = 0;
    app.add_option("--config", config_path, "Pipeline config (JSON); seeds flag defaults");
    app.add_option("--threads", threads, "OpenMP worker count (0 = runtime default)")->check(CLI::NonNegativeNumber);

    // Shared flag state, seeded from the config.
    std::string corpus = cfg.corpus.string(), evidence = cfg.evidence.string(), topics = cfg.topics.string(),
                qrels = cfg.qrels.string();
    std::string stemmer = std::string(to_string(cfg.stemmer));
    std::string stopwords = cfg.stopwords ? cfg.stopwords->string() : "";
    std::size_t n = cfg.first_stage_n;
    double k1 = cfg.bm25.k1, b = cfg.bm25.b;
    std::size_t cred_k = cfg.credibility.k;
    std::string schedule = std::string(to_string(cfg.credibility.schedule));
    std::vector<double> weights = cfg.credibility.custom_weights;
    std::string embedder = cfg.embedder;
    std::string repr = to_string(cfg.enhancement.representation);
    std::string tmpl = std::string(to_string(cfg.enhancement.template_id));
    bool normalize_cred = cfg.enhancement.normalize_credibility;
    std::string variant = std::string(to_string(cfg.rerank.variant));
    std::string scorer_flag;
    std::size_t batch = cfg.scorer.batch_size, in_flight = cfg.scorer.max_in_flight;
    double wt = cfg.fusion.w_topicality, wc = cfg.fusion.w_credibility;
    std::string qrels_mode = cfg.qrels_mode == QrelsMode::strict ? "strict" : "permissive";
    std::string index, run_path, cred, out, tag;
    std::vector<std::string> runs, metrics;

    auto tokenizer_opts = [&](CLI::App* c) {
        c->add_option("--stemmer", stemmer, "none|porter")->capture_default_str();
        c->add_option("--stopwords", stopwords, "Stopword list, one per line");
    };

    auto* c_index = app.add_subcommand("index", "Build a BM25 index");
    c_index->add_option("--corpus", corpus, "Corpus JSONL")->required();
    c_index->add_option("--out", out, "Index file")->required();
    tokenizer_opts(c_index);

    auto* c_retrieve = app.add_subcommand("retrieve", "First-stage BM25 retrieval");
    c_retrieve->add_option("--index", index)->required();
    c_retrieve->add_option("--topics", topics)->required(topics.empty());
    c_retrieve->add_option("--n", n)->capture_default_str();
    c_retrieve->add_option("--k1", k1)->capture_default_str();
    c_retrieve->add_option("--b", b)->capture_default_str();
    c_retrieve->add_option("--tag", tag, "Run tag (default bm25)");
    c_retrieve->add_option("--out", out)->required();

    auto* c_cred = app.add_subcommand("cred", "Credibility scores for a first-stage run");
    c_cred->add_option("--index", index, "Evidence index")->required();
    c_cred->add_option("--evidence", evidence, "Evidence JSONL")->required(evidence.empty());
    c_cred->add_option("--corpus", corpus)->required(corpus.empty());
    c_cred->add_option("--topics", topics)->required(topics.empty());
    c_cred->add_option("--run", run_path, "First-stage run")->required();
    c_cred->add_option("--k", cred_k)->capture_default_str();
    c_cred->add_option("--schedule", schedule, "linear_decay|uniform|custom")->capture_default_str();
    c_cred->add_option("--weights", weights, "Custom rank weights");
    c_cred->add_option("--embedder", embedder, "stub:<seed> or http://host:port")->capture_default_str();
    c_cred->add_option("--k1", k1)->capture_default_str();
    c_cred->add_option("--b", b)->capture_default_str();
    c_cred->add_option("--out", out)->required();

    auto* c_enhance = app.add_subcommand("enhance", "Prepend relevance statements");
    c_enhance->add_option("--run", run_path)->required();
    c_enhance->add_option("--cred", cred);
    c_enhance->add_option("--template", tmpl, "c1|c2|t1|t2|tc|score_only")->capture_default_str();
    c_enhance->add_option("--repr", repr, "decimal:<1-4>|integer:<100|1000>|segmented")->capture_default_str();
    c_enhance->add_flag("--normalize-cred", normalize_cred, "Min-max credibility per topic");
    c_enhance->add_option("--corpus", corpus)->required(corpus.empty());
    c_enhance->add_option("--out", out)->required();

    auto* c_rerank = app.add_subcommand("rerank", "Cross-encoder re-ranking");
    c_rerank->add_option("--variant", variant, "plain_ce|bm25cat|credcat|bm25credcat|rel_score|rel_stat")
        ->capture_default_str();
    c_rerank->add_option("--template", tmpl)->capture_default_str();
    c_rerank->add_option("--repr", repr)->capture_default_str();
    c_rerank->add_flag("--normalize-cred", normalize_cred);
    c_rerank->add_option("--run", run_path)->required();
    c_rerank->add_option("--cred", cred);
    c_rerank->add_option("--corpus", corpus)->required(corpus.empty());
    c_rerank->add_option("--topics", topics)->required(topics.empty());
    c_rerank->add_option("--scorer", scorer_flag, "stub:<seed> or http://host:port");
    c_rerank->add_option("--batch-size", batch)->capture_default_str();
    c_rerank->add_option("--max-in-flight", in_flight)->capture_default_str();
    c_rerank->add_option("--n", n, "Candidates per topic")->capture_default_str();
    c_rerank->add_option("--tag", tag, "Run tag (default: variant name)");
    c_rerank->add_option("--out", out)->required();

    auto* c_fuse = app.add_subcommand("fuse", "Weighted average of topicality and credibility");
    c_fuse->add_option("--run", run_path)->required();
    c_fuse->add_option("--cred", cred)->required();
    c_fuse->add_option("--wt", wt)->capture_default_str();
    c_fuse->add_option("--wc", wc)->capture_default_str();
    c_fuse->add_option("--tag", tag, "Run tag (default wam)");
    c_fuse->add_option("--out", out)->required();

    auto* c_eval = app.add_subcommand("eval", "Evaluate a run");
    c_eval->add_option("--run", run_path)->required();
    c_eval->add_option("--qrels", qrels)->required(qrels.empty());
    c_eval->add_option("--qrels-mode", qrels_mode)->capture_default_str();
    c_eval->add_option("--out", out);

    auto* c_compare = app.add_subcommand("compare", "Paired t-tests between runs");
    c_compare->add_option("--runs", runs)->required()->expected(2, -1);
    c_compare->add_option("--qrels", qrels)->required(qrels.empty());
    c_compare->add_option("--metric", metrics, "ndcg10|p10|mrr10|map (repeatable; default all)");
    c_compare->add_option("--qrels-mode", qrels_mode)->capture_default_str();
    c_compare->add_option("--out", out);

    std::string out_dir;
    auto* c_pipeline = app.add_subcommand("pipeline", "index -> retrieve -> cred -> enhance -> rerank -> eval");
    c_pipeline->add_option("--scorer", scorer_flag);
    c_pipeline->add_option("--out-dir", out_dir, "Override output_dir");

    std::vector<std::string> sweep_variants, sweep_templates, sweep_reprs;
    auto* c_sweep = app.add_subcommand("sweep", "Tagged runs over variants x templates x representations");
    c_sweep->add_option("--variants", sweep_variants)->required();
    c_sweep->add_option("--templates", sweep_templates);
    c_sweep->add_option("--reprs", sweep_reprs);
    c_sweep->add_option("--metric", metrics);
    c_sweep->add_option("--scorer", scorer_flag);
    c_sweep->add_option("--out-dir", out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    if (threads > 0) omp_set_num_threads(threads);

    const Bm25Params bm25{k1, b};
    const std::optional<std::string> scorer_opt =
        scorer_flag.empty() ? std::nullopt : std::optional<std::string>(scorer_flag);
    auto scorer_handle = [&] {
        ScorerHandle h = cfg.scorer;
        h.backend = resolve_scorer_backend(scorer_opt, std::getenv(kScorerEnv), cfg.scorer.backend);
        h.batch_size = batch;
        h.max_in_flight = in_flight;
        return h;
    };

    if (*c_index) {
        Tokenizer tok;
        tok.stemmer = parse_stemmer(stemmer);
        if (!stopwords.empty()) tok.stopwords = load_stopwords(stopwords);
        stage_index(corpus, tok, out);
    } else if (*c_retrieve) {
        stage_retrieve(index, topics, n, bm25, tag.empty() ? "bm25" : tag, out);
    } else if (*c_cred) {
        CredibilityConfig cc = cfg.credibility;
        cc.k = cred_k;
        cc.schedule = parse_schedule(schedule);
        cc.custom_weights = weights;
        stage_cred(index, evidence, corpus, topics, run_path, cc, embedder, bm25, out);
    } else if (*c_enhance) {
        EnhancementConfig ec{parse_representation(repr), parse_template(tmpl), normalize_cred};
        stage_enhance(run_path, cred, corpus, ec, out);
    } else if (*c_rerank) {
        RerankRunConfig rc;
        rc.variant = parse_variant(variant);
        rc.representation = parse_representation(repr);
        rc.template_id = parse_template(tmpl);
        rc.first_stage_n = n;
        rc.normalize_credibility = normalize_cred;
        rc.tag = tag.empty() ? std::string(to_string(rc.variant)) : tag;
        stage_rerank(run_path, cred, corpus, topics, rc, scorer_handle(), out);
    } else if (*c_fuse) {
        stage_fuse(run_path, cred, FusionConfig{wt, wc}, tag.empty() ? "wam" : tag, out);
    } else if (*c_eval) {
        print_aggregate(stage_eval(run_path, qrels, out, parse_qrels_mode(qrels_mode)));
    } else if (*c_compare) {
        std::vector<fs::path> paths(runs.begin(), runs.end());
        const auto results = stage_compare(paths, qrels, parse_metrics(metrics), out, parse_qrels_mode(qrels_mode));
        for (const auto& r : results) {
            std::printf("%s vs %s\t%s\t%.4f %.4f\tp=%.4g\tp_bonf=%.4g%s\n", r.system_a.c_str(), r.system_b.c_str(),
                        std::string(to_string(r.metric)).c_str(), r.mean_a, r.mean_b, r.test.p, r.p_corrected,
                        r.significant ? "\t*" : "");
        }
    } else if (*c_pipeline || *c_sweep) {
        if (config_path.empty()) throw ValidationError("--config is required");
        cfg.scorer.backend = scorer_handle().backend;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (*c_pipeline) {
            const auto result = run_pipeline(cfg, &std::cerr);
            auto report = result.evaluation;
            print_aggregate(report);
        } else {
            SweepPlan plan;
            for (const auto& v : sweep_variants) plan.variants.push_back(parse_variant(v));
            for (const auto& t : sweep_templates) plan.templates.push_back(parse_template(t));
            for (const auto& r : sweep_reprs) plan.representations.push_back(parse_representation(r));
            plan.metrics = parse_metrics(metrics);
            const auto result = run_sweep(cfg, plan, &std::cerr);
            for (const auto& r : result.reports) print_aggregate(r);
            std::cerr << "summary: " << result.summary.string() << '\n';
        }
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mdr::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const mdr::RemoteError& e) {
        std::cerr << "remote error: " << e.what() << '\n';
        return kRemote;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}
