#include "mdr/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include "mdr/checksum.hpp"
#include "mdr/errors.hpp"

namespace mdr {
namespace {

using nlohmann::json;

void write_json(const json& j, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& section) {
    if (!obj.is_object()) throw ValidationError("config section '" + section + "' must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ValidationError("unknown config key '" + section + (section.empty() ? "" : ".") + key + "'");
        }
    }
}

template <typename T>
void read_into(const json& obj, const char* key, T& target, const std::string& section) {
    if (!obj.contains(key) || obj[key].is_null()) return;
    try {
        target = obj[key].get<T>();
    } catch (const json::exception& e) {
        throw ValidationError("config key '" + section + "." + key + "': " + e.what());
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<RankedList> read_lists(const fs::path& run) {
    return from_run_entries(read_run(run));
}

CredibilityTable read_table(const fs::path& path) {
    return CredibilityTable(read_credibility(path));
}

// ----- manifest-driven stage runner -----

struct StageDef {
    std::string name;
    json params;
    std::vector<std::pair<std::string, fs::path>> inputs;
    std::vector<fs::path> outputs;
    std::function<void()> run;
};

class StageRunner {
public:
    StageRunner(const fs::path& manifest_path, std::ostream* log) : log_(log) {
        std::ifstream in(manifest_path);
        if (!in) return;
        try {
            json old = json::parse(in);
            for (const auto& s : old.at("stages")) previous_[s.at("stage").get<std::string>()] = s;
        } catch (const json::exception&) {
            previous_.clear();  // unreadable manifest: rerun everything
        }
    }

    bool run(const StageDef& plan) {
        json inputs = json::object();
        for (const auto& [role, path] : plan.inputs) {
            inputs[role] = {{"path", path.generic_string()}, {"sha256", sha256_file(path)}};
        }
        json entry{{"stage", plan.name}, {"params", plan.params}, {"inputs", inputs}};

        bool skipped = false;
        auto prev = previous_.find(plan.name);
        if (prev != previous_.end() && prev->second.value("params", json()) == plan.params &&
            prev->second.value("inputs", json()) == inputs) {
            skipped = outputs_match(prev->second.value("outputs", json()), plan.outputs);
        }
        if (!skipped) {
            try {
                plan.run();
            } catch (const ValidationError& e) {
                throw ValidationError("stage '" + plan.name + "': " + e.what());
            } catch (const RemoteError& e) {
                throw RemoteError("stage '" + plan.name + "': " + e.what());
            } catch (const std::exception& e) {
                throw std::runtime_error("stage '" + plan.name + "': " + e.what());
            }
        }
        json outputs = json::object();
        for (const auto& path : plan.outputs) {
            outputs[path.filename().generic_string()] = sha256_file(path);
        }
        entry["outputs"] = outputs;
        stages_.push_back(entry);
        outcomes_.push_back({plan.name, skipped});
        if (log_) *log_ << "[" << plan.name << "] " << (skipped ? "up to date, skipped" : "done") << '\n';
        return skipped;
    }

    json stages() const { return stages_; }
    const std::vector<StageOutcome>& outcomes() const { return outcomes_; }

private:
    static bool outputs_match(const json& recorded, const std::vector<fs::path>& outputs) {
        if (!recorded.is_object() || recorded.size() != outputs.size()) return false;
        for (const auto& path : outputs) {
            const auto key = path.filename().generic_string();
            if (!recorded.contains(key) || !fs::exists(path)) return false;
            if (recorded[key] != sha256_file(path)) return false;
        }
        return true;
    }

    std::ostream* log_;
    std::map<std::string, json> previous_;
    json stages_ = json::array();
    std::vector<StageOutcome> outcomes_;
};

json tokenizer_params(const PipelineConfig& c) {
    return {{"stemmer", std::string(to_string(c.stemmer))},
            {"stopwords", c.stopwords ? json(c.stopwords->generic_string()) : json(nullptr)},
            {"lowercase", true}};
}

struct Artifacts {
    fs::path index, evidence_index, first_stage, cred, enhanced, reranked, report, manifest;

    explicit Artifacts(const fs::path& dir)
        : index(dir / "index.bin"),
          evidence_index(dir / "evidence_index.bin"),
          first_stage(dir / "first_stage.run"),
          cred(dir / "cred.jsonl"),
          enhanced(dir / "enhanced.jsonl"),
          reranked(dir / "reranked.run"),
          report(dir / "report.json"),
          manifest(dir / "manifest.json") {}
};

// Upstream stages shared by the pipeline and the sweep.
void run_upstream(const PipelineConfig& c, const Artifacts& a, StageRunner& runner) {
    const Tokenizer tok = c.tokenizer();
    std::vector<std::pair<std::string, fs::path>> stop_input;
    if (c.stopwords) stop_input.emplace_back("stopwords", *c.stopwords);

    auto with_stop = [&](std::vector<std::pair<std::string, fs::path>> in) {
        in.insert(in.end(), stop_input.begin(), stop_input.end());
        return in;
    };

    runner.run({"index", tokenizer_params(c), with_stop({{"corpus", c.corpus}}), {a.index},
                [&] { stage_index(c.corpus, tok, a.index); }});
    runner.run({"evidence_index", tokenizer_params(c), with_stop({{"evidence", c.evidence}}),
                {a.evidence_index}, [&] { stage_index(c.evidence, tok, a.evidence_index); }});
    runner.run({"retrieve",
                {{"k1", c.bm25.k1}, {"b", c.bm25.b}, {"n", c.first_stage_n}, {"tag", "bm25"}},
                {{"index", a.index}, {"topics", c.topics}},
                {a.first_stage},
                [&] { stage_retrieve(a.index, c.topics, c.first_stage_n, c.bm25, "bm25", a.first_stage); }});
    runner.run({"cred",
                {{"k", c.credibility.k},
                 {"schedule", std::string(to_string(c.credibility.schedule))},
                 {"weights", c.credibility.weights()},
                 {"no_evidence_score", c.credibility.no_evidence_score},
                 {"embedder", c.embedder},
                 {"k1", c.bm25.k1},
                 {"b", c.bm25.b}},
                {{"evidence_index", a.evidence_index},
                 {"evidence", c.evidence},
                 {"corpus", c.corpus},
                 {"topics", c.topics},
                 {"run", a.first_stage}},
                {a.cred},
                [&] {
                    stage_cred(a.evidence_index, c.evidence, c.corpus, c.topics, a.first_stage,
                               c.credibility, c.embedder, c.bm25, a.cred);
                }});
}

RerankRunConfig rerank_config(const PipelineConfig& c) {
    RerankRunConfig r = c.rerank;
    r.representation = c.enhancement.representation;
    r.template_id = c.enhancement.template_id;
    r.normalize_credibility = c.enhancement.normalize_credibility;
    r.first_stage_n = c.first_stage_n;
    return r;
}

json rerank_params(const RerankRunConfig& r, const ScorerHandle& s, const std::string& backend) {
    return {{"variant", std::string(to_string(r.variant))},
            {"representation", to_string(r.representation)},
            {"template", std::string(to_string(r.template_id))},
            {"normalize_credibility", r.normalize_credibility},
            {"first_stage_n", r.first_stage_n},
            {"tag", r.tag},
            {"scorer", backend},
            {"batch_size", s.batch_size}};
}

std::string repr_tag(const ScoreRepresentation& r) {
    std::string s = to_string(r);
    s.erase(std::remove(s.begin(), s.end(), ':'), s.end());
    return s;
}

}  // namespace

std::string resolve_scorer_backend(const std::optional<std::string>& flag, const char* env,
                                   const std::string& configured) {
    if (flag && !flag->empty()) return *flag;
    if (env != nullptr && *env != '\0') return env;
    return configured;
}

// ----- stages -----

void stage_index(const fs::path& corpus, const Tokenizer& tokenizer, const fs::path& out) {
    build_index(load_corpus(corpus), tokenizer).save(out);
}

void stage_retrieve(const fs::path& index, const fs::path& topics, std::size_t n,
                    const Bm25Params& params, const std::string& tag, const fs::path& out) {
    const auto idx = InvertedIndex::load(index);
    const auto lists = retrieve_batch(idx, load_topics(topics), n, params);
    write_run(to_run_entries(lists, tag), out);
}

void stage_cred(const fs::path& evidence_index, const fs::path& evidence, const fs::path& corpus,
                const fs::path& topics, const fs::path& run, const CredibilityConfig& config,
                const std::string& embedder, const Bm25Params& params, const fs::path& out) {
    const auto ev_index = InvertedIndex::load(evidence_index);
    const auto ev = load_evidence(evidence);
    const auto docs = load_corpus(corpus);
    const auto tps = load_topics(topics);
    const auto lists = read_lists(run);
    auto emb = make_embedder(embedder);
    const CredibilityInputs in{tps, lists, docs, ev_index, ev, params};
    write_credibility(compute_credibility(in, *emb, config), out);
}

void stage_enhance(const fs::path& run, const fs::path& cred, const fs::path& corpus,
                   const EnhancementConfig& config, const fs::path& out) {
    const CredibilityTable table =
        needs_credibility(config.template_id) ? read_table(cred) : CredibilityTable{};
    write_enhanced(enhance_run(read_lists(run), load_corpus(corpus), table, config), out);
}

void stage_rerank(const fs::path& run, const fs::path& cred, const fs::path& corpus,
                  const fs::path& topics, const RerankRunConfig& config, const ScorerHandle& scorer,
                  const fs::path& out) {
    config.validate();
    const CredibilityTable table = config.needs_credibility() ? read_table(cred) : CredibilityTable{};
    auto backend = make_scorer(scorer);
    const auto lists = rerank_run(config, load_topics(topics), read_lists(run), load_corpus(corpus),
                                  table, *backend);
    write_run(to_run_entries(lists, config.tag), out);
}

void stage_fuse(const fs::path& run, const fs::path& cred, const FusionConfig& config,
                const std::string& tag, const fs::path& out) {
    const auto lists = wam_run(read_lists(run), read_table(cred), config);
    write_run(to_run_entries(lists, tag), out);
}

EvalReport stage_eval(const fs::path& run, const fs::path& qrels, const fs::path& out, QrelsMode mode) {
    auto report = evaluate_run(read_run(run), Qrels(load_qrels(qrels, mode)));
    if (!out.empty()) write_report(report, out);
    return report;
}

std::vector<SignificanceResult> stage_compare(const std::vector<fs::path>& runs, const fs::path& qrels,
                                              const std::vector<Metric>& metrics, const fs::path& out,
                                              QrelsMode mode) {
    const Qrels judged(load_qrels(qrels, mode));
    std::vector<EvalReport> reports;
    std::set<std::string> tags;
    for (const auto& r : runs) {
        reports.push_back(evaluate_run(read_run(r), judged));
        if (!tags.insert(reports.back().run_tag).second) reports.back().run_tag = r.generic_string();
    }
    auto results = compare_runs(reports, metrics);
    if (!out.empty()) {
        json j = significance_to_json(results);
        json means = json::object();
        for (const auto& rep : reports) means[rep.run_tag] = report_to_json(rep)["aggregate"];
        j["aggregates"] = means;
        write_json(j, out);
    }
    return results;
}

// ----- config -----

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base_dir) {
    reject_unknown_keys(j, {"corpus", "evidence", "topics", "qrels", "output_dir", "lexical",
                            "credibility", "enhancement", "rerank", "fusion", "eval"},
                        "");
    PipelineConfig c;
    auto path_key = [&](const char* key, fs::path& target) {
        std::string p;
        read_into(j, key, p, "");
        if (!p.empty()) target = resolve(base_dir, p);
    };
    path_key("corpus", c.corpus);
    path_key("evidence", c.evidence);
    path_key("topics", c.topics);
    path_key("qrels", c.qrels);
    path_key("output_dir", c.output_dir);

    if (j.contains("lexical")) {
        const auto& s = j["lexical"];
        reject_unknown_keys(s, {"k1", "b", "n", "stemmer", "stopwords"}, "lexical");
        read_into(s, "k1", c.bm25.k1, "lexical");
        read_into(s, "b", c.bm25.b, "lexical");
        read_into(s, "n", c.first_stage_n, "lexical");
        std::string stemmer = "none", stop;
        read_into(s, "stemmer", stemmer, "lexical");
        c.stemmer = parse_stemmer(stemmer);
        read_into(s, "stopwords", stop, "lexical");
        if (!stop.empty()) c.stopwords = resolve(base_dir, stop);
    }
    if (j.contains("credibility")) {
        const auto& s = j["credibility"];
        reject_unknown_keys(s, {"k", "schedule", "weights", "embedder", "no_evidence_score"}, "credibility");
        read_into(s, "k", c.credibility.k, "credibility");
        std::string schedule = "linear_decay";
        read_into(s, "schedule", schedule, "credibility");
        c.credibility.schedule = parse_schedule(schedule);
        read_into(s, "weights", c.credibility.custom_weights, "credibility");
        read_into(s, "embedder", c.embedder, "credibility");
        read_into(s, "no_evidence_score", c.credibility.no_evidence_score, "credibility");
    }
    if (j.contains("enhancement")) {
        const auto& s = j["enhancement"];
        reject_unknown_keys(s, {"representation", "template", "normalize_credibility"}, "enhancement");
        std::string repr = "decimal:4", tmpl = "c2";
        read_into(s, "representation", repr, "enhancement");
        read_into(s, "template", tmpl, "enhancement");
        c.enhancement.representation = parse_representation(repr);
        c.enhancement.template_id = parse_template(tmpl);
        read_into(s, "normalize_credibility", c.enhancement.normalize_credibility, "enhancement");
    }
    if (j.contains("rerank")) {
        const auto& s = j["rerank"];
        reject_unknown_keys(s, {"variant", "tag", "scorer", "batch_size", "max_in_flight"}, "rerank");
        std::string variant = "rel_stat";
        read_into(s, "variant", variant, "rerank");
        c.rerank.variant = parse_variant(variant);
        c.rerank.tag = std::string(to_string(c.rerank.variant));
        read_into(s, "tag", c.rerank.tag, "rerank");
        read_into(s, "scorer", c.scorer.backend, "rerank");
        read_into(s, "batch_size", c.scorer.batch_size, "rerank");
        read_into(s, "max_in_flight", c.scorer.max_in_flight, "rerank");
    }
    if (j.contains("fusion")) {
        const auto& s = j["fusion"];
        reject_unknown_keys(s, {"wt", "wc"}, "fusion");
        read_into(s, "wt", c.fusion.w_topicality, "fusion");
        read_into(s, "wc", c.fusion.w_credibility, "fusion");
    }
    if (j.contains("eval")) {
        const auto& s = j["eval"];
        reject_unknown_keys(s, {"qrels_mode"}, "eval");
        std::string mode = "strict";
        read_into(s, "qrels_mode", mode, "eval");
        if (mode == "strict") {
            c.qrels_mode = QrelsMode::strict;
        } else if (mode == "permissive") {
            c.qrels_mode = QrelsMode::permissive;
        } else {
            throw ValidationError("eval.qrels_mode must be strict or permissive");
        }
    }
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
}

json PipelineConfig::to_json() const {
    return {
        {"corpus", corpus.generic_string()},
        {"evidence", evidence.generic_string()},
        {"topics", topics.generic_string()},
        {"qrels", qrels.generic_string()},
        {"output_dir", output_dir.generic_string()},
        {"lexical",
         {{"k1", bm25.k1},
          {"b", bm25.b},
          {"n", first_stage_n},
          {"stemmer", std::string(to_string(stemmer))},
          {"stopwords", stopwords ? json(stopwords->generic_string()) : json(nullptr)}}},
        {"credibility",
         {{"k", credibility.k},
          {"schedule", std::string(to_string(credibility.schedule))},
          {"weights", credibility.custom_weights},
          {"embedder", embedder},
          {"no_evidence_score", credibility.no_evidence_score}}},
        {"enhancement",
         {{"representation", to_string(enhancement.representation)},
          {"template", std::string(to_string(enhancement.template_id))},
          {"normalize_credibility", enhancement.normalize_credibility}}},
        {"rerank",
         {{"variant", std::string(to_string(rerank.variant))},
          {"tag", rerank.tag},
          {"scorer", scorer.backend},
          {"batch_size", scorer.batch_size},
          {"max_in_flight", scorer.max_in_flight}}},
        {"fusion", {{"wt", fusion.w_topicality}, {"wc", fusion.w_credibility}}},
        {"eval", {{"qrels_mode", qrels_mode == QrelsMode::strict ? "strict" : "permissive"}}},
    };
}

void PipelineConfig::validate() const {
    auto must_exist = [](const fs::path& p, const char* what) {
        if (p.empty()) throw ValidationError(std::string("config: ") + what + " path is not set");
        if (!fs::is_regular_file(p)) {
            throw ValidationError(std::string("config: ") + what + " '" + p.string() + "' does not exist");
        }
    };
    must_exist(corpus, "corpus");
    must_exist(evidence, "evidence");
    must_exist(topics, "topics");
    must_exist(qrels, "qrels");
    if (stopwords) must_exist(*stopwords, "stopwords");
    if (output_dir.empty()) throw ValidationError("config: output_dir is not set");
    bm25.validate();
    if (first_stage_n == 0) throw ValidationError("config: lexical.n must be >= 1");
    (void)credibility.weights();
    if (credibility.no_evidence_score < -1.0 || credibility.no_evidence_score > 1.0) {
        throw ValidationError("config: credibility.no_evidence_score must lie in [-1,1]");
    }
    enhancement.representation.validate();
    rerank_config(*this).validate();
    fusion.validate();
    if (scorer.batch_size == 0 || scorer.max_in_flight == 0) {
        throw ValidationError("config: batch_size and max_in_flight must be >= 1");
    }
}

Tokenizer PipelineConfig::tokenizer() const {
    Tokenizer t;
    t.stemmer = stemmer;
    if (stopwords) t.stopwords = load_stopwords(stopwords->string());
    return t;
}

// ----- pipeline -----

PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log) {
    config.validate();
    fs::create_directories(config.output_dir);
    const Artifacts a(config.output_dir);
    StageRunner runner(a.manifest, log);

    run_upstream(config, a, runner);

    const RerankRunConfig rr = rerank_config(config);
    const ScorerHandle& handle = config.scorer;

    EnhancementConfig ec = config.enhancement;
    runner.run({"enhance",
                {{"representation", to_string(ec.representation)},
                 {"template", std::string(to_string(ec.template_id))},
                 {"normalize_credibility", ec.normalize_credibility}},
                {{"run", a.first_stage}, {"cred", a.cred}, {"corpus", config.corpus}},
                {a.enhanced},
                [&] { stage_enhance(a.first_stage, a.cred, config.corpus, ec, a.enhanced); }});
    runner.run({"rerank",
                rerank_params(rr, handle, handle.backend),
                {{"run", a.first_stage}, {"cred", a.cred}, {"corpus", config.corpus}, {"topics", config.topics}},
                {a.reranked},
                [&] { stage_rerank(a.first_stage, a.cred, config.corpus, config.topics, rr, handle, a.reranked); }});
    runner.run({"eval",
                {{"qrels_mode", config.qrels_mode == QrelsMode::strict ? "strict" : "permissive"}},
                {{"run", a.reranked}, {"qrels", config.qrels}},
                {a.report},
                [&] { stage_eval(a.reranked, config.qrels, a.report, config.qrels_mode); }});

    json manifest{{"format", 1}, {"config", config.to_json()}, {"stages", runner.stages()}};
    write_json(manifest, a.manifest);

    PipelineResult result;
    result.run = a.reranked;
    result.report = a.report;
    result.manifest = a.manifest;
    result.stages = runner.outcomes();
    result.evaluation = evaluate_run(read_run(a.reranked), Qrels(load_qrels(config.qrels, config.qrels_mode)));
    return result;
}

std::string sweep_tag(const RerankRunConfig& config) {
    switch (config.variant) {
        case InputVariant::plain_ce:
            return "plain_ce";
        case InputVariant::rel_stat:
            return "rel_stat." + std::string(to_string(config.template_id)) + "." +
                   repr_tag(config.representation);
        default:
            return std::string(to_string(config.variant)) + "." + repr_tag(config.representation);
    }
}

SweepResult run_sweep(const PipelineConfig& config, const SweepPlan& plan, std::ostream* log) {
    config.validate();
    if (plan.variants.empty()) throw ValidationError("sweep needs at least one variant");
    fs::create_directories(config.output_dir);
    const Artifacts a(config.output_dir);
    StageRunner runner(a.manifest, log);
    run_upstream(config, a, runner);

    const ScorerHandle& handle = config.scorer;
    const fs::path dir = config.output_dir / "sweep";
    fs::create_directories(dir);

    std::vector<std::pair<std::string, fs::path>> runs{{"bm25", a.first_stage}};
    const fs::path wam_path = dir / "wam.run";
    stage_fuse(a.first_stage, a.cred, config.fusion, "wam", wam_path);
    runs.emplace_back("wam", wam_path);

    const auto templates = plan.templates.empty() ? std::vector{config.enhancement.template_id} : plan.templates;
    const auto reprs = plan.representations.empty() ? std::vector{config.enhancement.representation}
                                                    : plan.representations;
    std::set<std::string> seen{"bm25", "wam"};
    for (auto variant : plan.variants) {
        for (const auto& repr : reprs) {
            for (auto tmpl : templates) {
                RerankRunConfig rr = rerank_config(config);
                rr.variant = variant;
                rr.representation = repr;
                rr.template_id = tmpl;
                if (variant == InputVariant::rel_stat && tmpl == StatementTemplate::score_only) continue;
                rr.tag = sweep_tag(rr);
                if (!seen.insert(rr.tag).second) continue;
                const fs::path out = dir / (rr.tag + ".run");
                if (log) *log << "[sweep] " << rr.tag << '\n';
                stage_rerank(a.first_stage, a.cred, config.corpus, config.topics, rr, handle, out);
                runs.emplace_back(rr.tag, out);
            }
        }
    }

    const Qrels judged(load_qrels(config.qrels, config.qrels_mode));
    SweepResult result;
    json aggregates = json::object();
    for (const auto& [tag, path] : runs) {
        auto report = evaluate_run(read_run(path), judged);
        report.run_tag = tag;
        write_report(report, dir / (tag + ".json"));
        aggregates[tag] = report_to_json(report)["aggregate"];
        result.tags.push_back(tag);
        result.reports.push_back(std::move(report));
    }
    result.significance = compare_runs(result.reports, plan.metrics);
    json summary = significance_to_json(result.significance);
    summary["runs"] = result.tags;
    summary["aggregates"] = aggregates;
    result.summary = dir / "summary.json";
    write_json(summary, result.summary);
    return result;
}

}  // namespace mdr
