#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdr/bm25.hpp"
#include "mdr/credibility.hpp"
#include "mdr/enhancement.hpp"
#include "mdr/fusion.hpp"
#include "mdr/metrics.hpp"
#include "mdr/rerank.hpp"
#include "mdr/significance.hpp"

namespace mdr {

namespace fs = std::filesystem;

/// Name of the environment variable that overrides the scorer backend.
inline constexpr const char* kScorerEnv = "MDRERANK_SCORER";

/// Backend precedence: command-line flag, then the environment variable, then
/// the config file. Empty strings count as unset.
std::string resolve_scorer_backend(const std::optional<std::string>& flag, const char* env,
                                   const std::string& configured);

// Individual stages. Each reads its inputs from disk and writes one artifact;
// the CLI subcommands and run_pipeline both go through these.

void stage_index(const fs::path& corpus, const Tokenizer& tokenizer, const fs::path& out);
void stage_retrieve(const fs::path& index, const fs::path& topics, std::size_t n,
                    const Bm25Params& params, const std::string& tag, const fs::path& out);
void stage_cred(const fs::path& evidence_index, const fs::path& evidence, const fs::path& corpus,
                const fs::path& topics, const fs::path& run, const CredibilityConfig& config,
                const std::string& embedder, const Bm25Params& params, const fs::path& out);
void stage_enhance(const fs::path& run, const fs::path& cred, const fs::path& corpus,
                   const EnhancementConfig& config, const fs::path& out);
void stage_rerank(const fs::path& run, const fs::path& cred, const fs::path& corpus,
                  const fs::path& topics, const RerankRunConfig& config, const ScorerHandle& scorer,
                  const fs::path& out);
void stage_fuse(const fs::path& run, const fs::path& cred, const FusionConfig& config,
                const std::string& tag, const fs::path& out);
EvalReport stage_eval(const fs::path& run, const fs::path& qrels, const fs::path& out,
                      QrelsMode mode = QrelsMode::strict);
std::vector<SignificanceResult> stage_compare(const std::vector<fs::path>& runs, const fs::path& qrels,
                                              const std::vector<Metric>& metrics, const fs::path& out,
                                              QrelsMode mode = QrelsMode::strict);

struct PipelineConfig {
    fs::path corpus;
    fs::path evidence;
    fs::path topics;
    fs::path qrels;
    fs::path output_dir = "out";

    Stemmer stemmer = Stemmer::none;
    std::optional<fs::path> stopwords;
    Bm25Params bm25;
    std::size_t first_stage_n = 500;

    CredibilityConfig credibility;
    std::string embedder = "stub:7";

    EnhancementConfig enhancement;
    RerankRunConfig rerank;
    ScorerHandle scorer;
    FusionConfig fusion;
    QrelsMode qrels_mode = QrelsMode::strict;

    /// Unknown keys are rejected. Relative paths resolve against `base_dir`.
    static PipelineConfig from_json(const nlohmann::json& j, const fs::path& base_dir = {});
    static PipelineConfig load(const fs::path& path);
    nlohmann::json to_json() const;

    /// Parameter domains and input-path existence. Throws ValidationError.
    void validate() const;
    Tokenizer tokenizer() const;
};

struct StageOutcome {
    std::string stage;
    bool skipped = false;
};

struct PipelineResult {
    fs::path run;
    fs::path report;
    fs::path manifest;
    std::vector<StageOutcome> stages;
    EvalReport evaluation;
};

/// Uses `config.scorer.backend` as given; callers apply resolve_scorer_backend.
/// index -> retrieve -> cred -> enhance -> rerank -> eval, each artifact in
/// `output_dir`. `manifest.json` records the config plus the checksum of every
/// stage input and output; a stage whose inputs, parameters and outputs are
/// unchanged since the last manifest is skipped.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

struct SweepPlan {
    std::vector<InputVariant> variants;
    std::vector<StatementTemplate> templates;
    std::vector<ScoreRepresentation> representations;
    std::vector<Metric> metrics{std::begin(kAllMetrics), std::end(kAllMetrics)};
};

struct SweepResult {
    std::vector<std::string> tags;  // bm25, wam, then one per distinct rerank configuration
    std::vector<EvalReport> reports;
    std::vector<SignificanceResult> significance;
    fs::path summary;
};

/// Runs the upstream stages once, then one rerank run per distinct
/// (variant, template, representation) combination plus the BM25 and WAM
/// baselines, evaluates all of them and tests every pair.
SweepResult run_sweep(const PipelineConfig& config, const SweepPlan& plan, std::ostream* log = nullptr);

/// Tag naming a rerank configuration, e.g. `rel_stat.c2.decimal4`.
std::string sweep_tag(const RerankRunConfig& config);

}  // namespace mdr
