#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mdr/corpus_io.hpp"
#include "mdr/credibility.hpp"
#include "mdr/embedder.hpp"
#include "mdr/enhancement.hpp"
#include "mdr/ranked_list.hpp"

namespace mdr {

/// Cross-encoder input layouts:
///   plain_ce     [q, d]
///   bm25cat      [q, BM25, d]
///   credcat      [q, cred, d]
///   bm25credcat  [q, BM25, cred, d]
///   rel_score    [q, d~]  d~ = credibility score string + " " + d
///   rel_stat     [q, d~]  d~ = relevance statement + " " + d
enum class InputVariant { plain_ce, bm25cat, credcat, bm25credcat, rel_score, rel_stat };

InputVariant parse_variant(std::string_view name);
std::string_view to_string(InputVariant v);

/// Segments are joined by the scorer with its own separator token.
struct ScorerInput {
    std::vector<std::string> segments;

    bool operator==(const ScorerInput&) const = default;
};

/// Throws ValidationError when a score string the variant needs is missing,
/// when one it does not use is supplied, or when any segment would be empty.
/// For rel_score and rel_stat, `doc_text` is the already enhanced document.
ScorerInput build_input(InputVariant variant, const Topic& query, const std::string& doc_text,
                        const std::optional<std::string>& bm25 = std::nullopt,
                        const std::optional<std::string>& cred = std::nullopt);

/// Jaccard overlap of segment 0's tokens with the tokens of all remaining
/// segments, scaled into [0, 1 - 1e-6] and lifted by a seeded jitter below
/// 1e-6 that breaks ties deterministically.
double stub_score(const ScorerInput& input, std::uint64_t seed);

class Scorer {
public:
    virtual ~Scorer() = default;
    /// One score per input, order-aligned.
    virtual std::vector<double> score(const std::vector<ScorerInput>& inputs) = 0;
    virtual std::string describe() const = 0;
};

/// Offline scorer built on stub_score; scoring runs in parallel over inputs.
class StubScorer final : public Scorer {
public:
    explicit StubScorer(std::uint64_t seed) : seed_(seed) {}
    std::vector<double> score(const std::vector<ScorerInput>& inputs) override;
    std::string describe() const override { return "stub:" + std::to_string(seed_); }
    std::uint64_t seed() const { return seed_; }

    std::vector<double> score_serial(const std::vector<ScorerInput>& inputs) const;

private:
    std::uint64_t seed_;
};

/// Client for `POST /score {items: [{segments}]} -> {scores}`. Inputs are cut
/// into batches of `batch_size`; at most `max_in_flight` batches are
/// outstanding and replies are placed by batch sequence number.
class RemoteScorer final : public Scorer {
public:
    RemoteScorer(std::string endpoint, std::size_t batch_size = 4, std::size_t max_in_flight = 4,
                 RetryPolicy retry = {});
    std::vector<double> score(const std::vector<ScorerInput>& inputs) override;
    std::string describe() const override { return endpoint_; }

private:
    std::string endpoint_;
    std::size_t batch_size_;
    std::size_t max_in_flight_;
    RetryPolicy retry_;
};

struct ScorerHandle {
    std::string backend = "stub:42";  // `stub:<seed>` or `http://host:port`
    std::size_t batch_size = 4;
    std::size_t max_in_flight = 4;
    RetryPolicy retry;
};

std::unique_ptr<Scorer> make_scorer(const ScorerHandle& handle);

/// Scores through `scorer` and enforces the reply contract: one finite score
/// in [0,1] per input. Violations are RemoteError.
std::vector<double> score_batch(Scorer& scorer, const std::vector<ScorerInput>& inputs);

struct RerankRunConfig {
    InputVariant variant = InputVariant::rel_stat;
    ScoreRepresentation representation = ScoreRepresentation::decimal(4);
    StatementTemplate template_id = StatementTemplate::c2;
    std::size_t first_stage_n = 500;
    std::string tag = "rerank";
    bool normalize_credibility = false;

    /// rel_stat needs a statement template (not score_only).
    void validate() const;
    bool needs_credibility() const;
};

/// Inputs for every document of one topic's first-stage list, in list order.
std::vector<ScorerInput> build_topic_inputs(const RerankRunConfig& config, const Topic& topic,
                                            const RankedList& first_stage,
                                            const std::vector<Document>& corpus,
                                            const CredibilityTable& cred);

/// Re-scores and re-sorts one topic's candidates. Output is a permutation of
/// the input documents.
RankedList rerank_topic(const RerankRunConfig& config, const Topic& topic,
                        const RankedList& first_stage, const std::vector<Document>& corpus,
                        const CredibilityTable& cred, Scorer& scorer);

/// rerank_topic over every list; lists are truncated to first_stage_n first.
std::vector<RankedList> rerank_run(const RerankRunConfig& config, const std::vector<Topic>& topics,
                                   const std::vector<RankedList>& first_stage,
                                   const std::vector<Document>& corpus,
                                   const CredibilityTable& cred, Scorer& scorer);

}  // namespace mdr
