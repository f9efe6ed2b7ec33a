#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdr/bm25.hpp"
#include "mdr/corpus_io.hpp"
#include "mdr/embedder.hpp"
#include "mdr/inverted_index.hpp"
#include "mdr/ranked_list.hpp"

namespace mdr {

enum class WeightSchedule { linear_decay, uniform, custom };

std::string_view to_string(WeightSchedule s);
WeightSchedule parse_schedule(std::string_view name);

/// Rank weights for the evidence articles: they sum to one and never increase
/// with rank.
struct CredibilityConfig {
    std::size_t k = 3;
    WeightSchedule schedule = WeightSchedule::linear_decay;
    std::vector<double> custom_weights;  // only read for WeightSchedule::custom
    double no_evidence_score = 0.0;

    std::vector<double> weights() const;
};

/// linear_decay: w_i = (k - i + 1) / (k(k+1)/2); uniform: 1/k. Throws for
/// k == 0 or for the custom schedule (use validate_weights).
std::vector<double> make_weights(std::size_t k, WeightSchedule schedule);

/// Sum to 1 within 1e-9, non-negative, non-increasing. Throws ValidationError.
void validate_weights(std::span<const double> weights);

/// First m weights rescaled to sum to 1; used when fewer than k articles match.
std::vector<double> renormalize_prefix(std::span<const double> weights, std::size_t m);

/// Clamped to [-1,1]. Throws on dimension mismatch or a zero vector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// BM25 top-k over the evidence index with the usual tie rules.
std::vector<std::string> retrieve_evidence(const InvertedIndex& evidence_index, const Topic& topic,
                                           std::size_t k, const Bm25Params& params = {});

/// Rank-weighted combination of cosines between the document and each
/// evidence article, evidence given in retrieval rank order.
double score_credibility(const EmbeddingVector& doc, std::span<const EmbeddingVector> evidence,
                         std::span<const double> weights);

struct CredibilityScore {
    std::string topic_id;
    std::string doc_id;
    double value = 0.0;
    std::vector<std::string> evidence_ids;
    bool no_evidence = false;

    bool operator==(const CredibilityScore&) const = default;
};

/// Lookup by (topic, doc).
class CredibilityTable {
public:
    CredibilityTable() = default;
    explicit CredibilityTable(std::vector<CredibilityScore> scores);

    const CredibilityScore* find(const std::string& topic_id, const std::string& doc_id) const;
    /// Throws ValidationError naming the pair when absent.
    const CredibilityScore& at(const std::string& topic_id, const std::string& doc_id) const;
    const std::vector<CredibilityScore>& scores() const { return scores_; }

private:
    std::vector<CredibilityScore> scores_;
    std::unordered_map<std::string, std::size_t> by_key_;
};

struct CredibilityInputs {
    const std::vector<Topic>& topics;
    const std::vector<RankedList>& first_stage;
    const std::vector<Document>& corpus;
    const InvertedIndex& evidence_index;
    const std::vector<EvidenceArticle>& evidence;
    Bm25Params bm25{};  // evidence retrieval
};

/// Scores every (topic, doc) pair in the first-stage lists. Embeddings are
/// fetched once per distinct text; the weighted-cosine step runs in
/// parallel over pairs. Output order follows the first-stage lists.
std::vector<CredibilityScore> compute_credibility(const CredibilityInputs& in, Embedder& embedder,
                                                  const CredibilityConfig& config);
std::vector<CredibilityScore> compute_credibility_serial(const CredibilityInputs& in,
                                                         Embedder& embedder,
                                                         const CredibilityConfig& config);

/// JSONL records {topic_id, doc_id, cred, evidence_ids, no_evidence_flag}.
void write_credibility(const std::vector<CredibilityScore>& scores, const std::filesystem::path& path);
std::vector<CredibilityScore> read_credibility(const std::filesystem::path& path);

}  // namespace mdr
