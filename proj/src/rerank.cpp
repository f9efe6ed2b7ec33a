#include "mdr/rerank.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "mdr/checksum.hpp"
#include "mdr/errors.hpp"
#include "mdr/scorer_client.hpp"
#include "mdr/tokenizer.hpp"

namespace mdr {
namespace {

constexpr double kJitterScale = 1e-6;

using CorpusLookup = std::unordered_map<std::string, const Document*>;

CorpusLookup make_lookup(const std::vector<Document>& corpus) {
    CorpusLookup by_id;
    by_id.reserve(corpus.size());
    for (const auto& d : corpus) by_id.emplace(d.doc_id, &d);
    return by_id;
}

void require(bool needed, const std::optional<std::string>& value, InputVariant v, const char* what) {
    if (needed && !value) {
        throw ValidationError("variant " + std::string(to_string(v)) + " requires a " + what + " score");
    }
    if (!needed && value) {
        throw ValidationError("variant " + std::string(to_string(v)) + " takes no " + what + " score");
    }
    if (value && value->empty()) {
        throw ValidationError("variant " + std::string(to_string(v)) + ": empty " + what + " score");
    }
}

std::vector<ScorerInput> topic_inputs(const RerankRunConfig& config, const Topic& topic,
                                      const RankedList& list, const CorpusLookup& corpus,
                                      const CredibilityTable& cred) {
    std::vector<ScorerInput> inputs;
    if (list.items.empty()) return inputs;
    const auto v = config.variant;
    const bool want_bm25 = v == InputVariant::bm25cat || v == InputVariant::bm25credcat;
    const bool want_cred_segment = v == InputVariant::credcat || v == InputVariant::bm25credcat;

    // Statements for rel_* variants come from the enhancement module so the
    // enhanced documents are identical to what `enhance` writes.
    std::vector<std::string> enhanced;
    if (v == InputVariant::rel_stat || v == InputVariant::rel_score) {
        std::vector<Document> docs;
        EnhancementConfig ec{config.representation,
                             v == InputVariant::rel_score ? StatementTemplate::score_only
                                                          : config.template_id,
                             config.normalize_credibility};
        for (const auto& item : list.items) {
            auto d = corpus.find(item.doc_id);
            if (d == corpus.end()) {
                throw ValidationError("topic " + list.topic_id + ": document '" + item.doc_id +
                                      "' missing from the corpus");
            }
            docs.push_back(*d->second);
        }
        for (auto& e : enhance_run({list}, docs, cred, ec)) enhanced.push_back(std::move(e.enhanced_text));
    }

    const RankedList topicality = minmax_normalize(list);
    const std::vector<double> cred_values =
        want_cred_segment ? topic_credibility(list, cred, config.normalize_credibility)
                          : std::vector<double>{};
    inputs.reserve(list.items.size());
    for (std::size_t i = 0; i < list.items.size(); ++i) {
        const auto& item = list.items[i];
        if (!enhanced.empty()) {
            inputs.push_back(build_input(v, topic, enhanced[i]));
            continue;
        }
        auto d = corpus.find(item.doc_id);
        if (d == corpus.end()) {
            throw ValidationError("topic " + list.topic_id + ": document '" + item.doc_id +
                                  "' missing from the corpus");
        }
        std::optional<std::string> bm25, c;
        if (want_bm25) bm25 = format_score(topicality.items[i].score, config.representation);
        if (want_cred_segment) c = format_score(cred_values[i], config.representation);
        inputs.push_back(build_input(v, topic, d->second->text, bm25, c));
    }
    return inputs;
}

RankedList rerank_with(const RerankRunConfig& config, const Topic& topic, const RankedList& list,
                       const CorpusLookup& corpus, const CredibilityTable& cred, Scorer& scorer) {
    // Candidates are a set: any order is accepted, duplicates are not.
    std::set<std::string> seen;
    for (const auto& item : list.items) {
        if (!seen.insert(item.doc_id).second) {
            throw ValidationError("topic " + list.topic_id + ": duplicate candidate " + item.doc_id);
        }
    }
    if (list.items.size() > config.first_stage_n) {
        throw ValidationError("topic " + list.topic_id + ": " + std::to_string(list.items.size()) +
                              " candidates exceed first_stage_n=" + std::to_string(config.first_stage_n));
    }
    const auto inputs = topic_inputs(config, topic, list, corpus, cred);
    const auto scores = score_batch(scorer, inputs);
    RankedList out{list.topic_id, {}};
    out.items.reserve(list.items.size());
    for (std::size_t i = 0; i < list.items.size(); ++i) out.items.push_back({list.items[i].doc_id, scores[i]});
    sort_ranked(out.items);
    return out;
}

}  // namespace

InputVariant parse_variant(std::string_view name) {
    if (name == "plain_ce") return InputVariant::plain_ce;
    if (name == "bm25cat") return InputVariant::bm25cat;
    if (name == "credcat") return InputVariant::credcat;
    if (name == "bm25credcat") return InputVariant::bm25credcat;
    if (name == "rel_score") return InputVariant::rel_score;
    if (name == "rel_stat") return InputVariant::rel_stat;
    throw ValidationError("unknown variant '" + std::string(name) +
                          "' (expected plain_ce|bm25cat|credcat|bm25credcat|rel_score|rel_stat)");
}

std::string_view to_string(InputVariant v) {
    switch (v) {
        case InputVariant::plain_ce: return "plain_ce";
        case InputVariant::bm25cat: return "bm25cat";
        case InputVariant::credcat: return "credcat";
        case InputVariant::bm25credcat: return "bm25credcat";
        case InputVariant::rel_score: return "rel_score";
        case InputVariant::rel_stat: return "rel_stat";
    }
    return "?";
}

ScorerInput build_input(InputVariant variant, const Topic& query, const std::string& doc_text,
                        const std::optional<std::string>& bm25, const std::optional<std::string>& cred) {
    const bool want_bm25 = variant == InputVariant::bm25cat || variant == InputVariant::bm25credcat;
    const bool want_cred = variant == InputVariant::credcat || variant == InputVariant::bm25credcat;
    require(want_bm25, bm25, variant, "BM25");
    require(want_cred, cred, variant, "credibility");
    if (query.text.empty()) throw ValidationError("topic " + query.topic_id + " has an empty query");
    if (doc_text.empty()) throw ValidationError("empty document text for topic " + query.topic_id);

    ScorerInput in;
    in.segments.push_back(query.text);
    if (bm25) in.segments.push_back(*bm25);
    if (cred) in.segments.push_back(*cred);
    in.segments.push_back(doc_text);
    return in;
}

double stub_score(const ScorerInput& input, std::uint64_t seed) {
    std::set<std::string> query, doc;
    std::string joined;
    for (std::size_t i = 0; i < input.segments.size(); ++i) {
        auto tokens = tokenize(input.segments[i]);
        (i == 0 ? query : doc).insert(tokens.begin(), tokens.end());
        joined += input.segments[i];
        joined.push_back('\x1f');
    }
    std::size_t common = 0;
    for (const auto& t : query) common += doc.count(t);
    const std::size_t uni = query.size() + doc.size() - common;
    const double jaccard = uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
    const double unit = static_cast<double>(stable_hash(joined, seed) >> 11) * 0x1.0p-53;
    return (1.0 - kJitterScale) * jaccard + kJitterScale * 0.999 * unit;
}

std::vector<double> StubScorer::score(const std::vector<ScorerInput>& inputs) {
    std::vector<double> out(inputs.size());
    const auto count = static_cast<std::int64_t>(inputs.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = stub_score(inputs[static_cast<std::size_t>(i)], seed_);
    }
    return out;
}

std::vector<double> StubScorer::score_serial(const std::vector<ScorerInput>& inputs) const {
    std::vector<double> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) out.push_back(stub_score(in, seed_));
    return out;
}

RemoteScorer::RemoteScorer(std::string endpoint, std::size_t batch_size, std::size_t max_in_flight,
                           RetryPolicy retry)
    : endpoint_(std::move(endpoint)),
      batch_size_(std::max<std::size_t>(1, batch_size)),
      max_in_flight_(std::max<std::size_t>(1, max_in_flight)),
      retry_(retry) {}

std::vector<double> RemoteScorer::score(const std::vector<ScorerInput>& inputs) {
    const std::size_t batches = (inputs.size() + batch_size_ - 1) / batch_size_;
    std::vector<std::vector<double>> replies(batches);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t seq = next.fetch_add(1);
            if (seq >= batches) return;
            const std::size_t start = seq * batch_size_;
            const std::size_t end = std::min(inputs.size(), start + batch_size_);
            try {
                nlohmann::json items = nlohmann::json::array();
                for (std::size_t i = start; i < end; ++i) {
                    items.push_back({{"segments", inputs[i].segments}});
                }
                auto reply = post_json(endpoint_, "/score", {{"items", items}}, retry_);
                const std::string where = endpoint_ + "/score batch " + std::to_string(seq) +
                                          " (inputs " + std::to_string(start) + ".." +
                                          std::to_string(end - 1) + ")";
                if (!reply.is_object() || !reply.contains("scores") || !reply["scores"].is_array()) {
                    throw RemoteError(where + ": response lacks a scores array");
                }
                std::vector<double> scores;
                for (const auto& s : reply["scores"]) {
                    if (!s.is_number()) throw RemoteError(where + ": non-numeric score");
                    scores.push_back(s.get<double>());
                }
                if (scores.size() != end - start) {
                    throw RemoteError(where + ": expected " + std::to_string(end - start) +
                                      " scores, got " + std::to_string(scores.size()));
                }
                replies[seq] = std::move(scores);
            } catch (const RemoteError& e) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::make_exception_ptr(RemoteError(
                    "batch " + std::to_string(seq) + " failed: " + e.what()));
                failed = true;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        const std::size_t threads = std::min(max_in_flight_, batches);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    std::vector<double> out;
    out.reserve(inputs.size());
    for (auto& r : replies) out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::unique_ptr<Scorer> make_scorer(const ScorerHandle& handle) {
    const auto& plan = handle.backend;
    if (plan.rfind("stub:", 0) == 0) {
        const std::string seed = plan.substr(5);
        char* end = nullptr;
        const auto value = std::strtoull(seed.c_str(), &end, 10);
        if (seed.empty() || *end != '\0') throw ValidationError("bad stub seed in '" + plan + "'");
        return std::make_unique<StubScorer>(value);
    }
    if (plan.rfind("http://", 0) == 0) {
        return std::make_unique<RemoteScorer>(plan, handle.batch_size, handle.max_in_flight, handle.retry);
    }
    throw ValidationError("scorer must be 'stub:<seed>' or an http:// URL, got '" + plan + "'");
}

std::vector<double> score_batch(Scorer& scorer, const std::vector<ScorerInput>& inputs) {
    if (inputs.empty()) return {};
    for (const auto& in : inputs) {
        if (in.segments.size() < 2) throw ValidationError("scorer input needs at least two segments");
        for (const auto& s : in.segments) {
            if (s.empty()) throw ValidationError("scorer input has an empty segment");
        }
    }
    auto scores = scorer.score(inputs);
    if (scores.size() != inputs.size()) {
        throw RemoteError(scorer.describe() + " returned " + std::to_string(scores.size()) +
                          " scores for " + std::to_string(inputs.size()) + " inputs");
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i]) || scores[i] < 0.0 || scores[i] > 1.0) {
            throw RemoteError(scorer.describe() + ": score " + std::to_string(scores[i]) +
                              " for input " + std::to_string(i) + " is outside [0,1]");
        }
    }
    return scores;
}

void RerankRunConfig::validate() const {
    representation.validate();
    if (first_stage_n == 0) throw ValidationError("first_stage_n must be >= 1");
    if (tag.empty() || tag.find_first_of(" \t\r\n") != std::string::npos) {
        throw ValidationError("run tag must be a non-empty token");
    }
    if (variant == InputVariant::rel_stat && template_id == StatementTemplate::score_only) {
        throw ValidationError("rel_stat needs a statement template (c1, c2, t1, t2 or tc)");
    }
}

bool RerankRunConfig::needs_credibility() const {
    switch (variant) {
        case InputVariant::credcat:
        case InputVariant::bm25credcat:
        case InputVariant::rel_score:
            return true;
        case InputVariant::rel_stat:
            return mdr::needs_credibility(template_id);
        default:
            return false;
    }
}

std::vector<ScorerInput> build_topic_inputs(const RerankRunConfig& config, const Topic& topic,
                                            const RankedList& first_stage,
                                            const std::vector<Document>& corpus,
                                            const CredibilityTable& cred) {
    config.validate();
    return topic_inputs(config, topic, first_stage, make_lookup(corpus), cred);
}

RankedList rerank_topic(const RerankRunConfig& config, const Topic& topic,
                        const RankedList& first_stage, const std::vector<Document>& corpus,
                        const CredibilityTable& cred, Scorer& scorer) {
    config.validate();
    return rerank_with(config, topic, first_stage, make_lookup(corpus), cred, scorer);
}

std::vector<RankedList> rerank_run(const RerankRunConfig& config, const std::vector<Topic>& topics,
                                   const std::vector<RankedList>& first_stage,
                                   const std::vector<Document>& corpus,
                                   const CredibilityTable& cred, Scorer& scorer) {
    config.validate();
    const auto lookup = make_lookup(corpus);
    std::unordered_map<std::string, const Topic*> topic_by_id;
    for (const auto& t : topics) topic_by_id.emplace(t.topic_id, &t);

    std::vector<RankedList> out;
    out.reserve(first_stage.size());
    for (const auto& list : truncate(first_stage, config.first_stage_n)) {
        auto t = topic_by_id.find(list.topic_id);
        if (t == topic_by_id.end()) {
            throw ValidationError("run names unknown topic '" + list.topic_id + "'");
        }
        out.push_back(rerank_with(config, *t->second, list, lookup, cred, scorer));
    }
    return out;
}

}  // namespace mdr
