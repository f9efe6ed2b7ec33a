#include "mdr/credibility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mdr/errors.hpp"

namespace mdr {
namespace {

using nlohmann::json;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double cosine_unchecked(const EmbeddingVector& a, const EmbeddingVector& b) {
    const double c = dot(a.values, b.values) /
                     (std::sqrt(dot(a.values, a.values)) * std::sqrt(dot(b.values, b.values)));
    return std::clamp(c, -1.0, 1.0);
}

void check_embedding(const EmbeddingVector& v, std::size_t dim, const std::string& what) {
    if (v.dim() == 0 || v.dim() != dim) {
        throw ValidationError("embedding of " + what + " has dim " + std::to_string(v.dim()) +
                              ", expected " + std::to_string(dim));
    }
    bool nonzero = false;
    for (double x : v.values) {
        if (!std::isfinite(x)) throw ValidationError("embedding of " + what + " is not finite");
        nonzero = nonzero || x != 0.0;
    }
    if (!nonzero) throw ValidationError("embedding of " + what + " is the zero vector");
}

std::string pair_key(const std::string& topic, const std::string& doc) {
    std::string key = topic;
    key.push_back('\0');
    key += doc;
    return key;
}

// Everything the pair kernel needs, gathered serially up front.
struct Prepared {
    struct TopicEvidence {
        std::vector<std::size_t> evidence;  // indices into `vectors`
        std::vector<std::string> evidence_ids;
        std::vector<double> weights;
    };
    std::vector<TopicEvidence> topics;             // aligned with first_stage
    std::vector<std::vector<std::size_t>> docs;    // per list, per item: index into `vectors`
    std::vector<EmbeddingVector> vectors;
};

Prepared prepare(const CredibilityInputs& in, Embedder& embedder, const CredibilityConfig& config) {
    const auto base_weights = config.weights();

    std::unordered_map<std::string, const Topic*> topic_by_id;
    for (const auto& t : in.topics) topic_by_id.emplace(t.topic_id, &t);
    std::unordered_map<std::string, const std::string*> doc_text;
    for (const auto& d : in.corpus) doc_text.emplace(d.doc_id, &d.text);
    std::unordered_map<std::string, const std::string*> evidence_text;
    for (const auto& a : in.evidence) evidence_text.emplace(a.doc_id, &a.text);

    Prepared prep;
    std::vector<std::string> texts;
    std::unordered_map<std::string, std::size_t> slot;  // "d:" / "e:" + id -> vector index
    auto intern = [&](const std::string& key, const std::string& text) {
        auto [it, inserted] = slot.emplace(key, texts.size());
        if (inserted) texts.push_back(text);
        return it->second;
    };

    for (const auto& list : in.first_stage) {
        auto t = topic_by_id.find(list.topic_id);
        if (t == topic_by_id.end()) {
            throw ValidationError("first-stage run names unknown topic '" + list.topic_id + "'");
        }
        Prepared::TopicEvidence te;
        te.evidence_ids = retrieve_evidence(in.evidence_index, *t->second, config.k, in.bm25);
        te.weights = renormalize_prefix(base_weights, te.evidence_ids.size());
        for (const auto& id : te.evidence_ids) {
            auto e = evidence_text.find(id);
            if (e == evidence_text.end()) {
                throw ValidationError("evidence index references article '" + id +
                                      "' missing from the evidence corpus");
            }
            te.evidence.push_back(intern("e:" + id, *e->second));
        }
        prep.topics.push_back(std::move(te));

        std::vector<std::size_t> doc_slots;
        for (const auto& item : list.items) {
            auto d = doc_text.find(item.doc_id);
            if (d == doc_text.end()) {
                throw ValidationError("topic " + list.topic_id + ": document '" + item.doc_id +
                                      "' missing from the corpus");
            }
            doc_slots.push_back(intern("d:" + item.doc_id, *d->second));
        }
        prep.docs.push_back(std::move(doc_slots));
    }

    prep.vectors = texts.empty() ? std::vector<EmbeddingVector>{} : embedder.embed(texts);
    if (prep.vectors.size() != texts.size()) {
        throw RemoteError("embedder returned " + std::to_string(prep.vectors.size()) +
                          " vectors for " + std::to_string(texts.size()) + " texts");
    }
    if (!prep.vectors.empty()) {
        const std::size_t dim = prep.vectors.front().dim();
        for (const auto& [key, idx] : slot) check_embedding(prep.vectors[idx], dim, key.substr(2));
    }
    return prep;
}

CredibilityScore score_pair(const Prepared& prep, const RankedList& list, std::size_t list_idx,
                            std::size_t item_idx, const CredibilityConfig& config) {
    const auto& te = prep.topics[list_idx];
    CredibilityScore out{list.topic_id, list.items[item_idx].doc_id, config.no_evidence_score,
                         te.evidence_ids, te.evidence.empty()};
    if (!out.no_evidence) {
        const auto& doc = prep.vectors[prep.docs[list_idx][item_idx]];
        double s = 0.0;
        for (std::size_t i = 0; i < te.evidence.size(); ++i) {
            s += te.weights[i] * cosine_unchecked(doc, prep.vectors[te.evidence[i]]);
        }
        out.value = s;
    }
    return out;
}

}  // namespace

std::string_view to_string(WeightSchedule s) {
    switch (s) {
        case WeightSchedule::linear_decay: return "linear_decay";
        case WeightSchedule::uniform: return "uniform";
        case WeightSchedule::custom: return "custom";
    }
    return "?";
}

WeightSchedule parse_schedule(std::string_view name) {
    if (name == "linear_decay") return WeightSchedule::linear_decay;
    if (name == "uniform") return WeightSchedule::uniform;
    if (name == "custom") return WeightSchedule::custom;
    throw ValidationError("unknown weight schedule '" + std::string(name) +
                          "' (expected linear_decay|uniform|custom)");
}

std::vector<double> make_weights(std::size_t k, WeightSchedule schedule) {
    if (k == 0) throw ValidationError("evidence count k must be >= 1");
    std::vector<double> w(k);
    switch (schedule) {
        case WeightSchedule::linear_decay: {
            const double total = static_cast<double>(k) * static_cast<double>(k + 1) / 2.0;
            for (std::size_t i = 0; i < k; ++i) w[i] = static_cast<double>(k - i) / total;
            break;
        }
        case WeightSchedule::uniform:
            std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(k));
            break;
        case WeightSchedule::custom:
            throw ValidationError("custom weights must be supplied explicitly");
    }
    return w;
}

void validate_weights(std::span<const double> weights) {
    if (weights.empty()) throw ValidationError("weight vector is empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
            throw ValidationError("weight " + std::to_string(i + 1) + " is negative or not finite");
        }
        if (i > 0 && weights[i] > weights[i - 1]) {
            throw ValidationError("weights must be non-increasing (w" + std::to_string(i) + " < w" +
                                  std::to_string(i + 1) + ")");
        }
        sum += weights[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("weights must sum to 1, got " + std::to_string(sum));
    }
}

std::vector<double> CredibilityConfig::weights() const {
    if (schedule == WeightSchedule::custom) {
        if (custom_weights.size() != k) {
            throw ValidationError("custom schedule needs exactly k=" + std::to_string(k) + " weights");
        }
        validate_weights(custom_weights);
        return custom_weights;
    }
    return make_weights(k, schedule);
}

std::vector<double> renormalize_prefix(std::span<const double> weights, std::size_t m) {
    if (m > weights.size()) throw ValidationError("cannot take more weights than configured");
    std::vector<double> out(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(m));
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (m > 0 && total <= 0.0) throw ValidationError("leading weights sum to zero");
    for (auto& w : out) w /= total;
    return out;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw ValidationError("cosine of vectors with dims " + std::to_string(a.dim()) + " and " +
                              std::to_string(b.dim()));
    }
    check_embedding(a, a.dim(), "left operand");
    check_embedding(b, b.dim(), "right operand");
    return cosine_unchecked(a, b);
}

std::vector<std::string> retrieve_evidence(const InvertedIndex& evidence_index, const Topic& topic,
                                           std::size_t k, const Bm25Params& params) {
    if (k == 0) throw ValidationError("evidence count k must be >= 1");
    auto ranked = retrieve(evidence_index, topic, k, params);
    std::vector<std::string> ids;
    for (auto& item : ranked.items) ids.push_back(std::move(item.doc_id));
    return ids;
}

double score_credibility(const EmbeddingVector& doc, std::span<const EmbeddingVector> evidence,
                         std::span<const double> weights) {
    if (evidence.empty()) throw ValidationError("credibility needs at least one evidence article");
    if (evidence.size() != weights.size()) {
        throw ValidationError("got " + std::to_string(evidence.size()) + " evidence vectors for " +
                              std::to_string(weights.size()) + " weights");
    }
    validate_weights(weights);
    double s = 0.0;
    for (std::size_t i = 0; i < evidence.size(); ++i) s += weights[i] * cosine(doc, evidence[i]);
    return s;
}

CredibilityTable::CredibilityTable(std::vector<CredibilityScore> scores) : scores_(std::move(scores)) {
    for (std::size_t i = 0; i < scores_.size(); ++i) {
        if (!by_key_.emplace(pair_key(scores_[i].topic_id, scores_[i].doc_id), i).second) {
            throw ValidationError("duplicate credibility record for (" + scores_[i].topic_id + ", " +
                                  scores_[i].doc_id + ")");
        }
    }
}

const CredibilityScore* CredibilityTable::find(const std::string& topic_id,
                                               const std::string& doc_id) const {
    auto it = by_key_.find(pair_key(topic_id, doc_id));
    return it == by_key_.end() ? nullptr : &scores_[it->second];
}

const CredibilityScore& CredibilityTable::at(const std::string& topic_id,
                                             const std::string& doc_id) const {
    const auto* s = find(topic_id, doc_id);
    if (s == nullptr) {
        throw ValidationError("missing credibility record for (" + topic_id + ", " + doc_id + ")");
    }
    return *s;
}

std::vector<CredibilityScore> compute_credibility_serial(const CredibilityInputs& in,
                                                         Embedder& embedder,
                                                         const CredibilityConfig& config) {
    const Prepared prep = prepare(in, embedder, config);
    std::vector<CredibilityScore> out;
    for (std::size_t l = 0; l < in.first_stage.size(); ++l) {
        for (std::size_t i = 0; i < in.first_stage[l].items.size(); ++i) {
            out.push_back(score_pair(prep, in.first_stage[l], l, i, config));
        }
    }
    return out;
}

std::vector<CredibilityScore> compute_credibility(const CredibilityInputs& in, Embedder& embedder,
                                                  const CredibilityConfig& config) {
    const Prepared prep = prepare(in, embedder, config);
    // Flatten (list, item) so the parallel loop balances across topics.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t l = 0; l < in.first_stage.size(); ++l) {
        for (std::size_t i = 0; i < in.first_stage[l].items.size(); ++i) pairs.emplace_back(l, i);
    }
    std::vector<CredibilityScore> out(pairs.size());
    const auto count = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < count; ++p) {
        const auto [l, i] = pairs[static_cast<std::size_t>(p)];
        out[static_cast<std::size_t>(p)] = score_pair(prep, in.first_stage[l], l, i, config);
    }
    return out;
}

void write_credibility(const std::vector<CredibilityScore>& scores, const std::filesystem::path& path) {
    std::ostringstream buf;
    for (const auto& s : scores) {
        json obj{{"topic_id", s.topic_id},
                 {"doc_id", s.doc_id},
                 {"cred", s.value},
                 {"evidence_ids", s.evidence_ids},
                 {"no_evidence_flag", s.no_evidence}};
        buf << obj.dump() << '\n';
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << buf.str();
}

std::vector<CredibilityScore> read_credibility(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::vector<CredibilityScore> scores;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(path.string(), line_no, "<record>", e.what());
        }
        CredibilityScore s;
        try {
            s.topic_id = obj.at("topic_id").get<std::string>();
            s.doc_id = obj.at("doc_id").get<std::string>();
            s.value = obj.at("cred").get<double>();
            s.evidence_ids = obj.value("evidence_ids", std::vector<std::string>{});
            s.no_evidence = obj.value("no_evidence_flag", false);
        } catch (const json::exception& e) {
            throw ParseError(path.string(), line_no, "<record>", e.what());
        }
        if (!std::isfinite(s.value) || s.value < -1.0 || s.value > 1.0) {
            throw ParseError(path.string(), line_no, "cred", "outside [-1,1]");
        }
        scores.push_back(std::move(s));
    }
    return scores;
}

}  // namespace mdr
