#include "mdr/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <omp.h>

#include "mdr/errors.hpp"

namespace mdr {
namespace {

std::vector<std::string> distinct_terms(const std::vector<std::string>& tokens) {
    std::set<std::string> uniq(tokens.begin(), tokens.end());
    return {uniq.begin(), uniq.end()};
}

double term_weight(double idf, std::uint32_t tf, std::uint32_t doc_len, double avgdl,
                   const Bm25Params& p) {
    const double f = static_cast<double>(tf);
    const double norm = 1.0 - p.b + p.b * static_cast<double>(doc_len) / avgdl;
    return idf * f * (p.k1 + 1.0) / (f + p.k1 * norm);
}

// Accumulates scores into `acc` (sized to the doc count) and returns the
// ordinals that were touched.
RankedList retrieve_with(const InvertedIndex& index, const Topic& topic, std::size_t n,
                         const Bm25Params& params, std::vector<double>& acc,
                         std::vector<std::uint32_t>& touched) {
    const auto terms = distinct_terms(index.tokenizer()(topic.text));
    const double avgdl = index.avg_doc_length();
    touched.clear();
    for (const auto& term : terms) {
        const auto& list = index.postings(term);
        if (list.empty()) continue;
        const double idf = bm25_idf(index.doc_count(), list.size());
        for (const auto& p : list) {
            if (acc[p.doc] == 0.0) touched.push_back(p.doc);
            acc[p.doc] += term_weight(idf, p.tf, index.doc_lengths()[p.doc], avgdl, params);
        }
    }

    std::vector<ScoredDoc> items;
    items.reserve(touched.size());
    for (auto ord : touched) {
        items.push_back({index.doc_ids()[ord], acc[ord]});
        acc[ord] = 0.0;
    }
    const std::size_t keep = std::min(n, items.size());
    std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(keep), items.end(),
                      ranks_before);
    items.resize(keep);
    return {topic.topic_id, std::move(items)};
}

}  // namespace

void Bm25Params::validate() const {
    if (!(k1 > 0.0) || !std::isfinite(k1)) {
        throw ValidationError("BM25 k1 must be > 0, got " + std::to_string(k1));
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw ValidationError("BM25 b must lie in [0,1], got " + std::to_string(b));
    }
}

double bm25_idf(std::size_t doc_count, std::size_t df) {
    const double N = static_cast<double>(doc_count);
    const double d = static_cast<double>(df);
    return std::log(1.0 + (N - d + 0.5) / (d + 0.5));
}

double bm25_score(const InvertedIndex& index, const std::vector<std::string>& query_tokens,
                  std::uint32_t doc_ordinal, const Bm25Params& params) {
    params.validate();
    const std::uint32_t doc_len = index.doc_length(doc_ordinal);
    double score = 0.0;
    for (const auto& term : distinct_terms(query_tokens)) {
        const auto& list = index.postings(term);
        auto it = std::lower_bound(list.begin(), list.end(), doc_ordinal,
                                   [](const Posting& p, std::uint32_t d) { return p.doc < d; });
        if (it == list.end() || it->doc != doc_ordinal) continue;
        score += term_weight(bm25_idf(index.doc_count(), list.size()), it->tf, doc_len,
                             index.avg_doc_length(), params);
    }
    return score;
}

RankedList retrieve(const InvertedIndex& index, const Topic& topic, std::size_t n,
                    const Bm25Params& params) {
    params.validate();
    if (n == 0) throw ValidationError("retrieval depth must be >= 1");
    std::vector<double> acc(index.doc_count(), 0.0);
    std::vector<std::uint32_t> touched;
    return retrieve_with(index, topic, n, params, acc, touched);
}

std::vector<RankedList> retrieve_batch_serial(const InvertedIndex& index,
                                              const std::vector<Topic>& topics, std::size_t n,
                                              const Bm25Params& params) {
    params.validate();
    if (n == 0) throw ValidationError("retrieval depth must be >= 1");
    std::vector<RankedList> out;
    out.reserve(topics.size());
    std::vector<double> acc(index.doc_count(), 0.0);
    std::vector<std::uint32_t> touched;
    for (const auto& topic : topics) out.push_back(retrieve_with(index, topic, n, params, acc, touched));
    return out;
}

std::vector<RankedList> retrieve_batch(const InvertedIndex& index, const std::vector<Topic>& topics,
                                       std::size_t n, const Bm25Params& params) {
    params.validate();
    if (n == 0) throw ValidationError("retrieval depth must be >= 1");
    std::vector<RankedList> out(topics.size());
    const auto count = static_cast<std::int64_t>(topics.size());
#pragma omp parallel
    {
        std::vector<double> acc(index.doc_count(), 0.0);
        std::vector<std::uint32_t> touched;
#pragma omp for schedule(dynamic)
        for (std::int64_t i = 0; i < count; ++i) {
            out[static_cast<std::size_t>(i)] =
                retrieve_with(index, topics[static_cast<std::size_t>(i)], n, params, acc, touched);
        }
    }
    return out;
}

}  // namespace mdr
