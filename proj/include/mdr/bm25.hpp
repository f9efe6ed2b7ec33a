#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mdr/corpus_io.hpp"
#include "mdr/inverted_index.hpp"
#include "mdr/ranked_list.hpp"

namespace mdr {

/// Okapi BM25 with the Robertson idf smoothed by +1 inside the logarithm,
/// idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)), which keeps every term
/// contribution non-negative.
struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    void validate() const;
};

double bm25_idf(std::size_t doc_count, std::size_t df);

/// Scores one document against the distinct query terms. Throws
/// ValidationError for an unknown ordinal or invalid parameters.
double bm25_score(const InvertedIndex& index, const std::vector<std::string>& query_tokens,
                  std::uint32_t doc_ordinal, const Bm25Params& params = {});

/// Term-at-a-time top-n retrieval. Only documents sharing at least one term
/// with the query are returned.
RankedList retrieve(const InvertedIndex& index, const Topic& topic, std::size_t n = 500,
                    const Bm25Params& params = {});

/// Retrieval for many topics. The OpenMP version distributes topics over
/// threads; the serial version is the reference it is tested against.
std::vector<RankedList> retrieve_batch(const InvertedIndex& index, const std::vector<Topic>& topics,
                                       std::size_t n = 500, const Bm25Params& params = {});
std::vector<RankedList> retrieve_batch_serial(const InvertedIndex& index,
                                              const std::vector<Topic>& topics, std::size_t n = 500,
                                              const Bm25Params& params = {});

}  // namespace mdr
