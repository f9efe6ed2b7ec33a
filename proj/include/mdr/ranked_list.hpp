#pragma once

#include <map>
#include <string>
#include <vector>

#include "mdr/corpus_io.hpp"

namespace mdr {

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

/// Per-topic ranking: scores non-increasing, ties by doc_id ascending.
struct RankedList {
    std::string topic_id;
    std::vector<ScoredDoc> items;

    bool operator==(const RankedList&) const = default;
};

/// Descending score, then ascending doc_id. The single ordering rule used by
/// every stage.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

void sort_ranked(std::vector<ScoredDoc>& items);

/// Throws ValidationError when the list breaks the ordering rule or repeats a doc.
void validate_ranked(const RankedList& list);

/// Min-max maps scores to [0,1]; if all scores are equal they all map to 1.0.
/// Throws ValidationError on an empty list.
RankedList minmax_normalize(const RankedList& list);

/// Quantizes scores to the run-file precision, re-sorts, and assigns ranks, so
/// the returned entries survive write_run/read_run unchanged.
std::vector<RunEntry> to_run_entries(const std::vector<RankedList>& lists, const std::string& tag);

/// Groups validated run entries by topic, preserving file order of topics.
std::vector<RankedList> from_run_entries(const std::vector<RunEntry>& entries);

/// Truncates every list to its first `n` items.
std::vector<RankedList> truncate(std::vector<RankedList> lists, std::size_t n);

}  // namespace mdr
