#include "mdr/ranked_list.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "mdr/errors.hpp"

namespace mdr {

void sort_ranked(std::vector<ScoredDoc>& items) {
    std::sort(items.begin(), items.end(), ranks_before);
}

void validate_ranked(const RankedList& list) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < list.items.size(); ++i) {
        const auto& item = list.items[i];
        if (!std::isfinite(item.score)) {
            throw ValidationError("topic " + list.topic_id + ": non-finite score for " + item.doc_id);
        }
        if (!seen.insert(item.doc_id).second) {
            throw ValidationError("topic " + list.topic_id + ": duplicate doc " + item.doc_id);
        }
        if (i > 0 && ranks_before(item, list.items[i - 1])) {
            throw ValidationError("topic " + list.topic_id + ": ordering violated at position " +
                                  std::to_string(i + 1));
        }
    }
}

RankedList minmax_normalize(const RankedList& list) {
    if (list.items.empty()) {
        throw ValidationError("cannot normalize the empty ranking of topic " + list.topic_id);
    }
    auto [lo_it, hi_it] = std::minmax_element(
        list.items.begin(), list.items.end(),
        [](const ScoredDoc& a, const ScoredDoc& b) { return a.score < b.score; });
    const double lo = lo_it->score;
    const double hi = hi_it->score;
    RankedList out{list.topic_id, list.items};
    for (auto& item : out.items) {
        item.score = hi == lo ? 1.0 : (item.score - lo) / (hi - lo);
    }
    return out;
}

std::vector<RunEntry> to_run_entries(const std::vector<RankedList>& lists, const std::string& tag) {
    std::vector<RunEntry> entries;
    for (const auto& list : lists) {
        std::vector<ScoredDoc> items = list.items;
        for (auto& item : items) item.score = quantize_run_score(item.score);
        sort_ranked(items);
        int rank = 0;
        for (auto& item : items) {
            entries.push_back({list.topic_id, std::move(item.doc_id), ++rank, item.score, tag});
        }
    }
    return entries;
}

std::vector<RankedList> from_run_entries(const std::vector<RunEntry>& entries) {
    std::vector<RankedList> lists;
    for (const auto& e : entries) {
        if (lists.empty() || lists.back().topic_id != e.topic_id) lists.push_back({e.topic_id, {}});
        lists.back().items.push_back({e.doc_id, e.score});
    }
    return lists;
}

std::vector<RankedList> truncate(std::vector<RankedList> lists, std::size_t n) {
    for (auto& list : lists) {
        if (list.items.size() > n) list.items.resize(n);
    }
    return lists;
}

}  // namespace mdr
