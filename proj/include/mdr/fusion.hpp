#pragma once

#include <vector>

#include "mdr/credibility.hpp"
#include "mdr/ranked_list.hpp"

namespace mdr {

/// Weighted-average aggregation of topicality and credibility.
struct FusionConfig {
    double w_topicality = 0.5;
    double w_credibility = 0.5;

    /// Both in [0,1], summing to 1 within 1e-9.
    void validate() const;
};

/// `topicality` must already be min-max normalized. Credibility is min-max
/// normalized over the list's documents, then
///   fused = w_t * topicality + w_c * credibility
/// and the list is re-sorted (ties by doc_id).
RankedList wam(const RankedList& topicality, const CredibilityTable& cred, const FusionConfig& config);

/// Normalizes each first-stage list and applies wam.
std::vector<RankedList> wam_run(const std::vector<RankedList>& first_stage,
                                const CredibilityTable& cred, const FusionConfig& config);

}  // namespace mdr
