#include "mdr/fusion.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "mdr/enhancement.hpp"
#include "mdr/errors.hpp"

namespace mdr {

void FusionConfig::validate() const {
    auto in_unit = [](double w) { return std::isfinite(w) && w >= 0.0 && w <= 1.0; };
    if (!in_unit(w_topicality) || !in_unit(w_credibility)) {
        throw ValidationError("fusion weights must lie in [0,1]");
    }
    if (std::abs(w_topicality + w_credibility - 1.0) > 1e-9) {
        throw ValidationError("fusion weights must sum to 1, got " +
                              std::to_string(w_topicality + w_credibility));
    }
}

RankedList wam(const RankedList& topicality, const CredibilityTable& cred, const FusionConfig& config) {
    config.validate();
    RankedList out{topicality.topic_id, {}};
    if (topicality.items.empty()) return out;
    for (const auto& item : topicality.items) {
        if (!(item.score >= 0.0 && item.score <= 1.0)) {
            throw ValidationError("topic " + topicality.topic_id +
                                  ": topicality must be normalized to [0,1] before fusion");
        }
    }
    const auto c = topic_credibility(topicality, cred, /*normalize=*/true);
    out.items.reserve(topicality.items.size());
    for (std::size_t i = 0; i < topicality.items.size(); ++i) {
        const double fused =
            config.w_topicality * topicality.items[i].score + config.w_credibility * c[i];
        out.items.push_back({topicality.items[i].doc_id, fused});
    }
    sort_ranked(out.items);
    return out;
}

std::vector<RankedList> wam_run(const std::vector<RankedList>& first_stage,
                                const CredibilityTable& cred, const FusionConfig& config) {
    config.validate();
    std::vector<RankedList> out(first_stage.size());
    const auto count = static_cast<std::int64_t>(first_stage.size());
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) {
        const auto& list = first_stage[static_cast<std::size_t>(i)];
        try {
            out[static_cast<std::size_t>(i)] =
                list.items.empty() ? RankedList{list.topic_id, {}}
                                   : wam(minmax_normalize(list), cred, config);
        } catch (...) {
#pragma omp critical(mdr_wam_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace mdr
