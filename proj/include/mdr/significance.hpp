#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdr/metrics.hpp"

namespace mdr {

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    std::size_t dof = 0;
    /// Differences are nonzero but all equal: the statistic is unbounded and
    /// p is reported as 0.
    bool degenerate = false;
};

/// Two-sided paired t-test over a[i] - b[i]. Needs n >= 2 equal-length
/// samples. Identical samples give t = 0, p = 1.
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

/// min(1, p * n).
double bonferroni(double p_raw, std::size_t n_comparisons);

struct SignificanceResult {
    std::string system_a;
    std::string system_b;
    Metric metric = Metric::ndcg10;
    double mean_a = 0.0;
    double mean_b = 0.0;
    TTestResult test;
    double p_corrected = 1.0;
    std::size_t n_comparisons = 1;
    bool significant = false;  // p_corrected < alpha
};

/// Every unordered pair of reports, for each metric. The Bonferroni family is
/// (pairs x metrics). Reports must cover the same topic set.
std::vector<SignificanceResult> compare_runs(const std::vector<EvalReport>& reports,
                                             const std::vector<Metric>& metrics, double alpha = 0.05);

nlohmann::json significance_to_json(const std::vector<SignificanceResult>& results);

}  // namespace mdr
