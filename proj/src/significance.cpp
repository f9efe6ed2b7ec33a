#include "mdr/significance.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "mdr/errors.hpp"

namespace mdr {

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("paired t-test needs equal sample sizes (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    }
    const std::size_t n = a.size();
    if (n < 2) throw ValidationError("paired t-test needs at least two pairs");

    std::vector<double> d(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a[i] - b[i];
        mean += d[i];
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    bool all_equal = true;
    for (std::size_t i = 0; i < n; ++i) {
        ss += (d[i] - mean) * (d[i] - mean);
        all_equal = all_equal && d[i] == d[0];
    }

    TTestResult r;
    r.dof = n - 1;
    if (all_equal) {
        if (d[0] == 0.0) return r;  // no difference at all
        r.degenerate = true;
        r.t = std::copysign(std::numeric_limits<double>::infinity(), d[0]);
        r.p = 0.0;
        return r;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    boost::math::students_t dist(static_cast<double>(r.dof));
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    r.p = std::min(1.0, r.p);
    return r;
}

double bonferroni(double p_raw, std::size_t n_comparisons) {
    if (n_comparisons == 0) throw ValidationError("Bonferroni needs at least one comparison");
    if (!(p_raw >= 0.0 && p_raw <= 1.0)) throw ValidationError("p-value outside [0,1]");
    return std::min(1.0, p_raw * static_cast<double>(n_comparisons));
}

std::vector<SignificanceResult> compare_runs(const std::vector<EvalReport>& reports,
                                             const std::vector<Metric>& metrics, double alpha) {
    if (reports.size() < 2) throw ValidationError("comparison needs at least two runs");
    if (metrics.empty()) throw ValidationError("comparison needs at least one metric");
    for (const auto& r : reports) {
        if (r.per_topic.size() != reports.front().per_topic.size()) {
            throw ValidationError("runs were evaluated on different topic sets");
        }
        for (std::size_t i = 0; i < r.per_topic.size(); ++i) {
            if (r.per_topic[i].topic_id != reports.front().per_topic[i].topic_id) {
                throw ValidationError("runs were evaluated on different topic sets");
            }
        }
    }
    const std::size_t pairs = reports.size() * (reports.size() - 1) / 2;
    const std::size_t family = pairs * metrics.size();

    std::vector<SignificanceResult> out;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        for (std::size_t j = i + 1; j < reports.size(); ++j) {
            for (auto m : metrics) {
                SignificanceResult s;
                s.system_a = reports[i].run_tag;
                s.system_b = reports[j].run_tag;
                s.metric = m;
                s.mean_a = reports[i].mean.get(m);
                s.mean_b = reports[j].mean.get(m);
                const auto a = reports[i].values(m);
                const auto b = reports[j].values(m);
                s.test = paired_ttest(a, b);
                s.n_comparisons = family;
                s.p_corrected = bonferroni(s.test.p, family);
                s.significant = s.p_corrected < alpha;
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

nlohmann::json significance_to_json(const std::vector<SignificanceResult>& results) {
    using nlohmann::json;
    json rows = json::array();
    for (const auto& s : results) {
        rows.push_back({{"system_a", s.system_a},
                        {"system_b", s.system_b},
                        {"metric", std::string(to_string(s.metric))},
                        {"mean_a", s.mean_a},
                        {"mean_b", s.mean_b},
                        {"t_statistic", std::isfinite(s.test.t) ? json(s.test.t) : json(nullptr)},
                        {"degenerate", s.test.degenerate},
                        {"dof", s.test.dof},
                        {"p_raw", s.test.p},
                        {"p_corrected", s.p_corrected},
                        {"n_comparisons", s.n_comparisons},
                        {"significant_at_0.05", s.significant}});
    }
    return json{{"correction", "bonferroni"}, {"comparisons", rows}};
}

}  // namespace mdr
