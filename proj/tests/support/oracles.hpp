#pragma once
// Independent reference implementations used by the tests. Written the slow,
// obvious way on purpose; nothing here calls into the library's kernels.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace oracle {

namespace fs = std::filesystem;

// ----- metrics -----

inline double ndcg(const std::vector<std::string>& ranking, const std::set<std::string>& rel, std::size_t k) {
    std::vector<double> gains;
    for (std::size_t i = 0; i < ranking.size() && i < k; ++i) gains.push_back(rel.count(ranking[i]) ? 1.0 : 0.0);
    double dcg = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) dcg += gains[i] / (std::log(i + 2.0) / std::log(2.0));
    std::vector<double> ideal(rel.size(), 1.0);
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal.size() && i < k; ++i) idcg += 1.0 / (std::log(i + 2.0) / std::log(2.0));
    return idcg == 0.0 ? 0.0 : dcg / idcg;
}

inline double precision(const std::vector<std::string>& ranking, const std::set<std::string>& rel, std::size_t k) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k && i < ranking.size(); ++i) hits += rel.count(ranking[i]);
    return static_cast<double>(hits) / static_cast<double>(k);
}

inline double mrr(const std::vector<std::string>& ranking, const std::set<std::string>& rel, std::size_t k) {
    std::size_t best = 0;
    for (const auto& d : rel) {
        auto it = std::find(ranking.begin(), ranking.end(), d);
        if (it == ranking.end()) continue;
        const std::size_t pos = static_cast<std::size_t>(it - ranking.begin()) + 1;
        if (best == 0 || pos < best) best = pos;
    }
    return best == 0 || best > k ? 0.0 : 1.0 / static_cast<double>(best);
}

inline double ap(const std::vector<std::string>& ranking, const std::set<std::string>& rel) {
    if (rel.empty()) return 0.0;
    std::vector<std::size_t> positions;
    for (const auto& d : rel) {
        auto it = std::find(ranking.begin(), ranking.end(), d);
        if (it != ranking.end()) positions.push_back(static_cast<std::size_t>(it - ranking.begin()) + 1);
    }
    std::sort(positions.begin(), positions.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < positions.size(); ++j) sum += static_cast<double>(j + 1) / positions[j];
    return sum / static_cast<double>(rel.size());
}

// ----- BM25 over raw token lists -----

inline double bm25(const std::vector<std::vector<std::string>>& docs, const std::vector<std::string>& query,
                   std::size_t doc, double k1 = 1.2, double b = 0.75) {
    const double n = static_cast<double>(docs.size());
    double total = 0.0;
    for (const auto& d : docs) total += static_cast<double>(d.size());
    const double avgdl = total / n;
    std::set<std::string> terms(query.begin(), query.end());
    double score = 0.0;
    for (const auto& t : terms) {
        double df = 0.0;
        for (const auto& d : docs) df += std::count(d.begin(), d.end(), t) > 0 ? 1.0 : 0.0;
        const double tf = static_cast<double>(std::count(docs[doc].begin(), docs[doc].end(), t));
        if (tf == 0.0) continue;
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        const double dl = static_cast<double>(docs[doc].size());
        score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
    }
    return score;
}

// ----- credibility -----

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double weighted_sum(const std::vector<double>& w, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * c[i];
    return s;
}

// ----- Student t -----

inline double t_pdf(double x, double nu) {
    const double logc = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * M_PI);
    return std::exp(logc - (nu + 1.0) / 2.0 * std::log1p(x * x / nu));
}

// Two-sided p-value by composite Simpson integration of the density over
// [0, |t|].
inline double t_two_sided_p(double t, double nu, int intervals = 200000) {
    const double x = std::abs(t);
    if (x == 0.0) return 1.0;
    const double h = x / intervals;
    double s = t_pdf(0.0, nu) + t_pdf(x, nu);
    for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * t_pdf(i * h, nu);
    const double mass = s * h / 3.0;
    return std::max(0.0, 1.0 - 2.0 * mass);
}

inline double paired_t(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return mean / (sd / std::sqrt(static_cast<double>(n)));
}

}  // namespace oracle

namespace testutil {

namespace fs = std::filesystem;

inline fs::path data_dir() { return MDR_DATA_DIR; }

inline fs::path scratch(const std::string& name) {
    fs::path p = fs::path(MDR_SCRATCH) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << s;
}

// Runs the CLI with `args` (already shell-quoted where needed); returns the
// exit status. Output goes to `log` when given.
inline int cli(const std::string& args, const fs::path& log = {}, const std::string& env = {}) {
    std::string cmd = env.empty() ? "" : env + " ";
    cmd += std::string("\"") + MDR_CLI + "\" " + args;
    cmd += log.empty() ? " >/dev/null 2>&1" : " >\"" + log.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Writes the pipeline config for the bundled fixture with output under `out`.
inline fs::path fixture_config(const fs::path& dir, const fs::path& out, const std::string& variant = "rel_stat",
                               const std::string& extra = "") {
    const fs::path fx = data_dir() / "fixture";
    std::ostringstream j;
    j << "{\n"
      << "  \"corpus\": \"" << (fx / "corpus.jsonl").string() << "\",\n"
      << "  \"evidence\": \"" << (fx / "evidence.jsonl").string() << "\",\n"
      << "  \"topics\": \"" << (fx / "topics.jsonl").string() << "\",\n"
      << "  \"qrels\": \"" << (fx / "qrels.txt").string() << "\",\n"
      << "  \"output_dir\": \"" << out.string() << "\",\n"
      << "  \"rerank\": {\"variant\": \"" << variant << "\", \"tag\": \"" << variant << "\", \"scorer\": \"stub:42\"}"
      << extra << "\n}\n";
    const fs::path p = dir / ("config_" + variant + ".json");
    spit(p, j.str());
    return p;
}

}  // namespace testutil
