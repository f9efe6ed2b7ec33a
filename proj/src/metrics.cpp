#include "mdr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "mdr/errors.hpp"

namespace mdr {
namespace {

struct TopicTask {
    std::string topic_id;
    const std::set<std::string>* relevant;
    std::vector<std::string> ranking;
};

TopicMetrics score_topic(const TopicTask& task) {
    return {task.topic_id, ndcg_at_k(task.ranking, *task.relevant, 10),
            precision_at_k(task.ranking, *task.relevant, 10), mrr_at_k(task.ranking, *task.relevant, 10),
            average_precision(task.ranking, *task.relevant)};
}

// Splits the work into per-topic tasks and fills the bookkeeping lists.
std::vector<TopicTask> plan(const std::vector<RunEntry>& run, const Qrels& qrels, EvalReport& report) {
    std::map<std::string, std::vector<std::pair<int, std::string>>> by_topic;
    for (const auto& e : run) by_topic[e.topic_id].emplace_back(e.rank, e.doc_id);
    if (!run.empty()) report.run_tag = run.front().tag;

    bool shared = false;
    for (const auto& [topic, _] : by_topic) {
        if (qrels.has_topic(topic)) {
            shared = true;
        } else {
            report.unjudged.push_back(topic);
        }
    }
    if (!shared) throw ValidationError("run and qrels share no topic");

    std::vector<TopicTask> tasks;
    for (const auto& topic : qrels.topics()) {
        const auto& rel = qrels.relevant(topic);
        if (rel.empty()) {
            report.no_relevant.push_back(topic);
            continue;
        }
        TopicTask task{topic, &rel, {}};
        auto it = by_topic.find(topic);
        if (it == by_topic.end()) {
            report.missing_from_run.push_back(topic);
        } else {
            auto entries = it->second;
            std::sort(entries.begin(), entries.end());
            for (auto& [rank, doc] : entries) task.ranking.push_back(std::move(doc));
        }
        tasks.push_back(std::move(task));
    }
    return tasks;
}

void finish(EvalReport& report) {
    TopicMetrics mean{"all"};
    const double n = static_cast<double>(report.per_topic.size());
    if (n > 0) {
        for (const auto& t : report.per_topic) {
            mean.ndcg10 += t.ndcg10;
            mean.p10 += t.p10;
            mean.mrr10 += t.mrr10;
            mean.map += t.map;
        }
        mean.ndcg10 /= n;
        mean.p10 /= n;
        mean.mrr10 /= n;
        mean.map /= n;
    }
    report.mean = mean;
}

}  // namespace

Qrels::Qrels(const std::vector<QrelEntry>& entries) {
    for (const auto& e : entries) {
        topics_.insert(e.topic_id);
        auto& rel = relevant_[e.topic_id];
        if (e.label > 0) rel.insert(e.doc_id);
    }
}

const std::set<std::string>& Qrels::relevant(const std::string& topic_id) const {
    static const std::set<std::string> none;
    auto it = relevant_.find(topic_id);
    return it == relevant_.end() ? none : it->second;
}

double ndcg_at_k(const std::vector<std::string>& ranking, const std::set<std::string>& relevant,
                 std::size_t k) {
    if (k == 0) throw ValidationError("metric cutoff must be >= 1");
    if (relevant.empty()) return 0.0;
    double dcg = 0.0;
    const std::size_t depth = std::min(k, ranking.size());
    for (std::size_t i = 0; i < depth; ++i) {
        if (relevant.count(ranking[i]) != 0) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
    double idcg = 0.0;
    const std::size_t ideal = std::min(k, relevant.size());
    for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return dcg / idcg;
}

double precision_at_k(const std::vector<std::string>& ranking, const std::set<std::string>& relevant,
                      std::size_t k) {
    if (k == 0) throw ValidationError("metric cutoff must be >= 1");
    std::size_t hits = 0;
    const std::size_t depth = std::min(k, ranking.size());
    for (std::size_t i = 0; i < depth; ++i) hits += relevant.count(ranking[i]);
    return static_cast<double>(hits) / static_cast<double>(k);
}

double mrr_at_k(const std::vector<std::string>& ranking, const std::set<std::string>& relevant,
                std::size_t k) {
    if (k == 0) throw ValidationError("metric cutoff must be >= 1");
    const std::size_t depth = std::min(k, ranking.size());
    for (std::size_t i = 0; i < depth; ++i) {
        if (relevant.count(ranking[i]) != 0) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
}

double average_precision(const std::vector<std::string>& ranking, const std::set<std::string>& relevant) {
    if (relevant.empty()) return 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (relevant.count(ranking[i]) != 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(relevant.size());
}

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::ndcg10: return "ndcg10";
        case Metric::p10: return "p10";
        case Metric::mrr10: return "mrr10";
        case Metric::map: return "map";
    }
    return "?";
}

Metric parse_metric(std::string_view name) {
    for (auto m : kAllMetrics) {
        if (to_string(m) == name) return m;
    }
    throw ValidationError("unknown metric '" + std::string(name) + "' (expected ndcg10|p10|mrr10|map)");
}

double TopicMetrics::get(Metric m) const {
    switch (m) {
        case Metric::ndcg10: return ndcg10;
        case Metric::p10: return p10;
        case Metric::mrr10: return mrr10;
        case Metric::map: return map;
    }
    return 0.0;
}

const TopicMetrics* EvalReport::topic(const std::string& topic_id) const {
    for (const auto& t : per_topic) {
        if (t.topic_id == topic_id) return &t;
    }
    return nullptr;
}

std::vector<double> EvalReport::values(Metric m) const {
    std::vector<double> out;
    out.reserve(per_topic.size());
    for (const auto& t : per_topic) out.push_back(t.get(m));
    return out;
}

EvalReport evaluate_run_serial(const std::vector<RunEntry>& run, const Qrels& qrels) {
    EvalReport report;
    const auto tasks = plan(run, qrels, report);
    for (const auto& task : tasks) report.per_topic.push_back(score_topic(task));
    finish(report);
    return report;
}

EvalReport evaluate_run(const std::vector<RunEntry>& run, const Qrels& qrels) {
    EvalReport report;
    const auto tasks = plan(run, qrels, report);
    report.per_topic.resize(tasks.size());
    const auto count = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) {
        report.per_topic[static_cast<std::size_t>(i)] = score_topic(tasks[static_cast<std::size_t>(i)]);
    }
    finish(report);
    return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
    using nlohmann::json;
    auto row = [](const TopicMetrics& t) {
        return json{{"topic_id", t.topic_id}, {"ndcg10", t.ndcg10}, {"p10", t.p10},
                    {"mrr10", t.mrr10},       {"map", t.map}};
    };
    json per_topic = json::array();
    for (const auto& t : report.per_topic) per_topic.push_back(row(t));
    json aggregate = row(report.mean);
    aggregate.erase("topic_id");
    aggregate["num_topics"] = report.per_topic.size();
    return json{{"run", report.run_tag},
                {"aggregate", aggregate},
                {"per_topic", per_topic},
                {"skipped_no_relevant", report.no_relevant},
                {"missing_from_run", report.missing_from_run},
                {"unjudged_run_topics", report.unjudged}};
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << report_to_json(report).dump(2) << '\n';
}

}  // namespace mdr
