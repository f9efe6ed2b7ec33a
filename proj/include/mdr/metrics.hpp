#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdr/corpus_io.hpp"

namespace mdr {

/// Binary judgments: topic -> set of relevant doc ids, plus the set of judged
/// topics. Unjudged documents count as non-relevant.
class Qrels {
public:
    Qrels() = default;
    explicit Qrels(const std::vector<QrelEntry>& entries);

    const std::set<std::string>& relevant(const std::string& topic_id) const;
    const std::set<std::string>& topics() const { return topics_; }
    bool has_topic(const std::string& topic_id) const { return topics_.count(topic_id) != 0; }

private:
    std::set<std::string> topics_;
    std::map<std::string, std::set<std::string>> relevant_;
};

/// Binary-gain NDCG with log2(rank + 1) discounts. 0 when there is no relevant
/// document for the topic.
double ndcg_at_k(const std::vector<std::string>& ranking, const std::set<std::string>& relevant,
                 std::size_t k = 10);
/// Denominator is always k.
double precision_at_k(const std::vector<std::string>& ranking, const std::set<std::string>& relevant,
                      std::size_t k = 10);
double mrr_at_k(const std::vector<std::string>& ranking, const std::set<std::string>& relevant,
                std::size_t k = 10);
/// Over the full ranking depth, divided by the total relevant count.
double average_precision(const std::vector<std::string>& ranking, const std::set<std::string>& relevant);

enum class Metric { ndcg10, p10, mrr10, map };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view name);
inline constexpr Metric kAllMetrics[] = {Metric::ndcg10, Metric::p10, Metric::mrr10, Metric::map};

struct TopicMetrics {
    std::string topic_id;
    double ndcg10 = 0.0;
    double p10 = 0.0;
    double mrr10 = 0.0;
    double map = 0.0;

    double get(Metric m) const;
    bool operator==(const TopicMetrics&) const = default;
};

struct EvalReport {
    std::string run_tag;
    /// Evaluated topics (judged, with at least one relevant doc), sorted by id.
    std::vector<TopicMetrics> per_topic;
    TopicMetrics mean;                        // topic_id "all"
    std::vector<std::string> no_relevant;     // judged topics skipped for lack of relevant docs
    std::vector<std::string> missing_from_run;  // evaluated topics the run does not cover (scored 0)
    std::vector<std::string> unjudged;        // run topics absent from qrels (ignored)

    const TopicMetrics* topic(const std::string& topic_id) const;
    /// Per-topic values in per_topic order.
    std::vector<double> values(Metric m) const;
};

/// Per-topic metrics computed in parallel across topics; the serial version
/// is the reference. Throws ValidationError when run and qrels share no topic.
EvalReport evaluate_run(const std::vector<RunEntry>& run, const Qrels& qrels);
EvalReport evaluate_run_serial(const std::vector<RunEntry>& run, const Qrels& qrels);

nlohmann::json report_to_json(const EvalReport& report);
void write_report(const EvalReport& report, const std::filesystem::path& path);

}  // namespace mdr
