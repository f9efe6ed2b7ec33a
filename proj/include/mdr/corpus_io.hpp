#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mdr {

struct Document {
    std::string doc_id;
    std::string text;
    std::optional<std::string> title;

    bool operator==(const Document&) const = default;
};

/// Evidence articles share the document record layout.
using EvidenceArticle = Document;

struct Topic {
    std::string topic_id;
    std::string text;

    bool operator==(const Topic&) const = default;
};

struct QrelEntry {
    std::string topic_id;
    std::string doc_id;
    int label = 0;

    bool operator==(const QrelEntry&) const = default;
};

struct RunEntry {
    std::string topic_id;
    std::string doc_id;
    int rank = 0;
    double score = 0.0;
    std::string tag;

    bool operator==(const RunEntry&) const = default;
};

enum class QrelsMode {
    strict,      // labels outside {0,1} are rejected
    permissive,  // any label >= 1 maps to 1, negatives map to 0
};

/// One JSON object per line with `doc_id` and `text` (and optional `title`).
/// Blank lines are skipped. Duplicate ids are rejected.
std::vector<Document> load_corpus(const std::filesystem::path& path);

/// Same layout as the corpus; `article_id` is accepted in place of `doc_id`.
std::vector<EvidenceArticle> load_evidence(const std::filesystem::path& path);

/// One JSON object per line with `topic_id` and `text`.
std::vector<Topic> load_topics(const std::filesystem::path& path);

/// `topic_id 0 doc_id label`, whitespace separated.
std::vector<QrelEntry> load_qrels(const std::filesystem::path& path,
                                  QrelsMode mode = QrelsMode::strict);

/// Checks the run invariants: per topic, ranks 1..n without gaps, scores
/// non-increasing (ties by doc_id ascending), doc ids unique. Entries of one
/// topic must be contiguous. Throws ValidationError.
void validate_run(const std::vector<RunEntry>& entries);

/// Writes `topic Q0 doc rank score tag` with the score at 6 decimals.
/// Validation happens before the file is touched.
void write_run(const std::vector<RunEntry>& entries, const std::filesystem::path& path);
std::vector<RunEntry> read_run(const std::filesystem::path& path);

/// Formats a score exactly as it appears in run files.
std::string format_run_score(double score);

/// Rounds a score to the value a write/read cycle through a run file yields.
double quantize_run_score(double score);

/// Writes documents back out in the corpus layout.
void write_corpus(const std::vector<Document>& docs, const std::filesystem::path& path);
void write_topics(const std::vector<Topic>& topics, const std::filesystem::path& path);
void write_qrels(const std::vector<QrelEntry>& qrels, const std::filesystem::path& path);

}  // namespace mdr
