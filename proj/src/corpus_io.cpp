#include "mdr/corpus_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mdr/errors.hpp"

namespace mdr {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n\f\v") == std::string::npos;
}

std::string string_field(const json& obj, const char* key, const std::string& path,
                         std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(path, line, key, "missing");
    }
    if (!it->is_string()) {
        throw ParseError(path, line, key, "expected a string");
    }
    return it->get<std::string>();
}

json parse_json_line(const std::string& text, const std::string& path, std::size_t line) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(path, line, "<record>", std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) {
        throw ParseError(path, line, "<record>", "expected a JSON object");
    }
    return obj;
}

std::vector<Document> load_documents(const std::filesystem::path& path, bool allow_article_id) {
    auto in = open_input(path);
    const std::string name = path.string();
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (is_blank(text)) continue;
        json obj = parse_json_line(text, name, line_no);
        Document doc;
        const char* id_key = "doc_id";
        if (allow_article_id && !obj.contains("doc_id") && obj.contains("article_id")) {
            id_key = "article_id";
        }
        doc.doc_id = string_field(obj, id_key, name, line_no);
        doc.text = string_field(obj, "text", name, line_no);
        if (obj.contains("title") && !obj["title"].is_null()) {
            doc.title = string_field(obj, "title", name, line_no);
        }
        if (doc.doc_id.empty()) {
            throw ParseError(name, line_no, id_key, "empty identifier");
        }
        if (is_blank(doc.text)) {
            throw ParseError(name, line_no, "text", "empty after trimming");
        }
        if (!seen.insert(doc.doc_id).second) {
            throw ParseError(name, line_no, id_key, "duplicate doc_id '" + doc.doc_id + "'");
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace

std::vector<Document> load_corpus(const std::filesystem::path& path) {
    return load_documents(path, false);
}

std::vector<EvidenceArticle> load_evidence(const std::filesystem::path& path) {
    return load_documents(path, true);
}

std::vector<Topic> load_topics(const std::filesystem::path& path) {
    auto in = open_input(path);
    const std::string name = path.string();
    std::vector<Topic> topics;
    std::unordered_set<std::string> seen;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (is_blank(text)) continue;
        json obj = parse_json_line(text, name, line_no);
        Topic topic{string_field(obj, "topic_id", name, line_no),
                    string_field(obj, "text", name, line_no)};
        if (topic.topic_id.empty()) throw ParseError(name, line_no, "topic_id", "empty identifier");
        if (is_blank(topic.text)) throw ParseError(name, line_no, "text", "empty query");
        if (!seen.insert(topic.topic_id).second) {
            throw ParseError(name, line_no, "topic_id", "duplicate topic_id '" + topic.topic_id + "'");
        }
        topics.push_back(std::move(topic));
    }
    return topics;
}

std::vector<QrelEntry> load_qrels(const std::filesystem::path& path, QrelsMode mode) {
    auto in = open_input(path);
    const std::string name = path.string();
    std::vector<QrelEntry> qrels;
    std::set<std::pair<std::string, std::string>> seen;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (is_blank(text)) continue;
        std::istringstream fields(text);
        std::string topic, iter, doc, label_str, extra;
        if (!(fields >> topic >> iter >> doc >> label_str)) {
            throw ParseError(name, line_no, "<line>", "expected 'topic 0 doc label'");
        }
        if (fields >> extra) {
            throw ParseError(name, line_no, "<line>", "trailing field '" + extra + "'");
        }
        int label = 0;
        auto [ptr, ec] = std::from_chars(label_str.data(), label_str.data() + label_str.size(), label);
        if (ec != std::errc{} || ptr != label_str.data() + label_str.size()) {
            throw ParseError(name, line_no, "label", "not an integer: '" + label_str + "'");
        }
        if (label != 0 && label != 1) {
            if (mode == QrelsMode::strict) {
                throw ParseError(name, line_no, "label",
                                 "non-binary label " + label_str + " (strict mode)");
            }
            label = label >= 1 ? 1 : 0;
        }
        if (!seen.emplace(topic, doc).second) {
            throw ParseError(name, line_no, "doc_id", "duplicate judgment for (" + topic + ", " + doc + ")");
        }
        qrels.push_back({std::move(topic), std::move(doc), label});
    }
    return qrels;
}

void validate_run(const std::vector<RunEntry>& entries) {
    std::unordered_set<std::string> finished_topics;
    std::unordered_set<std::string> docs_in_topic;
    const RunEntry* prev = nullptr;
    for (const auto& e : entries) {
        const std::string where = "run entry (" + e.topic_id + ", " + e.doc_id + ")";
        if (e.topic_id.empty() || e.doc_id.empty() || e.tag.empty()) {
            throw ValidationError(where + ": empty identifier or tag");
        }
        if (e.tag.find_first_of(" \t\r\n") != std::string::npos ||
            e.doc_id.find_first_of(" \t\r\n") != std::string::npos ||
            e.topic_id.find_first_of(" \t\r\n") != std::string::npos) {
            throw ValidationError(where + ": whitespace in identifier or tag");
        }
        if (!std::isfinite(e.score)) {
            throw ValidationError(where + ": non-finite score");
        }
        const bool new_topic = prev == nullptr || prev->topic_id != e.topic_id;
        if (new_topic) {
            if (prev != nullptr) finished_topics.insert(prev->topic_id);
            if (finished_topics.count(e.topic_id) != 0) {
                throw ValidationError(where + ": topic entries are not contiguous");
            }
            docs_in_topic.clear();
            if (e.rank != 1) {
                throw ValidationError(where + ": first rank of topic is " + std::to_string(e.rank) +
                                      ", expected 1");
            }
        } else {
            if (e.rank != prev->rank + 1) {
                throw ValidationError(where + ": rank gap (" + std::to_string(prev->rank) + " -> " +
                                      std::to_string(e.rank) + ")");
            }
            if (e.score > prev->score || (e.score == prev->score && e.doc_id < prev->doc_id)) {
                throw ValidationError(where + ": score inversion at rank " + std::to_string(e.rank));
            }
        }
        if (!docs_in_topic.insert(e.doc_id).second) {
            throw ValidationError(where + ": duplicate doc_id within topic");
        }
        prev = &e;
    }
}

std::string format_run_score(double score) {
    char buf[64];
    int n = std::snprintf(buf, sizeof buf, "%.6f", score);
    std::string out(buf, static_cast<std::size_t>(n));
    if (out == "-0.000000") out = "0.000000";
    return out;
}

double quantize_run_score(double score) {
    const std::string s = format_run_score(score);
    double value = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), value);
    return value;
}

void write_run(const std::vector<RunEntry>& entries, const std::filesystem::path& path) {
    validate_run(entries);
    for (const auto& e : entries) {
        if (quantize_run_score(e.score) != e.score) {
            // Allowed, but the printed value may collapse ties; revalidate on the printed form.
            std::vector<RunEntry> printed = entries;
            for (auto& p : printed) p.score = quantize_run_score(p.score);
            validate_run(printed);
            break;
        }
    }
    std::ostringstream buf;
    for (const auto& e : entries) {
        buf << e.topic_id << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << format_run_score(e.score)
            << ' ' << e.tag << '\n';
    }
    auto out = open_output(path);
    out << buf.str();
}

std::vector<RunEntry> read_run(const std::filesystem::path& path) {
    auto in = open_input(path);
    const std::string name = path.string();
    std::vector<RunEntry> entries;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (is_blank(text)) continue;
        std::istringstream fields(text);
        RunEntry e;
        std::string q0, rank_str, score_str, extra;
        if (!(fields >> e.topic_id >> q0 >> e.doc_id >> rank_str >> score_str >> e.tag)) {
            throw ParseError(name, line_no, "<line>", "expected 'topic Q0 doc rank score tag'");
        }
        if (fields >> extra) {
            throw ParseError(name, line_no, "<line>", "trailing field '" + extra + "'");
        }
        auto [rp, rec] = std::from_chars(rank_str.data(), rank_str.data() + rank_str.size(), e.rank);
        if (rec != std::errc{} || rp != rank_str.data() + rank_str.size() || e.rank < 1) {
            throw ParseError(name, line_no, "rank", "not a positive integer: '" + rank_str + "'");
        }
        auto [sp, sec] = std::from_chars(score_str.data(), score_str.data() + score_str.size(), e.score);
        if (sec != std::errc{} || sp != score_str.data() + score_str.size() || !std::isfinite(e.score)) {
            throw ParseError(name, line_no, "score", "not a finite number: '" + score_str + "'");
        }
        entries.push_back(std::move(e));
    }
    validate_run(entries);
    return entries;
}

void write_corpus(const std::vector<Document>& docs, const std::filesystem::path& path) {
    std::ostringstream buf;
    for (const auto& d : docs) {
        json obj{{"doc_id", d.doc_id}, {"text", d.text}};
        if (d.title) obj["title"] = *d.title;
        buf << obj.dump() << '\n';
    }
    auto out = open_output(path);
    out << buf.str();
}

void write_topics(const std::vector<Topic>& topics, const std::filesystem::path& path) {
    std::ostringstream buf;
    for (const auto& t : topics) {
        buf << json{{"topic_id", t.topic_id}, {"text", t.text}}.dump() << '\n';
    }
    auto out = open_output(path);
    out << buf.str();
}

void write_qrels(const std::vector<QrelEntry>& qrels, const std::filesystem::path& path) {
    std::ostringstream buf;
    for (const auto& q : qrels) {
        buf << q.topic_id << " 0 " << q.doc_id << ' ' << q.label << '\n';
    }
    auto out = open_output(path);
    out << buf.str();
}

}  // namespace mdr
