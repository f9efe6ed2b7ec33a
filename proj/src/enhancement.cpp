#include "mdr/enhancement.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mdr/errors.hpp"

namespace mdr {
namespace {

using nlohmann::json;

struct Scaled {
    bool negative = false;
    std::string digits;  // non-negative integer, no leading zeros except "0"
};

// round_half_even(value * 10^scale) on the shortest round-trip decimal form
// of `value`.
Scaled round_scaled(double value, int scale) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
    std::string sci(buf, res.ptr);

    Scaled out;
    std::size_t pos = 0;
    if (sci[pos] == '-') {
        out.negative = true;
        ++pos;
    }
    const auto e_at = sci.find('e');
    std::string mantissa;
    for (std::size_t i = pos; i < e_at; ++i) {
        if (sci[i] != '.') mantissa.push_back(sci[i]);
    }
    const int exponent = std::stoi(sci.substr(e_at + 1));

    // value = 0.<mantissa> * 10^(exponent + 1); keep `keep` leading digits.
    const long keep = static_cast<long>(exponent) + 1 + scale;
    std::string kept;
    int first_dropped = 0;
    bool rest_nonzero = false;
    if (keep <= 0) {
        // Everything is dropped; only keep == 0 can reach half a unit.
        if (keep == 0) {
            first_dropped = mantissa[0] - '0';
            for (std::size_t i = 1; i < mantissa.size(); ++i) rest_nonzero = rest_nonzero || mantissa[i] != '0';
        }
    } else {
        const auto k = static_cast<std::size_t>(keep);
        kept = mantissa.substr(0, std::min(k, mantissa.size()));
        kept.resize(k, '0');
        if (k < mantissa.size()) {
            first_dropped = mantissa[k] - '0';
            for (std::size_t i = k + 1; i < mantissa.size(); ++i) rest_nonzero = rest_nonzero || mantissa[i] != '0';
        }
    }
    if (kept.empty()) kept = "0";

    const bool last_odd = ((kept.back() - '0') % 2) == 1;
    const bool round_up = first_dropped > 5 || (first_dropped == 5 && (rest_nonzero || last_odd));
    if (round_up) {
        std::size_t i = kept.size();
        while (i > 0) {
            --i;
            if (kept[i] == '9') {
                kept[i] = '0';
            } else {
                ++kept[i];
                break;
            }
            if (i == 0) kept.insert(kept.begin(), '1');
        }
    }
    const auto nz = kept.find_first_not_of('0');
    kept = nz == std::string::npos ? "0" : kept.substr(nz);
    if (kept == "0") out.negative = false;
    out.digits = kept;
    return out;
}

std::string format_decimal(double value, int places) {
    Scaled s = round_scaled(value, places);
    std::string digits = s.digits;
    if (digits.size() < static_cast<std::size_t>(places) + 1) {
        digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(places), 1, '.');
    return s.negative ? "-" + digits : digits;
}

int decimal_exponent(int multiplier) {
    return multiplier == 100 ? 2 : 3;
}

std::string require_value(const std::optional<std::string>& v, StatementTemplate t, const char* name) {
    if (!v) {
        throw ValidationError("template " + std::string(to_string(t)) + " requires a " + name + " value");
    }
    if (v->empty()) {
        throw ValidationError("template " + std::string(to_string(t)) + ": empty " + name + " value");
    }
    return *v;
}

json provenance_json(const EnhancementProvenance& p) {
    json obj{{"representation", to_string(p.representation)},
             {"template", std::string(to_string(p.template_id))}};
    obj["credibility"] = p.credibility ? json(*p.credibility) : json(nullptr);
    obj["topicality"] = p.topicality ? json(*p.topicality) : json(nullptr);
    return obj;
}

}  // namespace

ScoreRepresentation ScoreRepresentation::decimal(int places) {
    ScoreRepresentation r{Kind::decimal, places, 100};
    r.validate();
    return r;
}

ScoreRepresentation ScoreRepresentation::integer(int multiplier) {
    ScoreRepresentation r{Kind::integer, 4, multiplier};
    r.validate();
    return r;
}

ScoreRepresentation ScoreRepresentation::segmented() {
    return {Kind::segmented, 4, 100};
}

void ScoreRepresentation::validate() const {
    if (kind == Kind::decimal && (places < 1 || places > 4)) {
        throw ValidationError("decimal places must be in 1..4, got " + std::to_string(places));
    }
    if (kind == Kind::integer && multiplier != 100 && multiplier != 1000) {
        throw ValidationError("integer multiplier must be 100 or 1000, got " + std::to_string(multiplier));
    }
}

ScoreRepresentation parse_representation(std::string_view text) {
    auto number_after = [&](std::size_t colon) {
        const auto digits = text.substr(colon + 1);
        int v = 0;
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (ec != std::errc{} || p != digits.data() + digits.size()) {
            throw ValidationError("bad representation '" + std::string(text) + "'");
        }
        return v;
    };
    if (text == "segmented") return ScoreRepresentation::segmented();
    if (text.rfind("decimal:", 0) == 0) return ScoreRepresentation::decimal(number_after(7));
    if (text.rfind("integer:", 0) == 0) return ScoreRepresentation::integer(number_after(7));
    throw ValidationError("bad representation '" + std::string(text) +
                          "' (expected decimal:<1-4>, integer:<100|1000> or segmented)");
}

std::string to_string(const ScoreRepresentation& repr) {
    switch (repr.kind) {
        case ScoreRepresentation::Kind::decimal: return "decimal:" + std::to_string(repr.places);
        case ScoreRepresentation::Kind::integer: return "integer:" + std::to_string(repr.multiplier);
        case ScoreRepresentation::Kind::segmented: return "segmented";
    }
    return "?";
}

std::string format_score(double score, const ScoreRepresentation& repr) {
    if (!std::isfinite(score)) throw ValidationError("cannot format a non-finite score");
    repr.validate();
    switch (repr.kind) {
        case ScoreRepresentation::Kind::decimal:
            return format_decimal(score, repr.places);
        case ScoreRepresentation::Kind::integer: {
            Scaled s = round_scaled(score, decimal_exponent(repr.multiplier));
            return s.negative ? "-" + s.digits : s.digits;
        }
        case ScoreRepresentation::Kind::segmented: {
            const std::string plain = format_decimal(score, 4);
            std::string out;
            for (char c : plain) {
                if (!out.empty()) out.push_back(' ');
                out.push_back(c);
            }
            return out;
        }
    }
    return {};
}

StatementTemplate parse_template(std::string_view name) {
    if (name == "c1") return StatementTemplate::c1;
    if (name == "c2") return StatementTemplate::c2;
    if (name == "t1") return StatementTemplate::t1;
    if (name == "t2") return StatementTemplate::t2;
    if (name == "tc") return StatementTemplate::tc;
    if (name == "score_only") return StatementTemplate::score_only;
    throw ValidationError("unknown statement template '" + std::string(name) +
                          "' (expected c1|c2|t1|t2|tc|score_only)");
}

std::string_view to_string(StatementTemplate t) {
    switch (t) {
        case StatementTemplate::c1: return "c1";
        case StatementTemplate::c2: return "c2";
        case StatementTemplate::t1: return "t1";
        case StatementTemplate::t2: return "t2";
        case StatementTemplate::tc: return "tc";
        case StatementTemplate::score_only: return "score_only";
    }
    return "?";
}

bool needs_credibility(StatementTemplate t) {
    return t == StatementTemplate::c1 || t == StatementTemplate::c2 || t == StatementTemplate::tc ||
           t == StatementTemplate::score_only;
}

bool needs_topicality(StatementTemplate t) {
    return t == StatementTemplate::t1 || t == StatementTemplate::t2 || t == StatementTemplate::tc;
}

std::string render_statement(StatementTemplate t, const std::optional<std::string>& cred,
                             const std::optional<std::string>& topicality) {
    if (cred && !needs_credibility(t)) {
        throw ValidationError("template " + std::string(to_string(t)) + " takes no credibility value");
    }
    if (topicality && !needs_topicality(t)) {
        throw ValidationError("template " + std::string(to_string(t)) + " takes no topicality value");
    }
    switch (t) {
        case StatementTemplate::c1:
            return "Credibility score is " + require_value(cred, t, "credibility");
        case StatementTemplate::c2:
            return "Credibility score of the document is " + require_value(cred, t, "credibility");
        case StatementTemplate::t1:
            return "Topicality score is " + require_value(topicality, t, "topicality");
        case StatementTemplate::t2:
            return "Topicality score of the document is " + require_value(topicality, t, "topicality");
        case StatementTemplate::tc:
            return "Credibility score of the document is " + require_value(cred, t, "credibility") +
                   ". Topicality score of the document is " +
                   require_value(topicality, t, "topicality");
        case StatementTemplate::score_only:
            return require_value(cred, t, "credibility");
    }
    return {};
}

EnhancedDocument enhance(const Document& doc, const std::string& statement) {
    if (statement.empty()) throw ValidationError("cannot enhance " + doc.doc_id + " with an empty statement");
    EnhancedDocument out;
    out.doc_id = doc.doc_id;
    out.statement = statement;
    out.enhanced_text = statement + " " + doc.text;
    return out;
}

std::string strip_statement(const std::string& enhanced_text, const std::string& statement) {
    if (enhanced_text.size() < statement.size() + 1 ||
        enhanced_text.compare(0, statement.size(), statement) != 0 ||
        enhanced_text[statement.size()] != ' ') {
        throw ValidationError("text does not start with the recorded statement");
    }
    return enhanced_text.substr(statement.size() + 1);
}

std::vector<double> topic_credibility(const RankedList& list, const CredibilityTable& cred,
                                      bool normalize) {
    RankedList values{list.topic_id, {}};
    for (const auto& item : list.items) {
        values.items.push_back({item.doc_id, cred.at(list.topic_id, item.doc_id).value});
    }
    if (normalize && !values.items.empty()) values = minmax_normalize(values);
    std::vector<double> out;
    for (const auto& v : values.items) out.push_back(v.score);
    return out;
}

std::vector<EnhancedDocument> enhance_run(const std::vector<RankedList>& first_stage,
                                          const std::vector<Document>& corpus,
                                          const CredibilityTable& cred,
                                          const EnhancementConfig& config) {
    config.representation.validate();
    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& d : corpus) by_id.emplace(d.doc_id, &d);

    const bool use_cred = needs_credibility(config.template_id);
    const bool use_top = needs_topicality(config.template_id);
    std::vector<EnhancedDocument> out;
    for (const auto& list : first_stage) {
        if (list.items.empty()) continue;
        const RankedList topicality = minmax_normalize(list);
        const std::vector<double> cred_values =
            use_cred ? topic_credibility(list, cred, config.normalize_credibility) : std::vector<double>{};
        for (std::size_t i = 0; i < list.items.size(); ++i) {
            const auto& item = list.items[i];
            auto doc = by_id.find(item.doc_id);
            if (doc == by_id.end()) {
                throw ValidationError("topic " + list.topic_id + ": document '" + item.doc_id +
                                      "' missing from the corpus");
            }
            std::optional<double> c, y;
            std::optional<std::string> cs, ys;
            if (use_cred) {
                c = cred_values[i];
                cs = format_score(*c, config.representation);
            }
            if (use_top) {
                y = topicality.items[i].score;
                ys = format_score(*y, config.representation);
            }
            EnhancedDocument e = enhance(*doc->second, render_statement(config.template_id, cs, ys));
            e.topic_id = list.topic_id;
            e.provenance = {config.representation, config.template_id, c, y};
            out.push_back(std::move(e));
        }
    }
    return out;
}

void write_enhanced(const std::vector<EnhancedDocument>& docs, const std::filesystem::path& path) {
    std::ostringstream buf;
    for (const auto& d : docs) {
        json obj{{"topic_id", d.topic_id},
                 {"doc_id", d.doc_id},
                 {"statement", d.statement},
                 {"enhanced_text", d.enhanced_text},
                 {"provenance", provenance_json(d.provenance)}};
        buf << obj.dump() << '\n';
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << buf.str();
}

std::vector<EnhancedDocument> read_enhanced(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::vector<EnhancedDocument> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto obj = json::parse(line);
            EnhancedDocument d;
            d.topic_id = obj.at("topic_id").get<std::string>();
            d.doc_id = obj.at("doc_id").get<std::string>();
            d.statement = obj.at("statement").get<std::string>();
            d.enhanced_text = obj.at("enhanced_text").get<std::string>();
            const auto& p = obj.at("provenance");
            d.provenance.representation = parse_representation(p.at("representation").get<std::string>());
            d.provenance.template_id = parse_template(p.at("template").get<std::string>());
            if (!p.at("credibility").is_null()) d.provenance.credibility = p.at("credibility").get<double>();
            if (!p.at("topicality").is_null()) d.provenance.topicality = p.at("topicality").get<double>();
            docs.push_back(std::move(d));
        } catch (const json::exception& e) {
            throw ParseError(path.string(), line_no, "<record>", e.what());
        }
    }
    return docs;
}

}  // namespace mdr
