#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdr/corpus_io.hpp"
#include "mdr/credibility.hpp"
#include "mdr/ranked_list.hpp"

namespace mdr {

/// How a relevance score is rendered as text for the cross-encoder.
struct ScoreRepresentation {
    enum class Kind { decimal, integer, segmented };

    Kind kind = Kind::decimal;
    int places = 4;        // decimal: 1..4
    int multiplier = 100;  // integer: 100 or 1000

    static ScoreRepresentation decimal(int places);
    static ScoreRepresentation integer(int multiplier);
    static ScoreRepresentation segmented();

    void validate() const;
    bool operator==(const ScoreRepresentation&) const = default;
};

/// `decimal:<1-4>`, `integer:<100|1000>`, `segmented`.
ScoreRepresentation parse_representation(std::string_view text);
std::string to_string(const ScoreRepresentation& repr);

/// Renders a score. All rounding is round-half-to-even applied to the
/// shortest decimal expansion that round-trips the double, so 0.2845 is
/// treated as exactly 0.2845. Output never depends on the C locale, and
/// negative zero prints as zero.
///   decimal(p)   "0.2846" for 0.28456 at p=4
///   integer(m)   round(score*m), e.g. "284" for 0.2845 at m=1000
///   segmented    decimal(4) with every character space separated: "0 . 2 8 4 5"
std::string format_score(double score, const ScoreRepresentation& repr);

enum class StatementTemplate { c1, c2, t1, t2, tc, score_only };

StatementTemplate parse_template(std::string_view name);
std::string_view to_string(StatementTemplate t);
bool needs_credibility(StatementTemplate t);
bool needs_topicality(StatementTemplate t);

/// Fills the template. Credibility goes into X, topicality into Y; a value
/// supplied for a placeholder the template lacks (or missing for one it has)
/// is a ValidationError. score_only takes the credibility string.
std::string render_statement(StatementTemplate t, const std::optional<std::string>& cred,
                             const std::optional<std::string>& topicality);

struct EnhancementProvenance {
    ScoreRepresentation representation;
    StatementTemplate template_id = StatementTemplate::c2;
    std::optional<double> credibility;
    std::optional<double> topicality;

    bool operator==(const EnhancementProvenance&) const = default;
};

struct EnhancedDocument {
    std::string topic_id;
    std::string doc_id;
    std::string statement;
    std::string enhanced_text;
    EnhancementProvenance provenance;

    bool operator==(const EnhancedDocument&) const = default;
};

/// Prepends the statement and a single space to the document body.
EnhancedDocument enhance(const Document& doc, const std::string& statement);

/// Inverse of enhance; throws if the text does not start with the statement.
std::string strip_statement(const std::string& enhanced_text, const std::string& statement);

struct EnhancementConfig {
    ScoreRepresentation representation = ScoreRepresentation::decimal(4);
    StatementTemplate template_id = StatementTemplate::c2;
    bool normalize_credibility = false;  // min-max per topic before formatting
};

/// Per topic, the credibility values the enhancer formats: raw, or min-max
/// normalized over the topic's documents when configured.
std::vector<double> topic_credibility(const RankedList& list, const CredibilityTable& cred,
                                      bool normalize);

/// Enhances every document of the first-stage lists. Topicality is the
/// min-max normalized first-stage score.
std::vector<EnhancedDocument> enhance_run(const std::vector<RankedList>& first_stage,
                                          const std::vector<Document>& corpus,
                                          const CredibilityTable& cred,
                                          const EnhancementConfig& config);

void write_enhanced(const std::vector<EnhancedDocument>& docs, const std::filesystem::path& path);
std::vector<EnhancedDocument> read_enhanced(const std::filesystem::path& path);

}  // namespace mdr
