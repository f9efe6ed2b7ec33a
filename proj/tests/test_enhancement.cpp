#include <doctest.h>

#include "mdr/enhancement.hpp"
#include "mdr/errors.hpp"
#include "support/oracles.hpp"

using namespace mdr;

TEST_CASE("format examples") {
    CHECK(format_score(0.28456, ScoreRepresentation::decimal(4)) == "0.2846");
    CHECK(format_score(0.2845, ScoreRepresentation::integer(1000)) == "284");
    CHECK(format_score(0.2845, ScoreRepresentation::integer(100)) == "28");
    CHECK(format_score(0.2845, ScoreRepresentation::segmented()) == "0 . 2 8 4 5");
    CHECK(format_score(0.5, ScoreRepresentation::decimal(4)) == "0.5000");
    CHECK(format_score(-0.0, ScoreRepresentation::decimal(2)) == "0.00");
    CHECK(format_score(1e-300, ScoreRepresentation::decimal(4)) == "0.0000");
    CHECK(format_score(12.5, ScoreRepresentation::decimal(1)) == "12.5");
    CHECK_THROWS_AS(format_score(std::nan(""), ScoreRepresentation::decimal(4)), ValidationError);
    CHECK_THROWS_AS(format_score(INFINITY, ScoreRepresentation::integer(100)), ValidationError);
}

TEST_CASE("format golden table") {
    std::ifstream in(testutil::data_dir() / "format_golden.tsv");
    REQUIRE(in);
    const ScoreRepresentation reprs[] = {ScoreRepresentation::decimal(1), ScoreRepresentation::decimal(2),
                                         ScoreRepresentation::decimal(3), ScoreRepresentation::decimal(4),
                                         ScoreRepresentation::integer(100), ScoreRepresentation::integer(1000),
                                         ScoreRepresentation::segmented()};
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, '\t');) cols.push_back(c);
        REQUIRE(cols.size() == 8);
        const double x = std::stod(cols[0]);
        for (int i = 0; i < 7; ++i) CHECK_MESSAGE(format_score(x, reprs[i]) == cols[i + 1], cols[0]);
        ++rows;
    }
    CHECK(rows == 50);
}

TEST_CASE("representation parsing") {
    CHECK(parse_representation("decimal:3") == ScoreRepresentation::decimal(3));
    CHECK(parse_representation("integer:1000") == ScoreRepresentation::integer(1000));
    CHECK(parse_representation("segmented") == ScoreRepresentation::segmented());
    for (auto bad : {"decimal:5", "decimal:0", "integer:10", "decimal:", "float", "decimal:2x"}) {
        CHECK_THROWS_AS(parse_representation(bad), ValidationError);
    }
    CHECK(to_string(ScoreRepresentation::integer(100)) == "integer:100");
}

TEST_CASE("statement templates") {
    CHECK(render_statement(StatementTemplate::c1, "0.2845", std::nullopt) == "Credibility score is 0.2845");
    CHECK(render_statement(StatementTemplate::c2, "0.2845", std::nullopt) ==
          "Credibility score of the document is 0.2845");
    CHECK(render_statement(StatementTemplate::t1, std::nullopt, "0.7310") == "Topicality score is 0.7310");
    CHECK(render_statement(StatementTemplate::t2, std::nullopt, "0.7310") ==
          "Topicality score of the document is 0.7310");
    CHECK(render_statement(StatementTemplate::tc, "0.2845", "0.7310") ==
          "Credibility score of the document is 0.2845. Topicality score of the document is 0.7310");
    CHECK(render_statement(StatementTemplate::score_only, "0.2845", std::nullopt) == "0.2845");

    CHECK_THROWS_AS(render_statement(StatementTemplate::c2, std::nullopt, std::nullopt), ValidationError);
    CHECK_THROWS_AS(render_statement(StatementTemplate::c2, "0.1", "0.2"), ValidationError);
    CHECK_THROWS_AS(render_statement(StatementTemplate::t1, "0.1", "0.2"), ValidationError);
    CHECK_THROWS_AS(render_statement(StatementTemplate::tc, "0.1", std::nullopt), ValidationError);
    CHECK_THROWS_AS(parse_template("c3"), ValidationError);
}

TEST_CASE("enhance and strip") {
    Document d{"d1", "Flu shots reduce risk.", std::nullopt};
    auto e = enhance(d, "Credibility score of the document is 0.2845");
    CHECK(e.enhanced_text == "Credibility score of the document is 0.2845 Flu shots reduce risk.");
    CHECK(strip_statement(e.enhanced_text, e.statement) == d.text);
    CHECK_THROWS_AS(enhance(d, ""), ValidationError);
    CHECK_THROWS_AS(strip_statement("other text", e.statement), ValidationError);
}

TEST_CASE("enhance_run uses raw or normalized credibility and min-max topicality") {
    std::vector<Document> corpus{{"a", "alpha", std::nullopt}, {"b", "beta", std::nullopt}, {"c", "gamma", std::nullopt}};
    std::vector<RankedList> run{{"1", {{"a", 4.0}, {"b", 3.0}, {"c", 2.0}}}};
    CredibilityTable cred({{"1", "a", 0.2, {"e"}, false}, {"1", "b", 0.6, {"e"}, false}, {"1", "c", 0.4, {"e"}, false}});

    EnhancementConfig cfg;
    auto raw = enhance_run(run, corpus, cred, cfg);
    REQUIRE(raw.size() == 3);
    CHECK(raw[0].statement == "Credibility score of the document is 0.2000");
    CHECK(raw[0].topic_id == "1");
    CHECK(raw[0].provenance.credibility == std::optional<double>(0.2));
    CHECK_FALSE(raw[0].provenance.topicality.has_value());

    cfg.normalize_credibility = true;
    cfg.template_id = StatementTemplate::tc;
    auto norm = enhance_run(run, corpus, cred, cfg);
    CHECK(norm[0].statement ==
          "Credibility score of the document is 0.0000. Topicality score of the document is 1.0000");
    CHECK(norm[1].statement ==
          "Credibility score of the document is 1.0000. Topicality score of the document is 0.5000");

    cfg.template_id = StatementTemplate::t2;
    auto top_only = enhance_run(run, corpus, CredibilityTable{}, cfg);
    CHECK(top_only[2].statement == "Topicality score of the document is 0.0000");

    auto dir = testutil::scratch("enhanced_rt");
    write_enhanced(norm, dir / "e.jsonl");
    CHECK(read_enhanced(dir / "e.jsonl") == norm);

    std::vector<RankedList> missing{{"1", {{"zzz", 1.0}}}};
    CHECK_THROWS_AS(enhance_run(missing, corpus, cred, EnhancementConfig{}), ValidationError);
}
