#include "ecst/metrics.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace ecst::metrics {
namespace {

using frontend::LanguageId;
using testing::parse_text;

const Node& first_def(const Node& tree)
{
    const auto defs = find_all(tree, UniversalKind::FunctionDef);
    EXPECT_FALSE(defs.empty());
    return *defs.at(0);
}

TEST(CyclomaticComplexity, AssignmentsOnlyIsOne)
{
    const auto u = parse_text("MODULE M; PROCEDURE f(); x := 1; y := x + 2; END f; END M.", LanguageId::K);
    EXPECT_EQ(cyclomatic_complexity(first_def(u.tree)), 1);
}

TEST(CyclomaticComplexity, OneLoopIsTwoInBothLanguages)
{
    const auto k = parse_text("MODULE L; PROCEDURE f(); REPEAT x := 1; UNTIL (i > j); END f; END L.", LanguageId::K);
    const auto c = parse_text("class L { void f() { do { x = 1; } while (i <= j); } }", LanguageId::C);
    EXPECT_EQ(cyclomatic_complexity(first_def(k.tree)), 2);
    EXPECT_EQ(cyclomatic_complexity(first_def(c.tree)), 2);
}

TEST(CyclomaticComplexity, IfElsifElsePlusWhileIsFour)
{
    const auto u = parse_text(
        "MODULE M; PROCEDURE f(s);\n"
        "  IF s > 9 THEN r := 1; ELSIF s > 5 THEN r := 2; ELSE r := 3; END;\n"
        "  WHILE s > 0 DO s := s - 1; END;\n"
        "END f; END M.",
        LanguageId::K);
    const Node& def = first_def(u.tree);
    // Brute-force tally of condition nodes on this tree.
    std::size_t conditions = 0;
    const auto walk = [&](auto&& self, const Node& n) -> void {
        if (n.is(UniversalKind::Condition)) {
            ++conditions;
        }
        for (const Node& c : n.children()) {
            self(self, c);
        }
    };
    walk(walk, def);
    EXPECT_EQ(conditions, 3u);
    EXPECT_EQ(cyclomatic_complexity(def), 4);
}

TEST(CyclomaticComplexity, CompoundBooleansDoNotCount)
{
    const auto u = parse_text("class M { void f() { if (a > 1 && b < 2 || !c) { x = 1; } } }", LanguageId::C);
    EXPECT_EQ(cyclomatic_complexity(first_def(u.tree)), 2);
}

TEST(CyclomaticComplexity, RejectsNonFunctionNodes)
{
    const auto u = parse_text("MODULE M; END M.", LanguageId::K);
    EXPECT_THROW(cyclomatic_complexity(u.tree), ContractError);
}

TEST(StatementCount, CountsStatementNodes)
{
    const auto u = parse_text("class M { void f() { x = 1; g(); if (x > 0) return; while (x < 3) x = x + 1; } }",
                              LanguageId::C);
    // x=1, g(), if, return, while, x=x+1
    EXPECT_EQ(statement_count(first_def(u.tree)), 6);
}

TEST(Loc, EmptyText)
{
    EXPECT_EQ(loc("", LanguageId::K), (LocCounts{0, 0, 0, 0}));
}

TEST(Loc, CodeBlankComment)
{
    EXPECT_EQ(loc("x = 1;\n\n// c\n", LanguageId::C), (LocCounts{3, 1, 1, 1}));
    // No trailing newline still counts the last line.
    EXPECT_EQ(loc("x = 1;\n\n// c", LanguageId::C), (LocCounts{3, 1, 1, 1}));
}

TEST(Loc, BlockCommentAmidModule)
{
    const char* src =
        "MODULE M;\n"
        "(* first\n"
        "   second\n"
        "   third\n"
        "   fourth *)\n"
        "\n"
        "PROCEDURE f();\n"
        "  x := 1; (* trailing *)\n"
        "\n"
        "END f; END M.\n";
    const LocCounts c = loc(src, LanguageId::K);
    EXPECT_EQ(c.total, 10);
    EXPECT_EQ(c.blank, 2);
    EXPECT_EQ(c.comment, 4);
    EXPECT_EQ(c.code, 4);
}

TEST(Loc, NestedAndMixedComments)
{
    EXPECT_EQ(loc("(* a (* b *) c *)\nx := 1;\n", LanguageId::K), (LocCounts{2, 0, 1, 1}));
    EXPECT_EQ(loc("/* a */ x = 1;\n  /* b\n c */\n", LanguageId::C), (LocCounts{3, 0, 2, 1}));
    EXPECT_EQ(loc("x = 1; // (* not K *)\n", LanguageId::C), (LocCounts{1, 0, 0, 1}));
}

TEST(Loc, PartsAddUp)
{
    for (const auto& path : testing::corpus_files()) {
        const auto u = testing::parse_file(path);
        const LocCounts c = loc(u.source, u.lang);
        EXPECT_EQ(c.blank + c.comment + c.code, c.total) << path;
        EXPECT_GT(c.code, 0) << path;
    }
}

TEST(UnitReport, EmptyUnitHasNoRowsButCountsLines)
{
    std::vector<ParsedUnit> units;
    units.push_back(parse_text("MODULE M;\nEND M.\n", LanguageId::K, "m.mod"));
    const MetricsReport r = unit_report(units);
    EXPECT_TRUE(r.functions.empty());
    ASSERT_EQ(r.files.size(), 1u);
    EXPECT_EQ(r.files[0].loc, (LocCounts{2, 0, 0, 2}));
}

TEST(UnitReport, OrderFollowsFileThenSource)
{
    std::vector<ParsedUnit> units;
    units.push_back(parse_text("class B { void z() { } void a() { } }", LanguageId::C, "b.cls"));
    units.push_back(parse_text("MODULE A; PROCEDURE q(); END q; END A.", LanguageId::K, "a.mod"));
    const MetricsReport r = unit_report(units);
    ASSERT_EQ(r.functions.size(), 3u);
    EXPECT_EQ(r.functions[0].function, "q");
    EXPECT_EQ(r.functions[1].function, "z");
    EXPECT_EQ(r.functions[2].function, "a");
    EXPECT_EQ(r.files[0].path, "a.mod");
    EXPECT_EQ(r.functions[1].unit, "B");
    EXPECT_EQ(unit_report(units), r);
}

TEST(UnitReport, DuplicateFunctionNamesBothSpans)
{
    std::vector<ParsedUnit> units;
    units.push_back(parse_text("class B {\n  void f() { }\n  void f() { }\n}", LanguageId::C, "b.cls"));
    try {
        unit_report(units);
        FAIL();
    } catch (const ReportError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("b.cls:2:"), std::string::npos) << msg;
        EXPECT_NE(msg.find("b.cls:3:"), std::string::npos) << msg;
    }
}

TEST(UnitReport, FirstPairHasIdenticalCcColumn)
{
    const auto [k, c] = testing::corpus_pairs().at(0);
    const MetricsReport rk = unit_report({testing::parse_file(k)});
    const MetricsReport rc = unit_report({testing::parse_file(c)});
    ASSERT_EQ(rk.functions.size(), rc.functions.size());
    for (std::size_t i = 0; i < rk.functions.size(); ++i) {
        EXPECT_EQ(rk.functions[i].cc, rc.functions[i].cc);
    }
    EXPECT_EQ(rk.functions.at(0).cc, 2);
}

TEST(LanguageIndependence, CorpusPairsAgreePerFunction)
{
    for (const auto& [k, c] : testing::corpus_pairs()) {
        const MetricsReport rk = unit_report({testing::parse_file(k)});
        const MetricsReport rc = unit_report({testing::parse_file(c)});
        ASSERT_EQ(rk.functions.size(), rc.functions.size()) << k;
        for (std::size_t i = 0; i < rk.functions.size(); ++i) {
            EXPECT_EQ(rk.functions[i].function, rc.functions[i].function) << k;
            EXPECT_EQ(rk.functions[i].cc, rc.functions[i].cc) << k << " " << rk.functions[i].function;
        }
    }
}

TEST(Oracle, KeywordCountMatchesConditionCount)
{
    for (const auto& path : testing::corpus_files()) {
        const auto u = testing::parse_file(path);
        const auto expected = testing::keyword_cc(u.source, u.lang);
        const MetricsReport r = unit_report({u});
        ASSERT_EQ(r.functions.size(), expected.size()) << path;
        for (const auto& fm : r.functions) {
            EXPECT_EQ(fm.cc, expected.at(fm.function)) << path << " " << fm.function;
        }
    }
}

TEST(Oracle, GeneratedProgramsMatchGeneratorPredicates)
{
    for (unsigned seed = 1; seed <= 100; ++seed) {
        testing::ProgramGenerator gen(seed);
        const auto fns = gen.functions(4, 4);
        for (const auto lang : {LanguageId::K, LanguageId::C}) {
            const std::string src = lang == LanguageId::K ? testing::ProgramGenerator::render_k("G", fns)
                                                          : testing::ProgramGenerator::render_c("G", fns);
            const MetricsReport r = unit_report({parse_text(src, lang)});
            ASSERT_EQ(r.functions.size(), fns.size());
            for (std::size_t i = 0; i < fns.size(); ++i) {
                EXPECT_EQ(r.functions[i].cc, fns[i].predicates + 1) << "seed " << seed << "\n" << src;
            }
        }
    }
}

TEST(Monotonicity, OneMoreIfAddsOne)
{
    for (unsigned seed = 1; seed <= 40; ++seed) {
        testing::ProgramGenerator gen(seed);
        auto fns = gen.functions(2, 3);
        const MetricsReport before = unit_report({parse_text(testing::ProgramGenerator::render_c("G", fns),
                                                             LanguageId::C)});
        testing::GenStmt extra;
        extra.kind = testing::GenStmt::Kind::If;
        extra.conditions = {"a > 3"};
        extra.blocks = {{}};
        fns[0].body.insert(fns[0].body.begin(), extra);
        const MetricsReport after = unit_report({parse_text(testing::ProgramGenerator::render_c("G", fns),
                                                            LanguageId::C)});
        EXPECT_EQ(after.functions[0].cc, before.functions[0].cc + 1);
        EXPECT_EQ(after.functions[1].cc, before.functions[1].cc);
    }
}

}  // namespace
}  // namespace ecst::metrics
