#include "ecst/node.hpp"

#include "ecst/frontend.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ecst {
namespace {

using K = UniversalKind;
using frontend::LanguageId;

SourceSpan at(int line, int col) { return {"t", line, col}; }

TEST(MakeUniversal, LoopWithConditionAndBody)
{
    Node cond = make_universal(K::Condition, {make_token("c", at(1, 7))},
                               ConditionPolarity::ContinueWhenTrue);
    Node body = make_universal(K::StatementBlock, {make_token("x", at(2, 3))});
    Node loop = make_universal(K::LoopStatement, {std::move(cond), std::move(body)});
    EXPECT_TRUE(loop.is(K::LoopStatement));
    EXPECT_EQ(loop.children().size(), 2u);
    EXPECT_EQ(loop.span(), at(1, 7));
}

TEST(MakeUniversal, ConditionCarriesExitPolarity)
{
    Node cond = make_universal(K::Condition, {make_token(">", at(3, 12))}, ConditionPolarity::ExitWhenTrue);
    ASSERT_TRUE(cond.polarity().has_value());
    EXPECT_EQ(*cond.polarity(), ConditionPolarity::ExitWhenTrue);
}

TEST(MakeUniversal, PolarityOnOtherKindsIsRejected)
{
    EXPECT_THROW(make_universal(K::BranchStatement, {make_token("IF", at(1, 1))}, ConditionPolarity::ExitWhenTrue),
                 ContractError);
}

TEST(MakeUniversal, LoopConditionMustHavePolarityAndBranchConditionMustNot)
{
    EXPECT_THROW(make_universal(K::LoopStatement, {make_universal(K::Condition, {make_token("c", at(1, 1))})}),
                 ContractError);
    Node polar = make_universal(K::Condition, {make_token("c", at(1, 1))}, ConditionPolarity::ContinueWhenTrue);
    EXPECT_THROW(make_universal(K::BranchStatement, {polar}), ContractError);
}

TEST(MakeUniversal, EmptyNodeUsesFallbackSpanOrFails)
{
    Node empty = make_universal(K::StatementBlock, {}, std::nullopt, at(4, 9));
    EXPECT_EQ(empty.span(), at(4, 9));
    EXPECT_THROW(make_universal(K::StatementBlock, {}), ContractError);
    EXPECT_THROW(make_universal(K::StatementBlock, {}, std::nullopt, SourceSpan{"t", 0, 1}), ContractError);
}

TEST(MakeToken, RejectsEmptyTextAndZeroLines)
{
    EXPECT_THROW(make_token("", at(1, 1)), ContractError);
    EXPECT_THROW(make_token("x", SourceSpan{"t", 0, 1}), ContractError);
}

TEST(Vocabulary, SixteenKindsRoundTripTheirSpelling)
{
    ASSERT_EQ(all_universal_kinds().size(), 16u);
    for (UniversalKind kind : all_universal_kinds()) {
        EXPECT_EQ(parse_universal_kind(to_string(kind)), kind);
    }
    EXPECT_FALSE(parse_universal_kind("WHILE_LOOP").has_value());
}

TEST(CountKind, SingleTokenHasNoUniversalNodes)
{
    EXPECT_EQ(count_kind(make_token("x", at(1, 1)), K::LoopStatement), 0u);
}

TEST(CountKind, DoWhileSnippetHasOneLoop)
{
    const Node tree = frontend::parse("class L { void f() { do { } while (i <= j); } }", LanguageId::C);
    EXPECT_EQ(count_kind(tree, K::LoopStatement), 1u);
}

TEST(CountKind, NestedLoopInLoopFixture)
{
    // Hand walk: the outer WHILE and the inner REPEAT are the only loops.
    const char* src =
        "MODULE N;\n"
        "PROCEDURE f(n);\n"
        "  WHILE n > 0 DO\n"
        "    REPEAT n := n - 1; UNTIL n < 5;\n"
        "  END;\n"
        "END f; END N.\n";
    const Node tree = frontend::parse(src, LanguageId::K);
    EXPECT_EQ(count_kind(tree, K::LoopStatement), 2u);
}

TEST(FindAll, RootMatchesItself)
{
    const Node tree = frontend::parse("MODULE M; END M.", LanguageId::K);
    const auto found = find_all(tree, K::CompilationUnit);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0], &tree);
}

TEST(FindAll, FunctionsInSourceOrder)
{
    const Node tree = frontend::parse(
        "MODULE M; PROCEDURE f(); END f; PROCEDURE g(); END g; END M.", LanguageId::K);
    const auto defs = find_all(tree, K::FunctionDef);
    ASSERT_EQ(defs.size(), 2u);
    EXPECT_EQ(token_text(*defs[0]).substr(0, 11), "PROCEDURE f");
    EXPECT_EQ(token_text(*defs[1]).substr(0, 11), "PROCEDURE g");
}

TEST(FindAll, AbsentKindGivesEmptySequence)
{
    const Node tree = frontend::parse("MODULE M; END M.", LanguageId::K);
    EXPECT_TRUE(find_all(tree, K::LoopStatement).empty());
}

TEST(Skeleton, RepeatUntilAndDoWhileProjectIdentically)
{
    const Node k = frontend::parse(
        "MODULE L; PROCEDURE f(); REPEAT x := 1; UNTIL (i > j); END f; END L.", LanguageId::K);
    const Node c = frontend::parse("class L { void f() { do { x = 1; } while (i <= j); } }", LanguageId::C);
    const Node sk = *skeleton(k);
    EXPECT_TRUE(same_shape(sk, *skeleton(c)));
    const auto loops = find_all(sk, K::LoopStatement);
    ASSERT_EQ(loops.size(), 1u);
    EXPECT_EQ(shape_string(*loops[0]), "LOOP_STATEMENT(STATEMENT_BLOCK(ASSIGN_STATEMENT(EXPRESSION)),CONDITION(EXPRESSION))");
}

TEST(Skeleton, TokenProjectsToNothing)
{
    EXPECT_FALSE(skeleton(make_token("x", at(1, 1))).has_value());
    const Node expr = make_universal(K::Expression, {make_token("x", at(1, 1)), make_token("+", at(1, 3))});
    EXPECT_TRUE(skeleton(expr)->children().empty());
}

TEST(Skeleton, IsIdempotentAndStripsTokens)
{
    const Node tree = testing::parse_file(testing::corpus_dir() / "pairs" / "03_matrix.mod").tree;
    const Node once = *skeleton(tree);
    EXPECT_TRUE(tokens_of(once).empty());
    EXPECT_TRUE(structurally_equal(*skeleton(once), once));
}

TEST(TokenText, ReconstructsNormalizedSource)
{
    const Node tree = frontend::parse("MODULE  M;\n\n  END   M.", LanguageId::K);
    EXPECT_EQ(token_text(tree), "MODULE M ; END M .");
}

TEST(TokenText, RoundTripsLexedStreamOnCorpus)
{
    for (const auto& path : testing::corpus_files()) {
        const auto unit = testing::parse_file(path);
        const auto lexed = frontend::tokenize(unit.source, unit.lang, unit.path);
        const auto leaves = tokens_of(unit.tree);
        ASSERT_EQ(leaves.size(), lexed.size()) << path;
        for (std::size_t i = 0; i < lexed.size(); ++i) {
            EXPECT_EQ(leaves[i]->text(), lexed[i].text) << path;
            EXPECT_EQ(leaves[i]->span(), lexed[i].span) << path;
        }
    }
}

// Random trees over the whole vocabulary.
Node random_tree(std::mt19937& rng, int depth, int& line)
{
    std::uniform_int_distribution<int> kind_pick(0, 15);
    std::uniform_int_distribution<int> width(0, depth > 0 ? 4 : 0);
    const UniversalKind kind = all_universal_kinds()[static_cast<std::size_t>(kind_pick(rng))];
    std::vector<Node> children;
    const int n = width(rng);
    for (int i = 0; i < n; ++i) {
        if (rng() % 3 == 0) {
            children.push_back(make_token("t", {"r", ++line, 1}));
        } else {
            Node child = random_tree(rng, depth - 1, line);
            if (child.is(K::Condition) && kind == K::LoopStatement) {
                continue;  // loop conditions need polarity; keep the generator simple
            }
            children.push_back(std::move(child));
        }
    }
    return make_universal(kind, std::move(children), std::nullopt, SourceSpan{"r", ++line, 1});
}

TEST(Properties, FindAllLengthEqualsCountKind)
{
    std::mt19937 rng(12345);
    for (int trial = 0; trial < 200; ++trial) {
        int line = 0;
        const Node tree = random_tree(rng, 5, line);
        for (UniversalKind kind : all_universal_kinds()) {
            const auto found = find_all(tree, kind);
            ASSERT_EQ(found.size(), count_kind(tree, kind));
            for (const Node* n : found) {
                EXPECT_TRUE(n->is(kind));
            }
        }
        const Node sk = *skeleton(tree);
        EXPECT_TRUE(tokens_of(sk).empty());
        EXPECT_TRUE(structurally_equal(*skeleton(sk), sk));
    }
}

}  // namespace
}  // namespace ecst
