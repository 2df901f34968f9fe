// eCST data model: universal-node vocabulary, tree nodes and generic queries.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ecst {

/// Closed vocabulary of language-independent universal nodes.
enum class UniversalKind {
    CompilationUnit,
    UnitName,
    FunctionDef,
    FunctionDecl,
    FunctionCall,
    ParameterList,
    ArgumentList,
    Name,
    BranchStatement,
    Branch,
    LoopStatement,
    Condition,
    StatementBlock,
    AssignStatement,
    ReturnStatement,
    Expression,
};

inline constexpr std::size_t kUniversalKindCount = 16;

/// Truth value of a loop condition that keeps the loop running or leaves it.
enum class ConditionPolarity {
    ContinueWhenTrue,
    ExitWhenTrue,
};

/// Upper-case spelling used in dumps and XML, e.g. "LOOP_STATEMENT".
std::string_view to_string(UniversalKind kind);
std::string_view to_string(ConditionPolarity polarity);
std::optional<UniversalKind> parse_universal_kind(std::string_view text);
std::optional<ConditionPolarity> parse_polarity(std::string_view text);
std::span<const UniversalKind> all_universal_kinds();

struct SourceSpan {
    std::string file;
    int line = 1;
    int column = 1;

    friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
    friend auto operator<=>(const SourceSpan&, const SourceSpan&) = default;
};

/// "file:line:col"
std::string to_string(const SourceSpan& span);

/// Violated construction precondition or operation contract.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Tree node: either a universal node or a concrete token leaf.
///
/// Nodes are immutable once built; subtrees are addressed by `const Node*`
/// for the lifetime of the owning root.
class Node {
public:
    bool is_token() const { return !kind_.has_value(); }
    bool is(UniversalKind kind) const { return kind_ == kind; }
    std::optional<UniversalKind> kind() const { return kind_; }

    /// Lexeme for tokens, empty for universal nodes.
    const std::string& text() const { return text_; }
    const SourceSpan& span() const { return span_; }
    std::optional<ConditionPolarity> polarity() const { return polarity_; }
    std::span<const Node> children() const { return children_; }

    friend Node make_token(std::string text, SourceSpan span);
    friend std::optional<Node> skeleton(const Node& tree);
    friend Node make_universal(UniversalKind kind, std::vector<Node> children,
                               std::optional<ConditionPolarity> polarity,
                               std::optional<SourceSpan> fallback_span);

private:
    Node() = default;

    std::optional<UniversalKind> kind_;
    std::string text_;
    SourceSpan span_;
    std::optional<ConditionPolarity> polarity_;
    std::vector<Node> children_;
};

Node make_token(std::string text, SourceSpan span);

/// Builds a universal node. Its span is that of the first descendant token;
/// `fallback_span` is used only when the subtree holds no token at all.
///
/// Throws ContractError when polarity is given for a kind other than
/// CONDITION, when a LOOP_STATEMENT has a CONDITION child without polarity,
/// when any other node has a CONDITION child with polarity, or when no span
/// can be determined.
Node make_universal(UniversalKind kind, std::vector<Node> children,
                    std::optional<ConditionPolarity> polarity = std::nullopt,
                    std::optional<SourceSpan> fallback_span = std::nullopt);

/// First token in document order, or nullptr.
const Node* first_token(const Node& tree);

std::size_t count_kind(const Node& tree, UniversalKind kind);

/// Pre-order list of every node of `kind`, the root included.
std::vector<const Node*> find_all(const Node& tree, UniversalKind kind);

/// Token leaves in document order.
std::vector<const Node*> tokens_of(const Node& tree);

/// Token texts joined by single spaces.
std::string token_text(const Node& tree);

/// Kind-only projection: tokens and polarity removed, universal nodes kept
/// in order with their spans. Idempotent. A bare token projects to nothing.
std::optional<Node> skeleton(const Node& tree);

/// Compares kinds and child order only (spans, text and polarity ignored).
bool same_shape(const Node& a, const Node& b);

/// Compares kinds, polarity, token text, spans and child order.
bool structurally_equal(const Node& a, const Node& b);

/// One-line rendering of the universal structure, e.g.
/// "LOOP_STATEMENT(STATEMENT_BLOCK,CONDITION)".
std::string shape_string(const Node& tree);

/// Indented multi-line dump of the whole tree.
std::string dump(const Node& tree);

}  // namespace ecst
