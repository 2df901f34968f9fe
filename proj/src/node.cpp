#include "ecst/node.hpp"

#include <array>
#include <sstream>
#include <utility>

namespace ecst {

namespace {

constexpr std::array<UniversalKind, kUniversalKindCount> kAllKinds = {
    UniversalKind::CompilationUnit, UniversalKind::UnitName,
    UniversalKind::FunctionDef,     UniversalKind::FunctionDecl,
    UniversalKind::FunctionCall,    UniversalKind::ParameterList,
    UniversalKind::ArgumentList,    UniversalKind::Name,
    UniversalKind::BranchStatement, UniversalKind::Branch,
    UniversalKind::LoopStatement,   UniversalKind::Condition,
    UniversalKind::StatementBlock,  UniversalKind::AssignStatement,
    UniversalKind::ReturnStatement, UniversalKind::Expression,
};

void collect(const Node& node, UniversalKind kind, std::vector<const Node*>& out)
{
    if (node.is(kind)) {
        out.push_back(&node);
    }
    for (const Node& child : node.children()) {
        collect(child, kind, out);
    }
}

void collect_tokens(const Node& node, std::vector<const Node*>& out)
{
    if (node.is_token()) {
        out.push_back(&node);
        return;
    }
    for (const Node& child : node.children()) {
        collect_tokens(child, out);
    }
}

void dump_into(const Node& node, int depth, std::ostringstream& os)
{
    os << std::string(static_cast<std::size_t>(depth) * 2, ' ');
    if (node.is_token()) {
        os << '\'' << node.text() << "' " << node.span().line << ':' << node.span().column << '\n';
        return;
    }
    os << to_string(*node.kind());
    if (node.polarity()) {
        os << " [" << to_string(*node.polarity()) << ']';
    }
    os << '\n';
    for (const Node& child : node.children()) {
        dump_into(child, depth + 1, os);
    }
}

void shape_into(const Node& node, std::string& out)
{
    out += to_string(*node.kind());
    bool open = false;
    for (const Node& child : node.children()) {
        if (child.is_token()) {
            continue;
        }
        out += open ? ',' : '(';
        open = true;
        shape_into(child, out);
    }
    if (open) {
        out += ')';
    }
}

}  // namespace

std::string_view to_string(UniversalKind kind)
{
    switch (kind) {
    case UniversalKind::CompilationUnit: return "COMPILATION_UNIT";
    case UniversalKind::UnitName: return "UNIT_NAME";
    case UniversalKind::FunctionDef: return "FUNCTION_DEF";
    case UniversalKind::FunctionDecl: return "FUNCTION_DECL";
    case UniversalKind::FunctionCall: return "FUNCTION_CALL";
    case UniversalKind::ParameterList: return "PARAMETER_LIST";
    case UniversalKind::ArgumentList: return "ARGUMENT_LIST";
    case UniversalKind::Name: return "NAME";
    case UniversalKind::BranchStatement: return "BRANCH_STATEMENT";
    case UniversalKind::Branch: return "BRANCH";
    case UniversalKind::LoopStatement: return "LOOP_STATEMENT";
    case UniversalKind::Condition: return "CONDITION";
    case UniversalKind::StatementBlock: return "STATEMENT_BLOCK";
    case UniversalKind::AssignStatement: return "ASSIGN_STATEMENT";
    case UniversalKind::ReturnStatement: return "RETURN_STATEMENT";
    case UniversalKind::Expression: return "EXPRESSION";
    }
    return "?";
}

std::string_view to_string(ConditionPolarity polarity)
{
    return polarity == ConditionPolarity::ContinueWhenTrue ? "CONTINUE_WHEN_TRUE"
                                                          : "EXIT_WHEN_TRUE";
}

std::optional<UniversalKind> parse_universal_kind(std::string_view text)
{
    for (UniversalKind kind : kAllKinds) {
        if (to_string(kind) == text) {
            return kind;
        }
    }
    return std::nullopt;
}

std::optional<ConditionPolarity> parse_polarity(std::string_view text)
{
    if (text == "CONTINUE_WHEN_TRUE") {
        return ConditionPolarity::ContinueWhenTrue;
    }
    if (text == "EXIT_WHEN_TRUE") {
        return ConditionPolarity::ExitWhenTrue;
    }
    return std::nullopt;
}

std::span<const UniversalKind> all_universal_kinds() { return kAllKinds; }

std::string to_string(const SourceSpan& span)
{
    return span.file + ':' + std::to_string(span.line) + ':' + std::to_string(span.column);
}

Node make_token(std::string text, SourceSpan span)
{
    if (text.empty()) {
        throw ContractError("token text must not be empty");
    }
    if (span.line < 1 || span.column < 1) {
        throw ContractError("token span must be 1-based: " + to_string(span));
    }
    Node node;
    node.text_ = std::move(text);
    node.span_ = std::move(span);
    return node;
}

Node make_universal(UniversalKind kind, std::vector<Node> children,
                    std::optional<ConditionPolarity> polarity,
                    std::optional<SourceSpan> fallback_span)
{
    if (polarity && kind != UniversalKind::Condition) {
        throw ContractError("polarity is only allowed on CONDITION, not " +
                            std::string(to_string(kind)));
    }
    for (const Node& child : children) {
        if (!child.is(UniversalKind::Condition)) {
            continue;
        }
        const bool loop = kind == UniversalKind::LoopStatement;
        if (loop && !child.polarity()) {
            throw ContractError("loop CONDITION without polarity at " + to_string(child.span()));
        }
        if (!loop && child.polarity()) {
            throw ContractError("polarity on CONDITION outside a loop at " +
                                to_string(child.span()));
        }
    }

    Node node;
    node.kind_ = kind;
    node.polarity_ = polarity;
    node.children_ = std::move(children);
    if (const Node* token = first_token(node)) {
        node.span_ = token->span();
    } else if (fallback_span) {
        node.span_ = std::move(*fallback_span);
    } else {
        throw ContractError("universal node " + std::string(to_string(kind)) +
                            " has no token and no fallback span");
    }
    if (node.span_.line < 1 || node.span_.column < 1) {
        throw ContractError("universal node span must be 1-based");
    }
    return node;
}

const Node* first_token(const Node& tree)
{
    if (tree.is_token()) {
        return &tree;
    }
    for (const Node& child : tree.children()) {
        if (const Node* token = first_token(child)) {
            return token;
        }
    }
    return nullptr;
}

std::size_t count_kind(const Node& tree, UniversalKind kind)
{
    std::size_t n = tree.is(kind) ? 1 : 0;
    for (const Node& child : tree.children()) {
        n += count_kind(child, kind);
    }
    return n;
}

std::vector<const Node*> find_all(const Node& tree, UniversalKind kind)
{
    std::vector<const Node*> out;
    collect(tree, kind, out);
    return out;
}

std::vector<const Node*> tokens_of(const Node& tree)
{
    std::vector<const Node*> out;
    collect_tokens(tree, out);
    return out;
}

std::string token_text(const Node& tree)
{
    std::string out;
    for (const Node* token : tokens_of(tree)) {
        if (!out.empty()) {
            out += ' ';
        }
        out += token->text();
    }
    return out;
}

std::optional<Node> skeleton(const Node& tree)
{
    if (tree.is_token()) {
        return std::nullopt;
    }
    std::vector<Node> kept;
    for (const Node& child : tree.children()) {
        if (!child.is_token()) {
            kept.push_back(*skeleton(child));
        }
    }
    // Polarity is dropped, so the loop/condition consistency check must not
    // reject the projection.
    Node node;
    node.kind_ = tree.kind();
    node.span_ = tree.span();
    node.children_ = std::move(kept);
    return node;
}

bool same_shape(const Node& a, const Node& b)
{
    if (a.kind() != b.kind() || a.children().size() != b.children().size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.children().size(); ++i) {
        if (!same_shape(a.children()[i], b.children()[i])) {
            return false;
        }
    }
    return true;
}

bool structurally_equal(const Node& a, const Node& b)
{
    if (a.kind() != b.kind() || a.polarity() != b.polarity() || a.text() != b.text() ||
        a.span() != b.span() || a.children().size() != b.children().size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.children().size(); ++i) {
        if (!structurally_equal(a.children()[i], b.children()[i])) {
            return false;
        }
    }
    return true;
}

std::string shape_string(const Node& tree)
{
    if (tree.is_token()) {
        return {};
    }
    std::string out;
    shape_into(tree, out);
    return out;
}

std::string dump(const Node& tree)
{
    std::ostringstream os;
    dump_into(tree, 0, os);
    return os.str();
}

}  // namespace ecst
