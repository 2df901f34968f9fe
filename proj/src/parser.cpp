#include "ecst/frontend.hpp"

#include <initializer_list>
#include <utility>

namespace ecst::frontend {

namespace {

using K = UniversalKind;

SourceSpan end_of_input(std::string_view source, std::string_view file)
{
    SourceSpan span{std::string(file), 1, 1};
    for (char c : source) {
        if (c == '\n') {
            ++span.line;
            span.column = 1;
        } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
            ++span.column;
        }
    }
    return span;
}

/// Token cursor plus the expression grammar, which both languages share
/// apart from the spelling of the logical operators.
class ParserBase {
protected:
    ParserBase(std::vector<Token> tokens, SourceSpan eof, LanguageId lang)
        : tokens_(std::move(tokens)), eof_(std::move(eof)), lang_(lang)
    {
    }

    bool at_end() const { return pos_ >= tokens_.size(); }

    const Token* peek(std::size_t ahead = 0) const
    {
        return pos_ + ahead < tokens_.size() ? &tokens_[pos_ + ahead] : nullptr;
    }

    bool check(std::string_view text, std::size_t ahead = 0) const
    {
        const Token* t = peek(ahead);
        return t != nullptr && t->text == text && t->category != TokenCategory::Ident;
    }

    bool check_ident(std::size_t ahead = 0) const
    {
        const Token* t = peek(ahead);
        return t != nullptr && t->category == TokenCategory::Ident;
    }

    [[noreturn]] void fail(std::string expected) const
    {
        if (const Token* t = peek()) {
            throw ParseError(t->span, std::move(expected), "'" + t->text + "'");
        }
        throw ParseError(eof_, std::move(expected), "end of input");
    }

    Node take()
    {
        const Token& t = tokens_[pos_++];
        return make_token(t.text, t.span);
    }

    Node expect(std::string_view text)
    {
        if (!check(text)) {
            fail("'" + std::string(text) + "'");
        }
        return take();
    }

    Node expect_ident(std::string_view what)
    {
        if (!check_ident()) {
            fail(std::string(what));
        }
        return take();
    }

    static Node named(Node ident) { return make_universal(K::Name, vec(std::move(ident))); }

    template <typename... Nodes>
    static std::vector<Node> vec(Nodes&&... nodes)
    {
        std::vector<Node> out;
        out.reserve(sizeof...(nodes));
        (out.push_back(std::forward<Nodes>(nodes)), ...);
        return out;
    }

    /// EXPRESSION wrapping the flat token run of one expression.
    Node expression()
    {
        const std::size_t start = pos_;
        parse_or();
        std::vector<Node> tokens;
        tokens.reserve(pos_ - start);
        for (std::size_t i = start; i < pos_; ++i) {
            tokens.push_back(make_token(tokens_[i].text, tokens_[i].span));
        }
        return make_universal(K::Expression, std::move(tokens));
    }

    /// ARGUMENT_LIST: "(" [expr {"," expr}] ")"
    Node argument_list()
    {
        std::vector<Node> parts;
        parts.push_back(expect("("));
        if (!check(")")) {
            parts.push_back(expression());
            while (check(",")) {
                parts.push_back(take());
                parts.push_back(expression());
            }
        }
        parts.push_back(expect(")"));
        return make_universal(K::ArgumentList, std::move(parts));
    }

    Node call_statement()
    {
        Node name = named(take());
        Node args = argument_list();
        return make_universal(K::FunctionCall, vec(std::move(name), std::move(args), expect(";")));
    }

    Node return_statement()
    {
        std::vector<Node> parts;
        parts.push_back(take());
        if (!check(";")) {
            parts.push_back(expression());
        }
        parts.push_back(expect(";"));
        return make_universal(K::ReturnStatement, std::move(parts));
    }

    std::size_t pos_ = 0;

private:
    bool check_any(std::initializer_list<std::string_view> texts) const
    {
        for (std::string_view text : texts) {
            if (check(text)) {
                return true;
            }
        }
        return false;
    }

    std::string_view or_op() const { return lang_ == LanguageId::K ? "OR" : "||"; }
    std::string_view and_op() const { return lang_ == LanguageId::K ? "AND" : "&&"; }
    std::string_view not_op() const { return lang_ == LanguageId::K ? "NOT" : "!"; }

    bool at_relational() const
    {
        if (lang_ == LanguageId::K) {
            return check_any({"<", "<=", ">", ">=", "=", "#"});
        }
        return check_any({"<", "<=", ">", ">=", "==", "!="});
    }

    void parse_or()
    {
        parse_and();
        while (check(or_op())) {
            ++pos_;
            parse_and();
        }
    }

    void parse_and()
    {
        parse_relational();
        while (check(and_op())) {
            ++pos_;
            parse_relational();
        }
    }

    void parse_relational()
    {
        parse_additive();
        if (at_relational()) {
            ++pos_;
            parse_additive();
        }
    }

    void parse_additive()
    {
        parse_multiplicative();
        while (check_any({"+", "-"})) {
            ++pos_;
            parse_multiplicative();
        }
    }

    void parse_multiplicative()
    {
        parse_unary();
        while (check_any({"*", "/"})) {
            ++pos_;
            parse_unary();
        }
    }

    void parse_unary()
    {
        if (check(not_op())) {
            ++pos_;
            parse_unary();
            return;
        }
        const Token* t = peek();
        if (t != nullptr &&
            (t->category == TokenCategory::Ident || t->category == TokenCategory::IntLiteral)) {
            ++pos_;
            return;
        }
        if (check("(")) {
            ++pos_;
            parse_or();
            if (!check(")")) {
                fail("')'");
            }
            ++pos_;
            return;
        }
        fail("an expression");
    }

    std::vector<Token> tokens_;
    SourceSpan eof_;
    LanguageId lang_;
};

class ParserK : public ParserBase {
public:
    ParserK(std::vector<Token> tokens, SourceSpan eof)
        : ParserBase(std::move(tokens), std::move(eof), LanguageId::K)
    {
    }

    Node unit()
    {
        std::vector<Node> parts;
        parts.push_back(expect("MODULE"));
        Node ident = expect_ident("module name");
        const std::string name = ident.text();
        parts.push_back(make_universal(K::UnitName, vec(named(std::move(ident)))));
        parts.push_back(expect(";"));
        while (check("PROCEDURE")) {
            parts.push_back(procedure());
        }
        parts.push_back(expect("END"));
        parts.push_back(closing_name(name));
        parts.push_back(expect("."));
        if (!at_end()) {
            fail("end of input after module");
        }
        return make_universal(K::CompilationUnit, std::move(parts));
    }

private:
    Node closing_name(const std::string& name)
    {
        if (!check_ident() || peek()->text != name) {
            fail("'" + name + "' after END");
        }
        return take();
    }

    Node procedure()
    {
        std::vector<Node> decl;
        decl.push_back(take());
        Node ident = expect_ident("procedure name");
        const std::string name = ident.text();
        decl.push_back(named(std::move(ident)));
        decl.push_back(parameter_list());
        decl.push_back(expect(";"));

        std::vector<Node> body = statements({"END"});
        body.push_back(expect("END"));

        std::vector<Node> parts;
        parts.push_back(make_universal(K::FunctionDecl, std::move(decl)));
        parts.push_back(make_universal(K::StatementBlock, std::move(body)));
        parts.push_back(closing_name(name));
        parts.push_back(expect(";"));
        return make_universal(K::FunctionDef, std::move(parts));
    }

    Node parameter_list()
    {
        std::vector<Node> parts;
        parts.push_back(expect("("));
        if (!check(")")) {
            parts.push_back(expect_ident("parameter name"));
            while (check(",")) {
                parts.push_back(take());
                parts.push_back(expect_ident("parameter name"));
            }
        }
        parts.push_back(expect(")"));
        return make_universal(K::ParameterList, std::move(parts));
    }

    /// Statements up to (not including) one of the terminator keywords.
    std::vector<Node> statements(std::initializer_list<std::string_view> terminators)
    {
        std::vector<Node> out;
        for (;;) {
            for (std::string_view t : terminators) {
                if (check(t)) {
                    return out;
                }
            }
            out.push_back(statement());
        }
    }

    Node statement()
    {
        if (check_ident()) {
            if (check(":=", 1)) {
                return assignment();
            }
            if (check("(", 1)) {
                return call_statement();
            }
            ++pos_;
            fail("':=' or '(' after identifier");
        }
        if (check("IF")) {
            std::vector<Node> parts = if_chain();
            parts.push_back(expect("END"));
            parts.push_back(expect(";"));
            return make_universal(K::BranchStatement, std::move(parts));
        }
        if (check("WHILE")) {
            return while_loop();
        }
        if (check("REPEAT")) {
            return repeat_loop();
        }
        if (check("RETURN")) {
            return return_statement();
        }
        fail("a statement");
    }

    Node assignment()
    {
        Node target = take();
        Node op = take();
        Node value = expression();
        return make_universal(K::AssignStatement,
                              vec(std::move(target), std::move(op), std::move(value), expect(";")));
    }

    /// IF/ELSIF head through its else part; the caller closes with END ";".
    /// Each ELSIF becomes a nested BRANCH_STATEMENT in the else position.
    std::vector<Node> if_chain()
    {
        std::vector<Node> parts;
        parts.push_back(take());
        parts.push_back(make_universal(K::Condition, vec(expression())));

        std::vector<Node> then_part;
        then_part.push_back(expect("THEN"));
        for (Node& stmt : statements({"ELSIF", "ELSE", "END"})) {
            then_part.push_back(std::move(stmt));
        }
        parts.push_back(make_universal(
            K::Branch, vec(make_universal(K::StatementBlock, std::move(then_part)))));

        if (check("ELSIF")) {
            Node nested = make_universal(K::BranchStatement, if_chain());
            parts.push_back(make_universal(
                K::Branch, vec(make_universal(K::StatementBlock, vec(std::move(nested))))));
        } else if (check("ELSE")) {
            std::vector<Node> else_part;
            else_part.push_back(take());
            for (Node& stmt : statements({"END"})) {
                else_part.push_back(std::move(stmt));
            }
            parts.push_back(make_universal(
                K::Branch, vec(make_universal(K::StatementBlock, std::move(else_part)))));
        }
        return parts;
    }

    Node while_loop()
    {
        Node keyword = take();
        Node condition = make_universal(K::Condition, vec(expression()),
                                        ConditionPolarity::ContinueWhenTrue);
        std::vector<Node> body;
        body.push_back(expect("DO"));
        for (Node& stmt : statements({"END"})) {
            body.push_back(std::move(stmt));
        }
        body.push_back(expect("END"));
        return make_universal(K::LoopStatement,
                              vec(std::move(keyword), std::move(condition),
                                  make_universal(K::StatementBlock, std::move(body)), expect(";")));
    }

    Node repeat_loop()
    {
        std::vector<Node> body;
        body.push_back(take());
        for (Node& stmt : statements({"UNTIL"})) {
            body.push_back(std::move(stmt));
        }
        Node until = expect("UNTIL");
        Node condition = make_universal(K::Condition, vec(expression()),
                                        ConditionPolarity::ExitWhenTrue);
        return make_universal(K::LoopStatement,
                              vec(make_universal(K::StatementBlock, std::move(body)),
                                  std::move(until), std::move(condition), expect(";")));
    }
};

class ParserC : public ParserBase {
public:
    ParserC(std::vector<Token> tokens, SourceSpan eof)
        : ParserBase(std::move(tokens), std::move(eof), LanguageId::C)
    {
    }

    Node unit()
    {
        std::vector<Node> parts;
        parts.push_back(expect("class"));
        parts.push_back(make_universal(K::UnitName, vec(named(expect_ident("class name")))));
        parts.push_back(expect("{"));
        while (!check("}")) {
            if (at_end()) {
                fail("'}'");
            }
            parts.push_back(method());
        }
        parts.push_back(take());
        if (!at_end()) {
            fail("end of input after class");
        }
        return make_universal(K::CompilationUnit, std::move(parts));
    }

private:
    Node method()
    {
        std::vector<Node> decl;
        decl.push_back(expect_ident("return type"));
        decl.push_back(named(expect_ident("method name")));
        decl.push_back(parameter_list());
        Node decl_node = make_universal(K::FunctionDecl, std::move(decl));
        if (!check("{")) {
            fail("'{'");
        }
        return make_universal(K::FunctionDef, vec(std::move(decl_node), block()));
    }

    Node parameter_list()
    {
        std::vector<Node> parts;
        parts.push_back(expect("("));
        if (!check(")")) {
            parts.push_back(expect_ident("parameter type"));
            parts.push_back(expect_ident("parameter name"));
            while (check(",")) {
                parts.push_back(take());
                parts.push_back(expect_ident("parameter type"));
                parts.push_back(expect_ident("parameter name"));
            }
        }
        parts.push_back(expect(")"));
        return make_universal(K::ParameterList, std::move(parts));
    }

    Node block()
    {
        std::vector<Node> parts;
        parts.push_back(expect("{"));
        while (!check("}")) {
            if (at_end()) {
                fail("'}'");
            }
            statement(parts);
        }
        parts.push_back(take());
        return make_universal(K::StatementBlock, std::move(parts));
    }

    /// Body of if/else/while/do: a block is used as-is, any other single
    /// statement is wrapped in its own STATEMENT_BLOCK.
    Node arm()
    {
        if (check("{")) {
            return block();
        }
        std::vector<Node> parts;
        statement(parts);
        return make_universal(K::StatementBlock, std::move(parts));
    }

    Node condition(std::optional<ConditionPolarity> polarity)
    {
        Node open = expect("(");
        Node expr = expression();
        return make_universal(K::Condition, vec(std::move(open), std::move(expr), expect(")")),
                              polarity);
    }

    /// Appends one statement. A declaration without initializer contributes
    /// bare tokens only, since it has no universal counterpart.
    void statement(std::vector<Node>& out)
    {
        if (check("{")) {
            out.push_back(block());
        } else if (check("if")) {
            out.push_back(if_statement());
        } else if (check("while")) {
            Node keyword = take();
            Node cond = condition(ConditionPolarity::ContinueWhenTrue);
            out.push_back(make_universal(K::LoopStatement,
                                         vec(std::move(keyword), std::move(cond), arm())));
        } else if (check("do")) {
            Node keyword = take();
            Node body = arm();
            Node tail = expect("while");
            Node cond = condition(ConditionPolarity::ContinueWhenTrue);
            out.push_back(make_universal(K::LoopStatement,
                                         vec(std::move(keyword), std::move(body), std::move(tail),
                                             std::move(cond), expect(";"))));
        } else if (check("return")) {
            out.push_back(return_statement());
        } else if (check_ident()) {
            if (check_ident(1)) {
                declaration(out);
            } else if (check("=", 1)) {
                Node target = take();
                Node op = take();
                Node value = expression();
                out.push_back(make_universal(
                    K::AssignStatement,
                    vec(std::move(target), std::move(op), std::move(value), expect(";"))));
            } else if (check("(", 1)) {
                out.push_back(call_statement());
            } else {
                ++pos_;
                fail("'=', '(' or a name after identifier");
            }
        } else {
            fail("a statement");
        }
    }

    void declaration(std::vector<Node>& out)
    {
        Node type = take();
        Node name = take();
        if (check(";")) {
            out.push_back(std::move(type));
            out.push_back(std::move(name));
            out.push_back(take());
            return;
        }
        Node op = expect("=");
        Node value = expression();
        out.push_back(make_universal(K::AssignStatement,
                                     vec(std::move(type), std::move(name), std::move(op),
                                         std::move(value), expect(";"))));
    }

    Node if_statement()
    {
        std::vector<Node> parts;
        parts.push_back(take());
        parts.push_back(condition(std::nullopt));
        parts.push_back(make_universal(K::Branch, vec(arm())));
        if (check("else")) {
            Node keyword = take();
            parts.push_back(make_universal(K::Branch, vec(std::move(keyword), arm())));
        }
        return make_universal(K::BranchStatement, std::move(parts));
    }
};

}  // namespace

Node parse(std::string_view source, LanguageId lang, std::string_view file)
{
    std::vector<Token> tokens = tokenize(source, lang, file);
    SourceSpan eof = end_of_input(source, file);
    if (lang == LanguageId::K) {
        return ParserK(std::move(tokens), std::move(eof)).unit();
    }
    return ParserC(std::move(tokens), std::move(eof)).unit();
}

}  // namespace ecst::frontend
