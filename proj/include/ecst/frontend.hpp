// Lexers and parsers for the two input languages.
//
// LANG_K is the keyword-structured language (`.mod`, MODULE/PROCEDURE,
// REPEAT...UNTIL); LANG_C is the curly-brace language (`.cls`, class/method,
// do...while). Both parsers insert universal nodes while parsing, so the
// trees they produce share one vocabulary.
#pragma once

#include "ecst/node.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ecst::frontend {

enum class LanguageId { K, C };

/// "LANG_K" / "LANG_C"
std::string_view to_string(LanguageId lang);
/// Accepts "LANG_K", "K", "mod" and the LANG_C counterparts, case-insensitively.
std::optional<LanguageId> parse_language(std::string_view text);

enum class TokenCategory { Keyword, Ident, IntLiteral, Operator, Punct };

struct Token {
    std::string text;
    TokenCategory category;
    SourceSpan span;

    friend bool operator==(const Token&, const Token&) = default;
};

/// First lexical or syntax error in a file.
class ParseError : public std::runtime_error {
public:
    ParseError(SourceSpan span, std::string expected, std::string found);

    const SourceSpan& span() const { return span_; }
    const std::string& expected() const { return expected_; }
    const std::string& found() const { return found_; }

private:
    SourceSpan span_;
    std::string expected_;
    std::string found_;
};

/// Unknown file extension.
class DetectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// `.mod` -> K, `.cls` -> C.
LanguageId detect_language(const std::filesystem::path& path);

/// Drops comments and whitespace. Columns count code points.
std::vector<Token> tokenize(std::string_view source, LanguageId lang, std::string_view file = {});

/// Parses one compilation unit. The first error aborts the file.
Node parse(std::string_view source, LanguageId lang, std::string_view file = {});

}  // namespace ecst::frontend
