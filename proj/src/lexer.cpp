#include "ecst/frontend.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace ecst::frontend {

namespace {

constexpr std::array<std::string_view, 15> kKeywordsK = {
    "MODULE", "PROCEDURE", "END",    "IF",  "THEN", "ELSIF", "ELSE", "WHILE",
    "DO",     "REPEAT",    "UNTIL",  "RETURN", "AND", "OR",  "NOT",
};
constexpr std::array<std::string_view, 6> kKeywordsC = {
    "class", "if", "else", "while", "do", "return",
};

// Longest first, so prefix operators never shadow longer ones.
constexpr std::array<std::string_view, 11> kOperatorsK = {
    ":=", "<=", ">=", "<", ">", "=", "#", "+", "-", "*", "/",
};
constexpr std::array<std::string_view, 14> kOperatorsC = {
    "==", "!=", "<=", ">=", "&&", "||", "<", ">", "=", "!", "+", "-", "*", "/",
};
constexpr std::string_view kPunctK = ";(),.";
constexpr std::string_view kPunctC = "{}();,";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }
bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
public:
    Lexer(std::string_view source, LanguageId lang, std::string_view file)
        : src_(source), lang_(lang), file_(file)
    {
    }

    std::vector<Token> run()
    {
        std::vector<Token> out;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (is_space(c)) {
                advance(1);
                continue;
            }
            if (skip_comment()) {
                continue;
            }
            const SourceSpan span = here();
            const std::size_t start = pos_;
            if (is_ident_start(c)) {
                while (pos_ < src_.size() && is_ident_char(src_[pos_])) {
                    advance(1);
                }
                std::string text(src_.substr(start, pos_ - start));
                const auto category = is_keyword(text) ? TokenCategory::Keyword : TokenCategory::Ident;
                out.push_back({std::move(text), category, span});
                continue;
            }
            if (is_digit(c)) {
                while (pos_ < src_.size() && is_digit(src_[pos_])) {
                    advance(1);
                }
                out.push_back({std::string(src_.substr(start, pos_ - start)), TokenCategory::IntLiteral, span});
                continue;
            }
            if (auto op = match_operator()) {
                advance(op->size());
                out.push_back({std::string(*op), TokenCategory::Operator, span});
                continue;
            }
            const std::string_view punct = lang_ == LanguageId::K ? kPunctK : kPunctC;
            if (punct.find(c) != std::string_view::npos) {
                advance(1);
                out.push_back({std::string(1, c), TokenCategory::Punct, span});
                continue;
            }
            throw ParseError(span, "a token", "illegal character '" + current_code_point() + "'");
        }
        return out;
    }

private:
    SourceSpan here() const { return {std::string(file_), line_, column_}; }

    void advance(std::size_t n)
    {
        for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
            const auto byte = static_cast<unsigned char>(src_[pos_++]);
            if (byte == '\n') {
                ++line_;
                column_ = 1;
            } else if ((byte & 0xC0) != 0x80) {
                ++column_;
            }
        }
    }

    bool starts_with(std::string_view prefix) const { return src_.substr(pos_).starts_with(prefix); }

    bool skip_comment()
    {
        if (lang_ == LanguageId::K) {
            if (!starts_with("(*")) {
                return false;
            }
            const SourceSpan open = here();
            advance(2);
            int depth = 1;
            while (depth > 0) {
                if (pos_ >= src_.size()) {
                    throw ParseError(open, "end of comment '*)'", "unterminated comment");
                }
                if (starts_with("(*")) {
                    ++depth;
                    advance(2);
                } else if (starts_with("*)")) {
                    --depth;
                    advance(2);
                } else {
                    advance(1);
                }
            }
            return true;
        }
        if (starts_with("//")) {
            while (pos_ < src_.size() && src_[pos_] != '\n') {
                advance(1);
            }
            return true;
        }
        if (starts_with("/*")) {
            const SourceSpan open = here();
            advance(2);
            while (!starts_with("*/")) {
                if (pos_ >= src_.size()) {
                    throw ParseError(open, "end of comment '*/'", "unterminated comment");
                }
                advance(1);
            }
            advance(2);
            return true;
        }
        return false;
    }

    bool is_keyword(std::string_view text) const
    {
        if (lang_ == LanguageId::K) {
            return std::find(kKeywordsK.begin(), kKeywordsK.end(), text) != kKeywordsK.end();
        }
        return std::find(kKeywordsC.begin(), kKeywordsC.end(), text) != kKeywordsC.end();
    }

    std::optional<std::string_view> match_operator() const
    {
        const auto try_all = [this](const auto& ops) -> std::optional<std::string_view> {
            for (std::string_view op : ops) {
                if (starts_with(op)) {
                    return op;
                }
            }
            return std::nullopt;
        };
        return lang_ == LanguageId::K ? try_all(kOperatorsK) : try_all(kOperatorsC);
    }

    std::string current_code_point() const
    {
        std::size_t end = pos_ + 1;
        while (end < src_.size() && (static_cast<unsigned char>(src_[end]) & 0xC0) == 0x80) {
            ++end;
        }
        return std::string(src_.substr(pos_, end - pos_));
    }

    std::string_view src_;
    LanguageId lang_;
    std::string_view file_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

}  // namespace

ParseError::ParseError(SourceSpan span, std::string expected, std::string found)
    : std::runtime_error(to_string(span) + ": expected " + expected + ", found " + found),
      span_(std::move(span)),
      expected_(std::move(expected)),
      found_(std::move(found))
{
}

std::string_view to_string(LanguageId lang) { return lang == LanguageId::K ? "LANG_K" : "LANG_C"; }

std::optional<LanguageId> parse_language(std::string_view text)
{
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "lang_k" || lower == "k" || lower == "mod") {
        return LanguageId::K;
    }
    if (lower == "lang_c" || lower == "c" || lower == "cls") {
        return LanguageId::C;
    }
    return std::nullopt;
}

LanguageId detect_language(const std::filesystem::path& path)
{
    const auto ext = path.extension().string();
    if (ext == ".mod") {
        return LanguageId::K;
    }
    if (ext == ".cls") {
        return LanguageId::C;
    }
    throw DetectionError("cannot detect language of '" + path.string() +
                         "' from its extension; pass --lang K or --lang C");
}

std::vector<Token> tokenize(std::string_view source, LanguageId lang, std::string_view file)
{
    return Lexer(source, lang, file).run();
}

}  // namespace ecst::frontend
