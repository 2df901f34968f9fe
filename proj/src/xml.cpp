#include "ecst/persistence.hpp"

#include <charconv>
#include <sstream>

namespace ecst::persistence {

namespace {

using frontend::LanguageId;

void escape_into(std::string_view text, std::string& out)
{
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c; break;
        }
    }
}

void write_node(const Node& node, int depth, std::string& out)
{
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    if (node.is_token()) {
        out += "<token text=\"";
        escape_into(node.text(), out);
        out += "\" line=\"" + std::to_string(node.span().line) + "\" col=\"" +
               std::to_string(node.span().column) + "\"/>\n";
        return;
    }
    out += "<node kind=\"";
    out += to_string(*node.kind());
    out += '"';
    if (node.polarity()) {
        out += " polarity=\"";
        out += to_string(*node.polarity());
        out += '"';
    }
    // A subtree without tokens cannot derive its span, so it is stored.
    if (first_token(node) == nullptr) {
        out += " line=\"" + std::to_string(node.span().line) + "\" col=\"" +
               std::to_string(node.span().column) + "\"";
    }
    if (node.children().empty()) {
        out += "/>\n";
        return;
    }
    out += ">\n";
    for (const Node& child : node.children()) {
        write_node(child, depth + 1, out);
    }
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "</node>\n";
}

struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Element> children;
    int line = 1;
    int column = 1;

    const std::string* attribute(std::string_view key) const
    {
        for (const auto& [k, v] : attributes) {
            if (k == key) {
                return &v;
            }
        }
        return nullptr;
    }
};

/// Reader for the subset of XML that ecst_to_xml writes: a prolog, comments,
/// elements with quoted attributes, and whitespace between elements.
class XmlReader {
public:
    explicit XmlReader(std::string_view doc) : doc_(doc) {}

    Element document()
    {
        skip_misc();
        if (starts_with("<?xml")) {
            const auto end = doc_.find("?>", pos_);
            if (end == std::string_view::npos) {
                fail("unterminated XML declaration");
            }
            advance(end + 2 - pos_);
        }
        skip_misc();
        Element root = element();
        skip_misc();
        if (pos_ != doc_.size()) {
            fail("content after root element");
        }
        return root;
    }

    [[noreturn]] void fail(const std::string& message) const { throw LoadError(line_, column_, message); }

private:
    bool starts_with(std::string_view s) const { return doc_.substr(pos_).starts_with(s); }

    void advance(std::size_t n)
    {
        for (std::size_t i = 0; i < n && pos_ < doc_.size(); ++i) {
            const auto byte = static_cast<unsigned char>(doc_[pos_++]);
            if (byte == '\n') {
                ++line_;
                column_ = 1;
            } else if ((byte & 0xC0) != 0x80) {
                ++column_;
            }
        }
    }

    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

    void skip_space()
    {
        while (pos_ < doc_.size() && is_space(doc_[pos_])) {
            advance(1);
        }
    }

    void skip_misc()
    {
        for (;;) {
            skip_space();
            if (!starts_with("<!--")) {
                return;
            }
            const auto end = doc_.find("-->", pos_);
            if (end == std::string_view::npos) {
                fail("unterminated comment");
            }
            advance(end + 3 - pos_);
        }
    }

    std::string name()
    {
        const std::size_t start = pos_;
        while (pos_ < doc_.size()) {
            const char c = doc_[pos_];
            if (is_space(c) || c == '=' || c == '>' || c == '/' || c == '<' || c == '"' || c == '\'') {
                break;
            }
            advance(1);
        }
        if (pos_ == start) {
            fail("expected a name");
        }
        return std::string(doc_.substr(start, pos_ - start));
    }

    std::string attribute_value()
    {
        if (pos_ >= doc_.size() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) {
            fail("expected quoted attribute value");
        }
        const char quote = doc_[pos_];
        advance(1);
        std::string value;
        while (pos_ < doc_.size() && doc_[pos_] != quote) {
            if (doc_[pos_] == '<') {
                fail("'<' inside attribute value");
            }
            if (doc_[pos_] == '&') {
                value += entity();
                continue;
            }
            value += doc_[pos_];
            advance(1);
        }
        if (pos_ >= doc_.size()) {
            fail("unterminated attribute value");
        }
        advance(1);
        return value;
    }

    std::string entity()
    {
        const auto end = doc_.find(';', pos_);
        if (end == std::string_view::npos || end - pos_ > 10) {
            fail("malformed entity reference");
        }
        const std::string_view ref = doc_.substr(pos_ + 1, end - pos_ - 1);
        std::string out;
        if (ref == "lt") {
            out = "<";
        } else if (ref == "gt") {
            out = ">";
        } else if (ref == "amp") {
            out = "&";
        } else if (ref == "quot") {
            out = "\"";
        } else if (ref == "apos") {
            out = "'";
        } else if (ref.starts_with('#')) {
            const bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
            const std::string_view digits = ref.substr(hex ? 2 : 1);
            unsigned cp = 0;
            const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
            if (ec != std::errc{} || p != digits.data() + digits.size() || cp > 0x10FFFF || digits.empty()) {
                fail("malformed character reference");
            }
            out = utf8(cp);
        } else {
            fail("unknown entity '&" + std::string(ref) + ";'");
        }
        advance(end + 1 - pos_);
        return out;
    }

    static std::string utf8(unsigned cp)
    {
        std::string out;
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
        return out;
    }

    Element element()
    {
        if (!starts_with("<")) {
            fail("expected '<'");
        }
        Element el;
        el.line = line_;
        el.column = column_;
        advance(1);
        el.name = name();
        for (;;) {
            skip_space();
            if (starts_with("/>")) {
                advance(2);
                return el;
            }
            if (starts_with(">")) {
                advance(1);
                break;
            }
            std::string key = name();
            skip_space();
            if (!starts_with("=")) {
                fail("expected '=' after attribute '" + key + "'");
            }
            advance(1);
            skip_space();
            el.attributes.emplace_back(std::move(key), attribute_value());
        }
        for (;;) {
            skip_misc();
            if (pos_ >= doc_.size()) {
                fail("unterminated element <" + el.name + ">");
            }
            if (starts_with("</")) {
                advance(2);
                if (name() != el.name) {
                    fail("mismatched closing tag for <" + el.name + ">");
                }
                skip_space();
                if (!starts_with(">")) {
                    fail("expected '>'");
                }
                advance(1);
                return el;
            }
            if (!starts_with("<")) {
                fail("unexpected text content");
            }
            el.children.push_back(element());
        }
    }

    std::string_view doc_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

[[noreturn]] void fail_at(const Element& el, const std::string& message)
{
    throw LoadError(el.line, el.column, message);
}

const std::string& required(const Element& el, std::string_view key)
{
    const std::string* value = el.attribute(key);
    if (value == nullptr) {
        fail_at(el, "<" + el.name + "> lacks attribute '" + std::string(key) + "'");
    }
    return *value;
}

int positive_int(const Element& el, std::string_view key)
{
    const std::string& text = required(el, key);
    int value = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || p != text.data() + text.size() || value < 1) {
        fail_at(el, "attribute '" + std::string(key) + "' must be a positive integer");
    }
    return value;
}

Node to_node(const Element& el, std::string_view file)
{
    if (el.name == "token") {
        const std::string& text = required(el, "text");
        if (text.empty()) {
            fail_at(el, "empty token text");
        }
        if (!el.children.empty()) {
            fail_at(el, "<token> must be empty");
        }
        return make_token(text, {std::string(file), positive_int(el, "line"), positive_int(el, "col")});
    }
    if (el.name != "node") {
        fail_at(el, "unexpected element <" + el.name + ">");
    }
    const std::string& kind_text = required(el, "kind");
    const auto kind = parse_universal_kind(kind_text);
    if (!kind) {
        fail_at(el, "unknown kind '" + kind_text + "'");
    }
    std::optional<ConditionPolarity> polarity;
    if (const std::string* p = el.attribute("polarity")) {
        polarity = parse_polarity(*p);
        if (!polarity) {
            fail_at(el, "unknown polarity '" + *p + "'");
        }
    }
    std::optional<SourceSpan> fallback;
    if (el.attribute("line") != nullptr) {
        fallback = SourceSpan{std::string(file), positive_int(el, "line"), positive_int(el, "col")};
    }
    std::vector<Node> children;
    children.reserve(el.children.size());
    for (const Element& child : el.children) {
        children.push_back(to_node(child, file));
    }
    try {
        return make_universal(*kind, std::move(children), polarity, std::move(fallback));
    } catch (const ContractError& e) {
        fail_at(el, e.what());
    }
}

}  // namespace

LoadError::LoadError(int line, int column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column)
{
}

std::string ecst_to_xml(const Node& tree, LanguageId lang)
{
    if (!tree.is(UniversalKind::CompilationUnit)) {
        throw ContractError("ecst_to_xml expects a COMPILATION_UNIT root");
    }
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<ecst version=\"1\" lang=\"";
    out += frontend::to_string(lang);
    out += "\">\n";
    write_node(tree, 1, out);
    out += "</ecst>\n";
    return out;
}

LoadedTree xml_to_ecst(std::string_view doc, std::string_view file)
{
    const Element root = XmlReader(doc).document();
    if (root.name != "ecst") {
        fail_at(root, "root element must be <ecst>, not <" + root.name + ">");
    }
    const std::string& version = required(root, "version");
    if (version != "1") {
        fail_at(root, "unsupported eCST version '" + version + "' (expected 1)");
    }
    const std::string& lang_text = required(root, "lang");
    const auto lang = frontend::parse_language(lang_text);
    if (!lang || lang_text.rfind("LANG_", 0) != 0) {
        fail_at(root, "unknown lang '" + lang_text + "'");
    }
    if (root.children.size() != 1) {
        fail_at(root, "<ecst> must hold exactly one tree");
    }
    Node tree = to_node(root.children.front(), file);
    if (!tree.is(UniversalKind::CompilationUnit)) {
        fail_at(root.children.front(), "tree root must be COMPILATION_UNIT");
    }
    return {std::move(tree), *lang};
}

}  // namespace ecst::persistence
