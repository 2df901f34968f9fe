#include "ecst/metrics.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace ecst::metrics {

namespace {

using K = UniversalKind;

const Node* child_of_kind(const Node& node, UniversalKind kind)
{
    for (const Node& child : node.children()) {
        if (child.is(kind)) {
            return &child;
        }
    }
    return nullptr;
}

std::string name_under(const Node& node, UniversalKind holder)
{
    const Node* h = child_of_kind(node, holder);
    const Node* name = h != nullptr ? child_of_kind(*h, K::Name) : nullptr;
    const Node* token = name != nullptr ? first_token(*name) : nullptr;
    if (token == nullptr) {
        throw ContractError(std::string(to_string(*node.kind())) + " at " + to_string(node.span()) +
                            " has no " + std::string(to_string(holder)) + "/NAME");
    }
    return token->text();
}

struct LineState {
    bool code = false;
    bool comment = false;
};

}  // namespace

int cyclomatic_complexity(const Node& function_def)
{
    if (!function_def.is(K::FunctionDef)) {
        throw ContractError("cyclomatic_complexity expects a FUNCTION_DEF");
    }
    return 1 + static_cast<int>(count_kind(function_def, K::Condition));
}

int statement_count(const Node& function_def)
{
    std::size_t n = 0;
    for (UniversalKind kind : {K::AssignStatement, K::FunctionCall, K::ReturnStatement,
                               K::BranchStatement, K::LoopStatement}) {
        n += count_kind(function_def, kind);
    }
    return static_cast<int>(n);
}

std::string function_name(const Node& function_def) { return name_under(function_def, K::FunctionDecl); }

std::string unit_name(const Node& compilation_unit) { return name_under(compilation_unit, K::UnitName); }

LocCounts loc(std::string_view source, frontend::LanguageId lang)
{
    LocCounts counts;
    LineState line;
    int depth = 0;           // open block comments (nesting only in LANG_K)
    bool line_comment = false;

    const auto finish_line = [&] {
        ++counts.total;
        if (line.code) {
            ++counts.code;
        } else if (line.comment) {
            ++counts.comment;
        } else {
            ++counts.blank;
        }
        line = {};
        line_comment = false;
    };

    const bool k = lang == frontend::LanguageId::K;
    const std::string_view open = k ? "(*" : "/*";
    const std::string_view close = k ? "*)" : "*/";

    std::size_t i = 0;
    while (i < source.size()) {
        const char c = source[i];
        if (c == '\n') {
            finish_line();
            ++i;
            continue;
        }
        const std::string_view rest = source.substr(i);
        if (line_comment) {
            line.comment = line.comment || (c != ' ' && c != '\t' && c != '\r');
            ++i;
        } else if (depth > 0) {
            if (rest.starts_with(close)) {
                --depth;
                line.comment = true;
                i += 2;
            } else if (k && rest.starts_with(open)) {
                ++depth;
                line.comment = true;
                i += 2;
            } else {
                line.comment = line.comment || (c != ' ' && c != '\t' && c != '\r');
                ++i;
            }
        } else if (rest.starts_with(open)) {
            depth = 1;
            line.comment = true;
            i += 2;
        } else if (!k && rest.starts_with("//")) {
            line_comment = true;
            line.comment = true;
            i += 2;
        } else {
            if (c != ' ' && c != '\t' && c != '\r' && c != '\f' && c != '\v') {
                line.code = true;
            }
            ++i;
        }
    }
    if (!source.empty() && source.back() != '\n') {
        finish_line();
    }
    return counts;
}

MetricsReport unit_report(const std::vector<ParsedUnit>& units)
{
    std::vector<const ParsedUnit*> ordered;
    ordered.reserve(units.size());
    for (const ParsedUnit& u : units) {
        if (!u.tree.is(K::CompilationUnit)) {
            throw ContractError("unit_report expects COMPILATION_UNIT roots (" + u.path + ")");
        }
        ordered.push_back(&u);
    }
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ParsedUnit* a, const ParsedUnit* b) { return a->path < b->path; });

    MetricsReport report;
    for (const ParsedUnit* u : ordered) {
        report.files.push_back({u->path, u->lang, loc(u->source, u->lang)});

        const std::string unit = unit_name(u->tree);
        std::map<std::string, SourceSpan> seen;
        for (const Node* def : find_all(u->tree, K::FunctionDef)) {
            std::string name = function_name(*def);
            auto [it, inserted] = seen.emplace(name, def->span());
            if (!inserted) {
                throw ReportError("duplicate function '" + unit + "." + name + "' at " +
                                  to_string(it->second) + " and " + to_string(def->span()));
            }
            report.functions.push_back(
                {unit, std::move(name), cyclomatic_complexity(*def), statement_count(*def), def->span()});
        }
    }
    return report;
}

}  // namespace ecst::metrics
