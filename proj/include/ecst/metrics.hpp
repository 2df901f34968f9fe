// Language-independent metrics over eCSTs.
#pragma once

#include "ecst/frontend.hpp"
#include "ecst/node.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace ecst::metrics {

struct FunctionMetrics {
    std::string unit;
    std::string function;
    int cc = 1;
    int statements = 0;
    /// Position of the FUNCTION_DEF.
    SourceSpan span;

    friend bool operator==(const FunctionMetrics&, const FunctionMetrics&) = default;
};

struct LocCounts {
    int total = 0;
    int blank = 0;
    int comment = 0;
    int code = 0;

    friend bool operator==(const LocCounts&, const LocCounts&) = default;
};

struct FileMetrics {
    std::string path;
    frontend::LanguageId lang = frontend::LanguageId::K;
    LocCounts loc;

    friend bool operator==(const FileMetrics&, const FileMetrics&) = default;
};

struct MetricsReport {
    std::vector<FileMetrics> files;
    std::vector<FunctionMetrics> functions;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// A parsed file together with the text it came from.
struct ParsedUnit {
    std::string path;
    frontend::LanguageId lang = frontend::LanguageId::K;
    std::string source;
    Node tree;
};

/// Same function name defined twice in one unit.
class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 1 + number of CONDITION nodes under the FUNCTION_DEF. Boolean operators
/// inside a predicate do not count, nor do bare else arms.
int cyclomatic_complexity(const Node& function_def);

/// Statement-level universal nodes (assign, call, return, branch, loop).
int statement_count(const Node& function_def);

/// Name of a FUNCTION_DEF, read from its FUNCTION_DECL/NAME.
std::string function_name(const Node& function_def);

/// Name of a COMPILATION_UNIT, read from its UNIT_NAME/NAME.
std::string unit_name(const Node& compilation_unit);

/// Line classification. A line holding both comment and code counts as code.
LocCounts loc(std::string_view source, frontend::LanguageId lang);

/// Per-file LOC and per-function CC. Files are ordered by path, functions by
/// (file, source position).
MetricsReport unit_report(const std::vector<ParsedUnit>& units);

}  // namespace ecst::metrics
