// Command-line front end: parse, metrics, callgraph, cfg, snapshot-save,
// snapshot-diff.
#pragma once

#include "ecst/frontend.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ecst::cli {

enum class Command { Parse, Metrics, Callgraph, Cfg, SnapshotSave, SnapshotDiff };
enum class Format { Table, Json, Csv, Dot };

struct CliConfig {
    Command command = Command::Metrics;
    std::vector<std::string> inputs;
    std::optional<frontend::LanguageId> lang_override;
    Format format = Format::Table;
    std::optional<std::string> store;
    std::optional<std::string> function;
    std::optional<std::string> label;
    std::optional<std::string> out;
    bool basis_paths = false;
    bool conventional_edges = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name. Results go to `out` (or --out),
/// diagnostics to `err`. Returns 0, 1 (parse/analysis error) or 2 (usage).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ecst::cli
