#include "ecst/cli.hpp"

#include "ecst/callgraph.hpp"
#include "ecst/cfg.hpp"
#include "ecst/metrics.hpp"
#include "ecst/persistence.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <sstream>

namespace ecst::cli {

namespace {

using nlohmann::json;
using frontend::LanguageId;

/// Analysis failure already reported on the error stream.
struct Failure {};

/// Invalid flag combination detected after CLI11 parsing.
struct UsageError {
    std::string message;
};

std::string_view command_name(Command c)
{
    switch (c) {
    case Command::Parse: return "parse";
    case Command::Metrics: return "metrics";
    case Command::Callgraph: return "callgraph";
    case Command::Cfg: return "cfg";
    case Command::SnapshotSave: return "snapshot-save";
    case Command::SnapshotDiff: return "snapshot-diff";
    }
    return "?";
}

bool format_allowed(Command c, Format f)
{
    switch (f) {
    case Format::Table:
    case Format::Json: return true;
    case Format::Csv: return c == Command::Metrics || c == Command::SnapshotDiff;
    case Format::Dot: return c == Command::Callgraph || c == Command::Cfg;
    }
    return false;
}

struct Loaded {
    std::vector<metrics::ParsedUnit> units;  // sorted by path
};

std::optional<metrics::ParsedUnit> load_one(const std::string& path,
                                            std::optional<LanguageId> lang_override,
                                            std::string& diagnostic)
{
    try {
        const LanguageId lang = lang_override ? *lang_override : frontend::detect_language(path);
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            diagnostic = path + ": error: cannot read file";
            return std::nullopt;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        std::string source = ss.str();
        Node tree = frontend::parse(source, lang, path);
        return metrics::ParsedUnit{path, lang, std::move(source), std::move(tree)};
    } catch (const frontend::ParseError& e) {
        diagnostic = to_string(e.span()) + ": error: expected " + e.expected() + ", found " + e.found();
    } catch (const frontend::DetectionError& e) {
        diagnostic = path + ": error: " + e.what();
    }
    return std::nullopt;
}

/// Parses every input concurrently; results and diagnostics are merged in
/// path order.
Loaded load_inputs(const CliConfig& config, std::ostream& err)
{
    std::vector<std::string> paths = config.inputs;
    std::sort(paths.begin(), paths.end());

    struct Result {
        std::optional<metrics::ParsedUnit> unit;
        std::string diagnostic;
    };
    std::vector<std::future<Result>> jobs;
    jobs.reserve(paths.size());
    for (const std::string& path : paths) {
        jobs.push_back(std::async(std::launch::async, [&config, path] {
            Result r;
            r.unit = load_one(path, config.lang_override, r.diagnostic);
            return r;
        }));
    }

    Loaded loaded;
    bool failed = false;
    for (auto& job : jobs) {
        Result r = job.get();
        if (r.unit) {
            loaded.units.push_back(std::move(*r.unit));
        } else {
            err << r.diagnostic << '\n';
            failed = true;
        }
    }
    if (failed) {
        throw Failure{};
    }
    return loaded;
}

std::vector<Node> forest_of(const Loaded& loaded)
{
    std::vector<Node> forest;
    forest.reserve(loaded.units.size());
    for (const auto& u : loaded.units) {
        forest.push_back(u.tree);
    }
    return forest;
}

std::string csv_field(const std::string& text)
{
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (char c : text) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

/// Left-aligned text columns, right-aligned numeric ones.
void write_table(std::ostream& os, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows, const std::vector<bool>& numeric)
{
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : rows) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    const auto line = [&](const std::vector<std::string>& cells) {
        std::string text;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c > 0) {
                text += "  ";
            }
            const std::string pad(width[c] - cells[c].size(), ' ');
            text += numeric[c] ? pad + cells[c] : cells[c] + (c + 1 < cells.size() ? pad : "");
        }
        os << text << '\n';
    };
    line(header);
    for (const auto& row : rows) {
        line(row);
    }
}

json tree_to_json(const Node& node)
{
    if (node.is_token()) {
        return {{"token", node.text()}, {"line", node.span().line}, {"col", node.span().column}};
    }
    json j{{"kind", to_string(*node.kind())}};
    if (node.polarity()) {
        j["polarity"] = to_string(*node.polarity());
    }
    json children = json::array();
    for (const Node& child : node.children()) {
        children.push_back(tree_to_json(child));
    }
    j["children"] = std::move(children);
    return j;
}

void cmd_parse(const CliConfig& config, std::ostream& out, std::ostream& err)
{
    const Loaded loaded = load_inputs(config, err);
    if (config.format == Format::Json) {
        json doc = json::array();
        for (const auto& u : loaded.units) {
            doc.push_back({{"path", u.path}, {"lang", frontend::to_string(u.lang)}, {"tree", tree_to_json(u.tree)}});
        }
        out << doc.dump(2) << '\n';
        return;
    }
    for (const auto& u : loaded.units) {
        out << "== " << u.path << " (" << frontend::to_string(u.lang) << ") ==\n" << dump(u.tree);
    }
}

metrics::MetricsReport report_or_fail(const Loaded& loaded, std::ostream& err)
{
    try {
        return metrics::unit_report(loaded.units);
    } catch (const metrics::ReportError& e) {
        err << "error: " << e.what() << '\n';
        throw Failure{};
    }
}

void cmd_metrics(const CliConfig& config, std::ostream& out, std::ostream& err)
{
    const metrics::MetricsReport report = report_or_fail(load_inputs(config, err), err);
    if (config.format == Format::Json) {
        out << persistence::report_to_json(report).dump(2) << '\n';
        return;
    }
    if (config.format == Format::Csv) {
        out << "file,line,unit,function,cc,statements\n";
        for (const auto& f : report.functions) {
            out << csv_field(f.span.file) << ',' << f.span.line << ',' << csv_field(f.unit) << ','
                << csv_field(f.function) << ',' << f.cc << ',' << f.statements << '\n';
        }
        return;
    }
    std::vector<std::vector<std::string>> files;
    for (const auto& f : report.files) {
        files.push_back({f.path, std::string(frontend::to_string(f.lang)), std::to_string(f.loc.total),
                         std::to_string(f.loc.blank), std::to_string(f.loc.comment), std::to_string(f.loc.code)});
    }
    write_table(out, {"FILE", "LANG", "TOTAL", "BLANK", "COMMENT", "CODE"}, files,
                {false, false, true, true, true, true});
    out << '\n';
    std::vector<std::vector<std::string>> functions;
    for (const auto& f : report.functions) {
        functions.push_back({f.unit, f.function, std::to_string(f.cc), std::to_string(f.statements),
                             to_string(f.span)});
    }
    write_table(out, {"UNIT", "FUNCTION", "CC", "STATEMENTS", "LOCATION"}, functions,
                {false, false, true, true, false});
}

void cmd_callgraph(const CliConfig& config, std::ostream& out, std::ostream& err)
{
    const std::vector<Node> forest = forest_of(load_inputs(config, err));
    callgraph::CallGraph graph;
    try {
        graph = callgraph::build_call_graph(forest);
    } catch (const callgraph::CallGraphError& e) {
        err << "error: " << e.what() << '\n';
        throw Failure{};
    }
    const bool conv = config.conventional_edges;
    if (config.format == Format::Dot) {
        out << callgraph::callgraph_to_dot(graph, {conv});
        return;
    }
    if (config.format == Format::Json) {
        json nodes = json::array();
        for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
            const auto& n = graph.nodes[i];
            json j{{"id", i}, {"label", n.label()}, {"name", n.name}, {"external", n.external()}};
            if (!n.external()) {
                j["unit"] = n.unit;
                j["location"] = to_string(n.span);
            }
            nodes.push_back(std::move(j));
        }
        json edges = json::array();
        for (const auto& e : graph.edges) {
            edges.push_back({{"from", conv ? e.to : e.from},
                             {"to", conv ? e.from : e.to},
                             {"call_site", to_string(e.call_site)}});
        }
        out << json{{"direction", conv ? "caller->callee" : "callee->caller"},
                    {"nodes", std::move(nodes)},
                    {"edges", std::move(edges)}}
                   .dump(2)
            << '\n';
        return;
    }
    out << "nodes (" << graph.nodes.size() << "):\n";
    for (const auto& n : graph.nodes) {
        out << "  " << n.label() << '\n';
    }
    out << "edges (" << graph.edges.size() << ", " << (conv ? "caller -> callee" : "callee -> caller")
        << "):\n";
    for (const auto& e : graph.edges) {
        const auto& from = graph.nodes[conv ? e.to : e.from];
        const auto& to = graph.nodes[conv ? e.from : e.to];
        out << "  " << from.label() << " -> " << to.label() << "  (" << to_string(e.call_site) << ")\n";
    }
}

std::string path_string(const cfg::BasisPath& path)
{
    std::string text;
    for (cfg::NodeId n : path.nodes) {
        text += (text.empty() ? "n" : " -> n") + std::to_string(n);
    }
    return text;
}

void cmd_cfg(const CliConfig& config, std::ostream& out, std::ostream& err)
{
    const Loaded loaded = load_inputs(config, err);
    const std::string& wanted = *config.function;
    const Node* match = nullptr;
    std::string match_unit;
    std::vector<std::string> candidates;
    for (const auto& u : loaded.units) {
        const std::string unit = metrics::unit_name(u.tree);
        for (const Node* def : find_all(u.tree, UniversalKind::FunctionDef)) {
            const std::string name = metrics::function_name(*def);
            if (name == wanted || unit + "." + name == wanted) {
                match = def;
                match_unit = unit;
                candidates.push_back(unit + "." + name);
            }
        }
    }
    if (candidates.empty()) {
        err << "error: function '" << wanted << "' not found in the inputs\n";
        throw Failure{};
    }
    if (candidates.size() > 1) {
        err << "error: function '" << wanted << "' is ambiguous; use one of:";
        for (const auto& c : candidates) {
            err << ' ' << c;
        }
        err << '\n';
        throw Failure{};
    }

    const cfg::Cfg graph = cfg::build_ecfg(*match, match_unit);
    for (const auto& w : graph.warnings) {
        err << to_string(w.span) << ": warning: " << w.message << '\n';
    }
    const int cc = cfg::cc_from_cfg(graph);
    std::vector<cfg::BasisPath> paths;
    if (config.basis_paths) {
        paths = cfg::basis_paths(graph);
    }

    if (config.format == Format::Dot) {
        out << cfg::cfg_to_dot(graph);
        for (std::size_t i = 0; i < paths.size(); ++i) {
            out << "// basis path " << i + 1 << ": " << path_string(paths[i]) << '\n';
        }
        return;
    }
    if (config.format == Format::Json) {
        json nodes = json::array();
        for (const auto& n : graph.nodes) {
            json j{{"id", n.id}, {"role", cfg::to_string(n.role)}, {"label", cfg::node_label(graph, n.id)}};
            if (n.origin != nullptr) {
                j["location"] = to_string(n.origin->span());
            }
            nodes.push_back(std::move(j));
        }
        json edges = json::array();
        for (const auto& e : graph.edges) {
            edges.push_back({{"from", e.from}, {"to", e.to}, {"label", cfg::to_string(e.label)}});
        }
        json doc{{"unit", graph.unit}, {"function", graph.function}, {"cc", cc},
                 {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
        if (config.basis_paths) {
            json list = json::array();
            for (const auto& p : paths) {
                list.push_back(p.nodes);
            }
            doc["basis_paths"] = std::move(list);
        }
        out << doc.dump(2) << '\n';
        return;
    }
    out << "cfg " << graph.unit << '.' << graph.function << ": " << graph.nodes.size() << " nodes, "
        << graph.edges.size() << " edges, cc " << cc << '\n';
    for (const auto& n : graph.nodes) {
        out << "  n" << n.id << "  ";
        if (n.origin != nullptr) {
            out << std::left << std::setw(9) << cfg::to_string(n.role) << std::right << "  "
                << cfg::node_label(graph, n.id);
        } else {
            out << cfg::to_string(n.role);
        }
        out << '\n';
    }
    for (const auto& e : graph.edges) {
        out << "  n" << e.from << " -> n" << e.to << "  " << cfg::to_string(e.label) << '\n';
    }
    if (config.basis_paths) {
        out << "basis paths (" << paths.size() << "):\n";
        for (std::size_t i = 0; i < paths.size(); ++i) {
            out << "  " << i + 1 << ": " << path_string(paths[i]) << '\n';
        }
    }
}

std::string store_of(const CliConfig& config)
{
    if (config.store) {
        return *config.store;
    }
    if (const char* env = std::getenv("ECST_STORE"); env != nullptr && *env != '\0') {
        return env;
    }
    throw UsageError{"no snapshot store: pass --store or set ECST_STORE"};
}

void cmd_snapshot_save(const CliConfig& config, std::ostream& out, std::ostream& err)
{
    const std::string store = store_of(config);
    const Loaded loaded = load_inputs(config, err);
    persistence::Snapshot snap;
    try {
        snap = persistence::save_snapshot(store, *config.label, loaded.units);
    } catch (const persistence::StoreError& e) {
        err << "error: " << e.what() << '\n';
        throw Failure{};
    } catch (const metrics::ReportError& e) {
        err << "error: " << e.what() << '\n';
        throw Failure{};
    }
    if (config.format == Format::Json) {
        out << json{{"label", snap.label},
                    {"timestamp", snap.timestamp},
                    {"files", snap.report.files.size()},
                    {"functions", snap.report.functions.size()}}
                   .dump(2)
            << '\n';
        return;
    }
    out << "saved snapshot '" << snap.label << "' (" << snap.report.files.size() << " files, "
        << snap.report.functions.size() << " functions) to " << store << '\n';
}

void cmd_snapshot_diff(const CliConfig& config, std::ostream& out, std::ostream& err)
{
    if (config.inputs.size() != 2) {
        throw UsageError{"snapshot-diff takes exactly two labels"};
    }
    const std::string store = store_of(config);
    persistence::SnapshotDiff diff;
    try {
        diff = persistence::diff_snapshots(store, config.inputs[0], config.inputs[1]);
    } catch (const persistence::StoreError& e) {
        err << "error: " << e.what() << '\n';
        throw Failure{};
    }
    const auto qualified = [](const persistence::FunctionKey& k) { return k.first + "." + k.second; };
    if (config.format == Format::Json) {
        const auto keys = [](const std::vector<persistence::FunctionKey>& list) {
            json arr = json::array();
            for (const auto& k : list) {
                arr.push_back({{"unit", k.first}, {"function", k.second}});
            }
            return arr;
        };
        json changed = json::array();
        for (const auto& c : diff.changed) {
            changed.push_back({{"unit", c.key.first}, {"function", c.key.second}, {"before", c.before}, {"after", c.after}});
        }
        out << json{{"added", keys(diff.added)}, {"removed", keys(diff.removed)}, {"changed", std::move(changed)}}
                   .dump(2)
            << '\n';
        return;
    }
    if (config.format == Format::Csv) {
        out << "change,unit,function,cc_before,cc_after\n";
        for (const auto& k : diff.added) {
            out << "added," << csv_field(k.first) << ',' << csv_field(k.second) << ",,\n";
        }
        for (const auto& k : diff.removed) {
            out << "removed," << csv_field(k.first) << ',' << csv_field(k.second) << ",,\n";
        }
        for (const auto& c : diff.changed) {
            out << "changed," << csv_field(c.key.first) << ',' << csv_field(c.key.second) << ',' << c.before
                << ',' << c.after << '\n';
        }
        return;
    }
    if (diff.empty()) {
        out << "no differences\n";
        return;
    }
    for (const auto& k : diff.added) {
        out << "+ " << qualified(k) << '\n';
    }
    for (const auto& k : diff.removed) {
        out << "- " << qualified(k) << '\n';
    }
    for (const auto& c : diff.changed) {
        out << "~ " << qualified(c.key) << "  cc " << c.before << " -> " << c.after << '\n';
    }
}

void dispatch(const CliConfig& config, std::ostream& out, std::ostream& err)
{
    switch (config.command) {
    case Command::Parse: cmd_parse(config, out, err); break;
    case Command::Metrics: cmd_metrics(config, out, err); break;
    case Command::Callgraph: cmd_callgraph(config, out, err); break;
    case Command::Cfg: cmd_cfg(config, out, err); break;
    case Command::SnapshotSave: cmd_snapshot_save(config, out, err); break;
    case Command::SnapshotDiff: cmd_snapshot_diff(config, out, err); break;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Language-independent static analysis over enriched concrete syntax trees", "ecst"};
    app.require_subcommand(1);

    CliConfig config;
    std::string lang_text;
    std::string format_text = "table";

    const std::map<std::string, Format> formats{
        {"table", Format::Table}, {"json", Format::Json}, {"csv", Format::Csv}, {"dot", Format::Dot}};

    const auto add_common = [&](CLI::App* sub, bool files) {
        if (files) {
            sub->add_option("inputs", config.inputs, "Source files (.mod, .cls)")->required();
            sub->add_option("--lang", lang_text, "Force the input language (K or C)")
                ->check(CLI::IsMember({"K", "C", "LANG_K", "LANG_C", "k", "c"}));
        }
        sub->add_option("--format", format_text, "Output format (table, json, csv, dot)")
            ->check(CLI::IsMember({"table", "json", "csv", "dot"}));
        sub->add_option("--out", config.out, "Write results to this file");
    };

    std::map<CLI::App*, Command> commands;
    const auto add = [&](const char* name, const char* help, Command c, bool files) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, files);
        commands.emplace(sub, c);
        return sub;
    };

    add("parse", "Print the eCST of each input", Command::Parse, true);
    add("metrics", "Cyclomatic complexity and line counts", Command::Metrics, true);
    add("callgraph", "Call graph across compilation units", Command::Callgraph, true)
        ->add_flag("--conventional", config.conventional_edges, "Emit caller -> callee edges");
    CLI::App* cfg_cmd = add("cfg", "Control-flow graph of one function", Command::Cfg, true);
    cfg_cmd->add_option("--function", config.function, "Function name or unit.name")->required();
    cfg_cmd->add_flag("--basis-paths", config.basis_paths, "Also list a basis set of paths");
    CLI::App* save = add("snapshot-save", "Store trees and metrics under a label", Command::SnapshotSave, true);
    save->add_option("--label", config.label, "Snapshot label")->required();
    save->add_option("--store", config.store, "Store directory (default: $ECST_STORE)");
    CLI::App* diff = add("snapshot-diff", "Compare the metrics of two snapshots", Command::SnapshotDiff, false);
    diff->add_option("labels", config.inputs, "Two snapshot labels")->required()->expected(2);
    diff->add_option("--store", config.store, "Store directory (default: $ECST_STORE)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e, out, err);
        }
        err << "ecst: " << e.what() << "\nRun 'ecst --help' for usage.\n";
        return kExitUsage;
    }

    for (const auto& [sub, c] : commands) {
        if (sub->parsed()) {
            config.command = c;
        }
    }
    config.format = formats.at(format_text);
    if (!lang_text.empty()) {
        config.lang_override = frontend::parse_language(lang_text);
    }
    if (!format_allowed(config.command, config.format)) {
        err << "ecst: --format " << format_text << " is not available for '" << command_name(config.command)
            << "'\n";
        return kExitUsage;
    }

    std::ofstream file;
    std::ostream* sink = &out;
    if (config.out) {
        file.open(*config.out, std::ios::binary | std::ios::trunc);
        if (!file) {
            err << "ecst: cannot write " << *config.out << '\n';
            return kExitFailure;
        }
        sink = &file;
    }

    try {
        dispatch(config, *sink, err);
    } catch (const Failure&) {
        return kExitFailure;
    } catch (const UsageError& e) {
        err << "ecst: " << e.message << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace ecst::cli
