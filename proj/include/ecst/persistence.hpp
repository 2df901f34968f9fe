// XML serialization of eCSTs and the on-disk snapshot store used to keep
// metric history.
//
// Store layout:
//   <store>/index.json                       label -> timestamp, tree files
//   <store>/snapshots/<label>/metrics.json   MetricsReport
//   <store>/snapshots/<label>/<basename>.ecst.xml
#pragma once

#include "ecst/frontend.hpp"
#include "ecst/metrics.hpp"
#include "ecst/node.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ecst::persistence {

/// Malformed, wrong-version or unknown-vocabulary XML. `what()` carries the
/// line and column of the problem.
class LoadError : public std::runtime_error {
public:
    LoadError(int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Duplicate or unknown label, unwritable store, corrupt index.
class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Element-per-node document:
///   <ecst version="1" lang="LANG_K">
///     <node kind="..." [polarity="..."]> ... </node>
///     <token text="..." line="N" col="N"/>
/// Two-space indentation, fixed attribute order, byte-deterministic.
std::string ecst_to_xml(const Node& tree, frontend::LanguageId lang);

struct LoadedTree {
    Node tree;
    frontend::LanguageId lang;
};

/// Inverse of ecst_to_xml. `file` is recorded in every rebuilt span.
LoadedTree xml_to_ecst(std::string_view doc, std::string_view file = {});

nlohmann::json report_to_json(const metrics::MetricsReport& report);
metrics::MetricsReport report_from_json(const nlohmann::json& doc);

struct Snapshot {
    std::string label;
    std::int64_t timestamp = 0;  // UTC seconds
    metrics::MetricsReport report;
    /// (source path, XML path relative to the store)
    std::vector<std::pair<std::string, std::string>> tree_files;
};

/// Appends a snapshot under `label`. Concurrent writers on one store are
/// serialized through an exclusive lock on `<store>/.lock`.
Snapshot save_snapshot(const std::filesystem::path& store, const std::string& label,
                       const std::vector<metrics::ParsedUnit>& units,
                       std::optional<std::int64_t> timestamp = std::nullopt);

Snapshot load_snapshot(const std::filesystem::path& store, const std::string& label);

/// Labels in insertion order.
std::vector<std::string> list_snapshots(const std::filesystem::path& store);

/// (unit, name)
using FunctionKey = std::pair<std::string, std::string>;

struct CcChange {
    FunctionKey key;
    int before = 0;
    int after = 0;

    friend bool operator==(const CcChange&, const CcChange&) = default;
};

struct SnapshotDiff {
    std::vector<FunctionKey> added;
    std::vector<FunctionKey> removed;
    std::vector<CcChange> changed;

    bool empty() const { return added.empty() && removed.empty() && changed.empty(); }
    friend bool operator==(const SnapshotDiff&, const SnapshotDiff&) = default;
};

/// Keys are sorted; a key lands in at most one list.
SnapshotDiff diff_reports(const metrics::MetricsReport& before, const metrics::MetricsReport& after);

SnapshotDiff diff_snapshots(const std::filesystem::path& store, const std::string& label_a,
                            const std::string& label_b);

}  // namespace ecst::persistence
