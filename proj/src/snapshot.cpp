#include "ecst/persistence.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

namespace ecst::persistence {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Exclusive advisory lock on `<store>/.lock`, held for the object's lifetime.
class StoreLock {
public:
    explicit StoreLock(const fs::path& store)
    {
        const fs::path lock = store / ".lock";
        fd_ = ::open(lock.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0) {
            throw StoreError("cannot open lock file " + lock.string());
        }
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw StoreError("cannot lock " + lock.string());
        }
    }
    ~StoreLock()
    {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    StoreLock(const StoreLock&) = delete;
    StoreLock& operator=(const StoreLock&) = delete;

private:
    int fd_ = -1;
};

void validate_label(const std::string& label)
{
    const bool ok = !label.empty() && label != "." && label != ".." &&
                    std::all_of(label.begin(), label.end(), [](unsigned char c) {
                        return std::isalnum(c) || c == '.' || c == '_' || c == '-';
                    });
    if (!ok) {
        throw StoreError("invalid snapshot label '" + label + "' (use letters, digits, '.', '_', '-')");
    }
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw StoreError("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content)
{
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw StoreError("cannot write " + tmp.string());
        }
        out << content;
        if (!out.flush()) {
            throw StoreError("cannot write " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw StoreError("cannot write " + path.string() + ": " + ec.message());
    }
}

json read_index(const fs::path& store)
{
    const fs::path index = store / "index.json";
    if (!fs::exists(index)) {
        return json{{"version", 1}, {"snapshots", json::array()}};
    }
    try {
        json doc = json::parse(read_file(index));
        if (!doc.contains("snapshots") || !doc["snapshots"].is_array()) {
            throw StoreError("corrupt index " + index.string());
        }
        return doc;
    } catch (const json::exception& e) {
        throw StoreError("corrupt index " + index.string() + ": " + e.what());
    }
}

const json* find_entry(const json& index, const std::string& label)
{
    for (const json& entry : index["snapshots"]) {
        if (entry.value("label", "") == label) {
            return &entry;
        }
    }
    return nullptr;
}

std::map<FunctionKey, int> cc_by_key(const metrics::MetricsReport& report)
{
    std::map<FunctionKey, int> out;
    for (const auto& f : report.functions) {
        out.emplace(FunctionKey{f.unit, f.function}, f.cc);
    }
    return out;
}

}  // namespace

json report_to_json(const metrics::MetricsReport& report)
{
    json files = json::array();
    for (const auto& f : report.files) {
        files.push_back({{"path", f.path},
                         {"lang", frontend::to_string(f.lang)},
                         {"loc",
                          {{"total", f.loc.total},
                           {"blank", f.loc.blank},
                           {"comment", f.loc.comment},
                           {"code", f.loc.code}}}});
    }
    json functions = json::array();
    for (const auto& f : report.functions) {
        functions.push_back({{"unit", f.unit},
                             {"function", f.function},
                             {"cc", f.cc},
                             {"statements", f.statements},
                             {"file", f.span.file},
                             {"line", f.span.line},
                             {"column", f.span.column}});
    }
    return {{"files", std::move(files)}, {"functions", std::move(functions)}};
}

metrics::MetricsReport report_from_json(const json& doc)
{
    metrics::MetricsReport report;
    try {
        for (const json& f : doc.at("files")) {
            const auto lang = frontend::parse_language(f.at("lang").get<std::string>());
            if (!lang) {
                throw StoreError("unknown lang in metrics document");
            }
            const json& loc = f.at("loc");
            report.files.push_back({f.at("path").get<std::string>(),
                                    *lang,
                                    {loc.at("total").get<int>(), loc.at("blank").get<int>(),
                                     loc.at("comment").get<int>(), loc.at("code").get<int>()}});
        }
        for (const json& f : doc.at("functions")) {
            report.functions.push_back({f.at("unit").get<std::string>(),
                                        f.at("function").get<std::string>(),
                                        f.at("cc").get<int>(),
                                        f.at("statements").get<int>(),
                                        {f.at("file").get<std::string>(), f.at("line").get<int>(),
                                         f.at("column").get<int>()}});
        }
    } catch (const json::exception& e) {
        throw StoreError(std::string("malformed metrics document: ") + e.what());
    }
    return report;
}

Snapshot save_snapshot(const fs::path& store, const std::string& label,
                       const std::vector<metrics::ParsedUnit>& units,
                       std::optional<std::int64_t> timestamp)
{
    validate_label(label);
    std::error_code ec;
    fs::create_directories(store / "snapshots", ec);
    if (ec) {
        throw StoreError("store " + store.string() + " is not writable: " + ec.message());
    }

    const StoreLock lock(store);
    json index = read_index(store);
    const fs::path dir = store / "snapshots" / label;
    if (find_entry(index, label) != nullptr || fs::exists(dir)) {
        throw StoreError("snapshot '" + label + "' already exists in " + store.string());
    }

    Snapshot snapshot;
    snapshot.label = label;
    snapshot.timestamp = timestamp.value_or(std::chrono::duration_cast<std::chrono::seconds>(
                                                std::chrono::system_clock::now().time_since_epoch())
                                                .count());
    snapshot.report = metrics::unit_report(units);

    std::set<std::string> basenames;
    std::vector<std::pair<std::string, std::string>> xml_docs;
    for (const auto& unit : units) {
        const std::string xml_name = fs::path(unit.path).filename().string() + ".ecst.xml";
        if (!basenames.insert(xml_name).second) {
            throw StoreError("two inputs share the file name '" + fs::path(unit.path).filename().string() +
                             "'; snapshot tree files are keyed by basename");
        }
        snapshot.tree_files.emplace_back(unit.path, "snapshots/" + label + "/" + xml_name);
        xml_docs.emplace_back(xml_name, ecst_to_xml(unit.tree, unit.lang));
    }
    std::sort(snapshot.tree_files.begin(), snapshot.tree_files.end());

    fs::create_directories(dir, ec);
    if (ec) {
        throw StoreError("cannot create " + dir.string() + ": " + ec.message());
    }
    for (const auto& [name, xml] : xml_docs) {
        write_file(dir / name, xml);
    }
    write_file(dir / "metrics.json", report_to_json(snapshot.report).dump(2) + "\n");

    json tree_files = json::array();
    for (const auto& [source, xml] : snapshot.tree_files) {
        tree_files.push_back({{"source", source}, {"xml", xml}});
    }
    index["snapshots"].push_back(
        {{"label", label}, {"timestamp", snapshot.timestamp}, {"tree_files", std::move(tree_files)}});
    write_file(store / "index.json", index.dump(2) + "\n");
    return snapshot;
}

Snapshot load_snapshot(const fs::path& store, const std::string& label)
{
    const json index = read_index(store);
    const json* entry = find_entry(index, label);
    if (entry == nullptr) {
        throw StoreError("unknown snapshot '" + label + "' in " + store.string());
    }
    Snapshot snapshot;
    snapshot.label = label;
    try {
        snapshot.timestamp = entry->at("timestamp").get<std::int64_t>();
        for (const json& tf : entry->value("tree_files", json::array())) {
            snapshot.tree_files.emplace_back(tf.at("source").get<std::string>(), tf.at("xml").get<std::string>());
        }
        snapshot.report = report_from_json(
            json::parse(read_file(store / "snapshots" / label / "metrics.json")));
    } catch (const json::exception& e) {
        throw StoreError("corrupt snapshot '" + label + "': " + e.what());
    }
    return snapshot;
}

std::vector<std::string> list_snapshots(const fs::path& store)
{
    std::vector<std::string> labels;
    const json index = read_index(store);
    for (const json& entry : index["snapshots"]) {
        labels.push_back(entry.value("label", ""));
    }
    return labels;
}

SnapshotDiff diff_reports(const metrics::MetricsReport& before, const metrics::MetricsReport& after)
{
    const auto a = cc_by_key(before);
    const auto b = cc_by_key(after);
    SnapshotDiff diff;
    for (const auto& [key, cc] : b) {
        const auto it = a.find(key);
        if (it == a.end()) {
            diff.added.push_back(key);
        } else if (it->second != cc) {
            diff.changed.push_back({key, it->second, cc});
        }
    }
    for (const auto& [key, cc] : a) {
        if (!b.contains(key)) {
            diff.removed.push_back(key);
        }
    }
    return diff;
}

SnapshotDiff diff_snapshots(const fs::path& store, const std::string& label_a, const std::string& label_b)
{
    return diff_reports(load_snapshot(store, label_a).report, load_snapshot(store, label_b).report);
}

}  // namespace ecst::persistence
