#include "ecst/callgraph.hpp"

#include "ecst/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace ecst::callgraph {

namespace {

using K = UniversalKind;

std::string callee_of(const Node& call)
{
    for (const Node& child : call.children()) {
        if (child.is(K::Name)) {
            if (const Node* token = first_token(child)) {
                return token->text();
            }
        }
    }
    throw ContractError("FUNCTION_CALL without NAME at " + to_string(call.span()));
}

std::string quoted(const std::string& text)
{
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::vector<FunctionRecord> collect_functions(std::span<const Node> forest)
{
    std::vector<FunctionRecord> records;
    std::map<std::pair<std::string, std::string>, SourceSpan> seen;
    for (const Node& root : forest) {
        const std::string unit = metrics::unit_name(root);
        for (const Node* def : find_all(root, K::FunctionDef)) {
            FunctionRecord record{unit, metrics::function_name(*def), def, def->span()};
            auto [it, inserted] = seen.emplace(std::pair{record.unit, record.name}, record.span);
            if (!inserted) {
                throw CallGraphError("duplicate function '" + record.qualified_name() + "' at " +
                                     to_string(it->second) + " and " + to_string(record.span));
            }
            records.push_back(std::move(record));
        }
    }
    return records;
}

Callee resolve_call(std::string_view callee_name, const FunctionRecord& caller,
                    std::span<const FunctionRecord> registry)
{
    std::vector<std::size_t> foreign;
    for (std::size_t i = 0; i < registry.size(); ++i) {
        if (registry[i].name != callee_name) {
            continue;
        }
        if (registry[i].unit == caller.unit) {
            return i;
        }
        foreign.push_back(i);
    }
    if (foreign.size() == 1) {
        return foreign.front();
    }
    if (foreign.empty()) {
        return ExternalCallee{std::string(callee_name)};
    }
    std::string candidates;
    for (std::size_t i : foreign) {
        candidates += (candidates.empty() ? "" : ", ") + registry[i].qualified_name();
    }
    throw CallGraphError("ambiguous call of '" + std::string(callee_name) + "' from " +
                         caller.qualified_name() + ": candidates " + candidates);
}

std::string GraphNode::label() const { return external() ? "extern:" + name : unit + "." + name; }

std::size_t CallGraph::find(std::string_view label) const
{
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].label() == label) {
            return i;
        }
    }
    return static_cast<std::size_t>(-1);
}

CallGraph build_call_graph(std::span<const Node> forest)
{
    std::vector<FunctionRecord> registry = collect_functions(forest);
    std::sort(registry.begin(), registry.end(), [](const FunctionRecord& a, const FunctionRecord& b) {
        return std::tie(a.unit, a.name) < std::tie(b.unit, b.name);
    });

    struct PendingEdge {
        Callee callee;
        std::size_t caller;
        SourceSpan site;
    };
    std::vector<PendingEdge> pending;
    std::set<std::string> externals;
    for (std::size_t caller = 0; caller < registry.size(); ++caller) {
        for (const Node* call : find_all(*registry[caller].def, K::FunctionCall)) {
            Callee callee = resolve_call(callee_of(*call), registry[caller], registry);
            if (const auto* ext = std::get_if<ExternalCallee>(&callee)) {
                externals.insert(ext->name);
            }
            pending.push_back({std::move(callee), caller, call->span()});
        }
    }

    CallGraph graph;
    for (const FunctionRecord& r : registry) {
        graph.nodes.push_back({r.unit, r.name, r.def, r.span});
    }
    std::map<std::string, NodeId> external_ids;
    for (const std::string& name : externals) {
        external_ids.emplace(name, graph.nodes.size());
        graph.nodes.push_back({"", name, nullptr, {}});
    }

    for (PendingEdge& p : pending) {
        const NodeId from = std::holds_alternative<std::size_t>(p.callee)
                                ? std::get<std::size_t>(p.callee)
                                : external_ids.at(std::get<ExternalCallee>(p.callee).name);
        graph.edges.push_back({from, p.caller, std::move(p.site)});
    }
    std::sort(graph.edges.begin(), graph.edges.end());
    graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end()), graph.edges.end());
    return graph;
}

std::string callgraph_to_dot(const CallGraph& graph, DotOptions options)
{
    std::ostringstream os;
    os << "digraph callgraph {\n";
    os << "  rankdir=LR;\n";
    os << "  node [shape=box];\n";
    for (const GraphNode& node : graph.nodes) {
        os << "  " << quoted(node.label());
        if (node.external()) {
            os << " [style=dashed]";
        }
        os << ";\n";
    }
    for (const Edge& edge : graph.edges) {
        const auto& from = graph.nodes[options.conventional ? edge.to : edge.from];
        const auto& to = graph.nodes[options.conventional ? edge.from : edge.to];
        os << "  " << quoted(from.label()) << " -> " << quoted(to.label()) << " [tooltip="
           << quoted(to_string(edge.call_site)) << "];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace ecst::callgraph
