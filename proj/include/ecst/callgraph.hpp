// Call graph linking compilation units through FUNCTION_DEF / FUNCTION_CALL.
//
// Edges point from callee to caller: when A's body calls B, the graph holds
// the edge B -> A. Emitters can invert this for conventional viewers.
#pragma once

#include "ecst/node.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ecst::callgraph {

struct FunctionRecord {
    std::string unit;
    std::string name;
    const Node* def = nullptr;
    SourceSpan span;

    std::string qualified_name() const { return unit + "." + name; }
};

/// Duplicate (unit, name) or an ambiguous cross-unit call.
class CallGraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One record per FUNCTION_DEF, in forest then source order.
std::vector<FunctionRecord> collect_functions(std::span<const Node> forest);

/// Callee with no definition anywhere in the forest.
struct ExternalCallee {
    std::string name;
    friend bool operator==(const ExternalCallee&, const ExternalCallee&) = default;
};

/// Index into the registry, or an external name.
using Callee = std::variant<std::size_t, ExternalCallee>;

/// Same-unit match first, then a unique match in another unit; several
/// foreign matches are an error; no match yields an external callee.
Callee resolve_call(std::string_view callee_name, const FunctionRecord& caller,
                    std::span<const FunctionRecord> registry);

using NodeId = std::size_t;

struct GraphNode {
    std::string unit;  // empty for externals
    std::string name;
    const Node* def = nullptr;  // nullptr for externals
    SourceSpan span;

    bool external() const { return def == nullptr; }
    /// "unit.name", or "extern:name" for externals.
    std::string label() const;
};

struct Edge {
    NodeId from;
    NodeId to;
    SourceSpan call_site;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct CallGraph {
    /// Defined functions sorted by (unit, name), then externals sorted by name.
    std::vector<GraphNode> nodes;
    /// Sorted by (from, to, call_site).
    std::vector<Edge> edges;

    std::size_t find(std::string_view label) const;
};

/// Every FUNCTION_CALL inside every FUNCTION_DEF yields one callee -> caller
/// edge. Node numbering is independent of forest order.
CallGraph build_call_graph(std::span<const Node> forest);

struct DotOptions {
    /// Emit caller -> callee instead of the stored callee -> caller.
    bool conventional = false;
};

std::string callgraph_to_dot(const CallGraph& graph, DotOptions options = {});

}  // namespace ecst::callgraph
