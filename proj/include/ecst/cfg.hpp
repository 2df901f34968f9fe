// Enriched control-flow graph (eCFG) built from a function's eCST.
//
// One node per statement and one PREDICATE node per CONDITION. Loop
// polarity is consumed here: the predicate keeps its source form and the
// TRUE/FALSE edges are routed according to what the condition means.
#pragma once

#include "ecst/node.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace ecst::cfg {

enum class Role { Entry, Exit, Statement, Predicate };
enum class EdgeLabel { Seq, True, False };

std::string_view to_string(Role role);
std::string_view to_string(EdgeLabel label);

using NodeId = std::size_t;

struct CfgNode {
    NodeId id = 0;
    Role role = Role::Statement;
    /// Statement or CONDITION node of the source tree; nullptr for ENTRY/EXIT.
    const Node* origin = nullptr;
};

struct CfgEdge {
    NodeId from = 0;
    NodeId to = 0;
    EdgeLabel label = EdgeLabel::Seq;

    friend bool operator==(const CfgEdge&, const CfgEdge&) = default;
};

struct Warning {
    SourceSpan span;
    std::string message;
};

struct Cfg {
    std::string unit;
    std::string function;
    std::vector<CfgNode> nodes;  // nodes[i].id == i
    std::vector<CfgEdge> edges;
    /// Statements that no path reaches (e.g. after RETURN); they get no node.
    std::vector<Warning> warnings;

    NodeId entry() const { return 0; }
    NodeId exit() const { return 1; }
};

/// Throws ContractError unless `function_def` is a FUNCTION_DEF.
Cfg build_ecfg(const Node& function_def, std::string unit = {});

/// Throws ContractError when the degree/reachability contract is broken.
void validate(const Cfg& cfg);

/// E - N + 2.
int cc_from_cfg(const Cfg& cfg);

struct BasisPath {
    std::vector<NodeId> nodes;
    /// Indices into Cfg::edges, one per step.
    std::vector<std::size_t> edges;
};

/// Baseline method: the first path prefers TRUE at every predicate; each
/// later path flips one predicate not yet flipped, at its first occurrence,
/// in path order. A predicate met again on the same path takes the branch
/// closest to EXIT, which bounds every loop to one extra traversal.
/// A flip that is linearly dependent on earlier paths is dropped, and the
/// set is topped up from shortest-to-EXIT tree paths so that exactly
/// E - N + 2 independent paths come back.
std::vector<BasisPath> basis_paths(const Cfg& cfg);

/// Short human label of a node ("ENTRY", "x := 1 ;", "(i > j)").
std::string node_label(const Cfg& cfg, NodeId id);

std::string cfg_to_dot(const Cfg& cfg);

}  // namespace ecst::cfg
