#include "ecst/cfg.hpp"

#include "ecst/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace ecst::cfg {

namespace {

using K = UniversalKind;

struct Pending {
    NodeId from;
    EdgeLabel label;
};

using PendingList = std::vector<Pending>;

bool is_statement(const Node& node)
{
    return node.is(K::AssignStatement) || node.is(K::FunctionCall) || node.is(K::ReturnStatement) ||
           node.is(K::BranchStatement) || node.is(K::LoopStatement) || node.is(K::StatementBlock);
}

const Node& only_child(const Node& node, UniversalKind kind)
{
    for (const Node& child : node.children()) {
        if (child.is(kind)) {
            return child;
        }
    }
    throw ContractError(std::string(to_string(*node.kind())) + " at " + to_string(node.span()) +
                        " lacks " + std::string(to_string(kind)));
}

EdgeLabel opposite(EdgeLabel label) { return label == EdgeLabel::True ? EdgeLabel::False : EdgeLabel::True; }

class Builder {
public:
    explicit Builder(Cfg& cfg) : cfg_(cfg) {}

    void build(const Node& body)
    {
        add(Role::Entry, nullptr);
        add(Role::Exit, nullptr);
        PendingList end = block(body, {{cfg_.entry(), EdgeLabel::Seq}});
        connect(end, cfg_.exit());
    }

private:
    NodeId add(Role role, const Node* origin)
    {
        const NodeId id = cfg_.nodes.size();
        cfg_.nodes.push_back({id, role, origin});
        return id;
    }

    void connect(const PendingList& preds, NodeId to)
    {
        for (const Pending& p : preds) {
            cfg_.edges.push_back({p.from, to, p.label});
        }
    }

    PendingList block(const Node& sb, PendingList preds)
    {
        for (const Node& child : sb.children()) {
            if (child.is_token() || !is_statement(child)) {
                continue;
            }
            if (preds.empty()) {
                if (!child.is(K::StatementBlock) || count_statements(child) > 0) {
                    cfg_.warnings.push_back({child.span(), "unreachable statement"});
                }
                continue;
            }
            preds = statement(child, std::move(preds));
        }
        return preds;
    }

    static std::size_t count_statements(const Node& sb)
    {
        std::size_t n = 0;
        for (const Node& child : sb.children()) {
            if (!child.is_token() && is_statement(child)) {
                ++n;
            }
        }
        return n;
    }

    PendingList statement(const Node& stmt, PendingList preds)
    {
        if (stmt.is(K::StatementBlock)) {
            return block(stmt, std::move(preds));
        }
        if (stmt.is(K::BranchStatement)) {
            return branch(stmt, preds);
        }
        if (stmt.is(K::LoopStatement)) {
            return loop(stmt, std::move(preds));
        }
        const NodeId n = add(Role::Statement, &stmt);
        connect(preds, n);
        if (stmt.is(K::ReturnStatement)) {
            cfg_.edges.push_back({n, cfg_.exit(), EdgeLabel::Seq});
            return {};
        }
        return {{n, EdgeLabel::Seq}};
    }

    PendingList branch(const Node& stmt, const PendingList& preds)
    {
        const NodeId p = add(Role::Predicate, &only_child(stmt, K::Condition));
        connect(preds, p);
        std::vector<const Node*> arms;
        for (const Node& child : stmt.children()) {
            if (child.is(K::Branch)) {
                arms.push_back(&only_child(child, K::StatementBlock));
            }
        }
        if (arms.empty()) {
            throw ContractError("BRANCH_STATEMENT without BRANCH at " + to_string(stmt.span()));
        }
        PendingList out = block(*arms[0], {{p, EdgeLabel::True}});
        PendingList other = arms.size() > 1 ? block(*arms[1], {{p, EdgeLabel::False}})
                                            : PendingList{{p, EdgeLabel::False}};
        out.insert(out.end(), other.begin(), other.end());
        return out;
    }

    PendingList loop(const Node& stmt, PendingList preds)
    {
        const Node* cond = nullptr;
        const Node* body = nullptr;
        for (const Node& child : stmt.children()) {
            if (child.is(K::Condition)) {
                cond = &child;
            } else if (child.is(K::StatementBlock)) {
                body = &child;
            }
            if (cond != nullptr && body == nullptr) {
                break;
            }
        }
        if (cond == nullptr) {
            throw ContractError("LOOP_STATEMENT without CONDITION at " + to_string(stmt.span()));
        }
        const bool pre_tested = body == nullptr;
        if (pre_tested) {
            body = &only_child(stmt, K::StatementBlock);
        }
        const EdgeLabel stay = cond->polarity().value_or(ConditionPolarity::ContinueWhenTrue) ==
                                       ConditionPolarity::ContinueWhenTrue
                                   ? EdgeLabel::True
                                   : EdgeLabel::False;

        if (pre_tested) {
            const NodeId p = add(Role::Predicate, cond);
            connect(preds, p);
            connect(block(*body, {{p, stay}}), p);
            return {{p, opposite(stay)}};
        }

        const NodeId first_body_node = cfg_.nodes.size();
        PendingList body_end = block(*body, std::move(preds));
        if (body_end.empty()) {
            cfg_.warnings.push_back({cond->span(), "unreachable loop condition"});
            return {};
        }
        const NodeId p = add(Role::Predicate, cond);
        connect(body_end, p);
        const NodeId head = first_body_node < p ? first_body_node : p;
        cfg_.edges.push_back({p, head, stay});
        return {{p, opposite(stay)}};
    }

    Cfg& cfg_;
};

std::vector<std::vector<std::size_t>> out_edges(const Cfg& cfg)
{
    std::vector<std::vector<std::size_t>> out(cfg.nodes.size());
    for (std::size_t i = 0; i < cfg.edges.size(); ++i) {
        out[cfg.edges[i].from].push_back(i);
    }
    return out;
}

/// Edge count on the shortest walk to EXIT, per node.
std::vector<std::size_t> distance_to_exit(const Cfg& cfg)
{
    constexpr auto kInf = std::numeric_limits<std::size_t>::max();
    std::vector<std::vector<NodeId>> preds(cfg.nodes.size());
    for (const CfgEdge& e : cfg.edges) {
        preds[e.to].push_back(e.from);
    }
    std::vector<std::size_t> dist(cfg.nodes.size(), kInf);
    std::deque<NodeId> queue{cfg.exit()};
    dist[cfg.exit()] = 0;
    while (!queue.empty()) {
        const NodeId n = queue.front();
        queue.pop_front();
        for (NodeId p : preds[n]) {
            if (dist[p] == kInf) {
                dist[p] = dist[n] + 1;
                queue.push_back(p);
            }
        }
    }
    return dist;
}

std::string escaped(const std::string& text)
{
    std::string out;
    for (char c : text) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out;
}

}  // namespace

std::string_view to_string(Role role)
{
    switch (role) {
    case Role::Entry: return "ENTRY";
    case Role::Exit: return "EXIT";
    case Role::Statement: return "STATEMENT";
    case Role::Predicate: return "PREDICATE";
    }
    return "?";
}

std::string_view to_string(EdgeLabel label)
{
    switch (label) {
    case EdgeLabel::Seq: return "SEQ";
    case EdgeLabel::True: return "TRUE";
    case EdgeLabel::False: return "FALSE";
    }
    return "?";
}

Cfg build_ecfg(const Node& function_def, std::string unit)
{
    if (!function_def.is(K::FunctionDef)) {
        throw ContractError("build_ecfg expects a FUNCTION_DEF");
    }
    Cfg cfg;
    cfg.unit = std::move(unit);
    cfg.function = metrics::function_name(function_def);
    Builder(cfg).build(only_child(function_def, K::StatementBlock));
    return cfg;
}

void validate(const Cfg& cfg)
{
    if (cfg.nodes.size() < 2 || cfg.nodes[0].role != Role::Entry || cfg.nodes[1].role != Role::Exit) {
        throw ContractError("cfg must start with ENTRY and EXIT");
    }
    const auto out = out_edges(cfg);
    for (const CfgNode& node : cfg.nodes) {
        const auto& edges = out[node.id];
        const std::string where = "cfg node " + std::to_string(node.id);
        switch (node.role) {
        case Role::Exit:
            if (!edges.empty()) {
                throw ContractError(where + ": EXIT has outgoing edges");
            }
            break;
        case Role::Predicate: {
            std::multiset<EdgeLabel> labels;
            for (std::size_t e : edges) {
                labels.insert(cfg.edges[e].label);
            }
            if (labels != std::multiset<EdgeLabel>{EdgeLabel::True, EdgeLabel::False}) {
                throw ContractError(where + ": predicate needs one TRUE and one FALSE edge");
            }
            break;
        }
        default:
            if (edges.size() != 1 || cfg.edges[edges[0]].label != EdgeLabel::Seq) {
                throw ContractError(where + ": needs exactly one SEQ edge");
            }
            break;
        }
        if (node.role == Role::Entry && node.id != cfg.entry()) {
            throw ContractError(where + ": second ENTRY");
        }
        if (node.role == Role::Exit && node.id != cfg.exit()) {
            throw ContractError(where + ": second EXIT");
        }
    }

    std::vector<bool> seen(cfg.nodes.size(), false);
    std::vector<NodeId> stack{cfg.entry()};
    seen[cfg.entry()] = true;
    while (!stack.empty()) {
        const NodeId n = stack.back();
        stack.pop_back();
        for (std::size_t e : out[n]) {
            if (!seen[cfg.edges[e].to]) {
                seen[cfg.edges[e].to] = true;
                stack.push_back(cfg.edges[e].to);
            }
        }
    }
    const auto dist = distance_to_exit(cfg);
    for (NodeId n = 0; n < cfg.nodes.size(); ++n) {
        if (!seen[n]) {
            throw ContractError("cfg node " + std::to_string(n) + " unreachable from ENTRY");
        }
        if (dist[n] == std::numeric_limits<std::size_t>::max()) {
            throw ContractError("EXIT unreachable from cfg node " + std::to_string(n));
        }
    }
}

int cc_from_cfg(const Cfg& cfg)
{
    validate(cfg);
    return static_cast<int>(cfg.edges.size()) - static_cast<int>(cfg.nodes.size()) + 2;
}

namespace {

// Incremental Gaussian elimination over edge-traversal counts.
class RankTracker {
public:
    explicit RankTracker(std::size_t width) : width_(width) {}

    bool add(const BasisPath& path)
    {
        std::vector<double> v(width_, 0.0);
        for (std::size_t e : path.edges) {
            v[e] += 1.0;
        }
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const double f = v[pivots_[i]];
            if (f != 0.0) {
                for (std::size_t c = 0; c < width_; ++c) {
                    v[c] -= f * rows_[i][c];
                }
            }
        }
        for (std::size_t c = 0; c < width_; ++c) {
            if (std::abs(v[c]) > 1e-9) {
                const double p = v[c];
                for (double& x : v) {
                    x /= p;
                }
                rows_.push_back(std::move(v));
                pivots_.push_back(c);
                return true;
            }
        }
        return false;
    }

private:
    std::size_t width_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::size_t> pivots_;
};

// One path per edge off the shortest-to-EXIT tree: BFS prefix to the edge's
// source, the edge, then tree edges to EXIT. Together with the tree path
// from ENTRY these span every ENTRY->EXIT walk.
std::vector<BasisPath> fundamental_paths(const Cfg& cfg, const std::vector<std::vector<std::size_t>>& out,
                                         const std::vector<std::size_t>& dist)
{
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> tree(cfg.nodes.size(), none);
    for (NodeId n = 0; n < cfg.nodes.size(); ++n) {
        for (std::size_t e : out[n]) {
            if (tree[n] == none || dist[cfg.edges[e].to] < dist[cfg.edges[tree[n]].to]) {
                tree[n] = e;
            }
        }
    }
    std::vector<std::size_t> parent(cfg.nodes.size(), none);
    std::vector<std::size_t> depth(cfg.nodes.size(), none);
    std::deque<NodeId> queue{cfg.entry()};
    depth[cfg.entry()] = 0;
    while (!queue.empty()) {
        const NodeId n = queue.front();
        queue.pop_front();
        for (std::size_t e : out[n]) {
            const NodeId to = cfg.edges[e].to;
            if (depth[to] == none) {
                depth[to] = depth[n] + 1;
                parent[to] = e;
                queue.push_back(to);
            }
        }
    }
    std::vector<std::size_t> off_tree;
    for (std::size_t e = 0; e < cfg.edges.size(); ++e) {
        if (tree[cfg.edges[e].from] != e) {
            off_tree.push_back(e);
        }
    }
    std::stable_sort(off_tree.begin(), off_tree.end(), [&](std::size_t a, std::size_t b) {
        return depth[cfg.edges[a].from] < depth[cfg.edges[b].from];
    });

    std::vector<BasisPath> paths;
    for (std::size_t e : off_tree) {
        BasisPath path;
        for (NodeId n = cfg.edges[e].from; n != cfg.entry(); n = cfg.edges[parent[n]].from) {
            path.edges.push_back(parent[n]);
        }
        std::reverse(path.edges.begin(), path.edges.end());
        path.edges.push_back(e);
        for (NodeId n = cfg.edges[e].to; n != cfg.exit(); n = cfg.edges[tree[n]].to) {
            path.edges.push_back(tree[n]);
        }
        path.nodes.push_back(cfg.entry());
        for (std::size_t step : path.edges) {
            path.nodes.push_back(cfg.edges[step].to);
        }
        paths.push_back(std::move(path));
    }
    return paths;
}

}  // namespace

std::vector<BasisPath> basis_paths(const Cfg& cfg)
{
    validate(cfg);
    const auto out = out_edges(cfg);
    const auto dist = distance_to_exit(cfg);
    const std::size_t step_limit = 4 * (cfg.nodes.size() + cfg.edges.size()) + 8;

    const auto edge_with = [&](NodeId n, EdgeLabel label) {
        for (std::size_t e : out[n]) {
            if (cfg.edges[e].label == label) {
                return e;
            }
        }
        throw ContractError("missing edge");
    };

    // Walks from the path's last node to EXIT. `first` holds the decision
    // taken at each predicate's first visit on this path.
    const auto complete = [&](BasisPath path, std::map<NodeId, EdgeLabel> first) {
        while (path.nodes.back() != cfg.exit()) {
            if (path.edges.size() > step_limit) {
                throw ContractError("basis path does not terminate");
            }
            const NodeId n = path.nodes.back();
            std::size_t e = 0;
            if (cfg.nodes[n].role != Role::Predicate) {
                e = out[n].front();
            } else if (auto it = first.find(n); it == first.end()) {
                e = edge_with(n, EdgeLabel::True);
                first.emplace(n, EdgeLabel::True);
            } else {
                const std::size_t again = edge_with(n, opposite(it->second));
                const std::size_t same = edge_with(n, it->second);
                e = dist[cfg.edges[same].to] < dist[cfg.edges[again].to] ? same : again;
            }
            path.edges.push_back(e);
            path.nodes.push_back(cfg.edges[e].to);
        }
        return path;
    };

    std::vector<BasisPath> paths;
    RankTracker rank(cfg.edges.size());
    paths.push_back(complete(BasisPath{{cfg.entry()}, {}}, {}));
    rank.add(paths.back());
    std::set<NodeId> flipped;
    for (std::size_t k = 0; k < paths.size(); ++k) {
        std::set<NodeId> visited;
        for (std::size_t i = 0; i + 1 < paths[k].nodes.size(); ++i) {
            const NodeId n = paths[k].nodes[i];
            if (cfg.nodes[n].role != Role::Predicate || !visited.insert(n).second) {
                continue;
            }
            if (!flipped.insert(n).second) {
                continue;
            }
            BasisPath prefix;
            std::map<NodeId, EdgeLabel> first;
            for (std::size_t j = 0; j < i; ++j) {
                const NodeId m = paths[k].nodes[j];
                if (cfg.nodes[m].role == Role::Predicate) {
                    first.emplace(m, cfg.edges[paths[k].edges[j]].label);
                }
                prefix.nodes.push_back(m);
                prefix.edges.push_back(paths[k].edges[j]);
            }
            const EdgeLabel flip = opposite(cfg.edges[paths[k].edges[i]].label);
            first.emplace(n, flip);
            const std::size_t e = edge_with(n, flip);
            prefix.nodes.push_back(n);
            prefix.edges.push_back(e);
            prefix.nodes.push_back(cfg.edges[e].to);
            BasisPath candidate = complete(std::move(prefix), std::move(first));
            if (rank.add(candidate)) {
                paths.push_back(std::move(candidate));
            }
        }
    }
    // Flips that only recombine earlier paths are replaced from the tree basis.
    const std::size_t target = static_cast<std::size_t>(cc_from_cfg(cfg));
    if (paths.size() < target) {
        for (BasisPath& candidate : fundamental_paths(cfg, out, dist)) {
            if (paths.size() == target) {
                break;
            }
            if (rank.add(candidate)) {
                paths.push_back(std::move(candidate));
            }
        }
    }
    return paths;
}

std::string node_label(const Cfg& cfg, NodeId id)
{
    const CfgNode& node = cfg.nodes.at(id);
    if (node.origin == nullptr) {
        return std::string(to_string(node.role));
    }
    return token_text(*node.origin);
}

std::string cfg_to_dot(const Cfg& cfg)
{
    std::ostringstream os;
    os << "digraph \"" << escaped(cfg.unit.empty() ? cfg.function : cfg.unit + "." + cfg.function)
       << "\" {\n";
    os << "  node [shape=box];\n";
    for (const CfgNode& node : cfg.nodes) {
        os << "  n" << node.id << " [label=\"" << escaped(node_label(cfg, node.id)) << "\"";
        if (node.role == Role::Predicate) {
            os << ", shape=diamond";
        } else if (node.role != Role::Statement) {
            os << ", shape=ellipse";
        }
        os << "];\n";
    }
    for (const CfgEdge& edge : cfg.edges) {
        os << "  n" << edge.from << " -> n" << edge.to;
        if (edge.label != EdgeLabel::Seq) {
            os << " [label=\"" << (edge.label == EdgeLabel::True ? 'T' : 'F') << "\"]";
        }
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace ecst::cfg
