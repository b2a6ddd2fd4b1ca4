#include "treespn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "treespn/leaves.hpp"

namespace treespn {

namespace {

constexpr double kNormalizationTolerance = 1e-12;

std::string join_ids(const std::vector<int>& xs) {
    std::ostringstream out;
    out << '{';
    for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? "," : "") << xs[i];
    out << '}';
    return out.str();
}

std::string check_weights(const std::vector<double>& weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) return "weight " + format_double(w) + " is negative or not finite";
        sum += w;
    }
    if (std::abs(sum - 1.0) > kNormalizationTolerance) return "weights sum to " + format_double(sum);
    return {};
}

std::string check_leaf_cardinalities(const LeafModel& leaf, const std::vector<int>& cards) {
    for (int v : leaf.scope()) {
        if (v < 0 || static_cast<std::size_t>(v) >= cards.size()) {
            return "variable " + std::to_string(v) + " outside the model";
        }
    }
    switch (leaf.family()) {
        case LeafFamily::kCategorical: {
            const auto& c = static_cast<const CategoricalLeaf&>(leaf);
            if (cards[c.variable()] != c.cardinality()) return "categorical arity differs from variable cardinality";
            break;
        }
        case LeafFamily::kTree: {
            const auto& t = static_cast<const TreeLeaf&>(leaf);
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (cards[t.scope()[i]] != t.cardinalities()[i]) return "tree arity differs from variable cardinality";
            }
            break;
        }
        case LeafFamily::kGaussian:
            for (int v : leaf.scope()) {
                if (cards[v] != kContinuous) return "gaussian leaf over a discrete variable";
            }
            break;
    }
    return {};
}

struct Traversal {
    std::vector<NodeId> postorder;
    std::vector<bool> reached;
    std::vector<NodeId> cycle_nodes;
};

// Iterative DFS from the root; postorder puts children before parents.
Traversal traverse(const std::vector<Node>& nodes, NodeId root) {
    Traversal t;
    t.reached.assign(nodes.size(), false);
    enum class Mark : std::uint8_t { kNew, kOpen, kDone };
    std::vector<Mark> mark(nodes.size(), Mark::kNew);
    std::vector<std::pair<NodeId, std::size_t>> stack{{root, 0}};
    mark[root.index()] = Mark::kOpen;
    t.reached[root.index()] = true;
    while (!stack.empty()) {
        auto& [id, next] = stack.back();
        const auto& children = nodes[id.index()].children;
        if (next < children.size()) {
            const NodeId child = children[next++];
            if (child.index() >= nodes.size()) continue;
            t.reached[child.index()] = true;
            if (mark[child.index()] == Mark::kOpen) {
                t.cycle_nodes.push_back(id);
            } else if (mark[child.index()] == Mark::kNew) {
                mark[child.index()] = Mark::kOpen;
                stack.emplace_back(child, 0);
            }
        } else {
            mark[id.index()] = Mark::kDone;
            t.postorder.push_back(id);
            stack.pop_back();
        }
    }
    return t;
}

}  // namespace

const char* kind_name(NodeKind kind) {
    switch (kind) {
        case NodeKind::kSum: return "sum";
        case NodeKind::kProduct: return "product";
        case NodeKind::kLeaf: return "leaf";
    }
    return "unknown";
}

std::string to_string(const Violation& v) {
    return "node " + std::to_string(v.node.value) + ": " + v.rule + " (" + v.detail + ")";
}

InvalidGraphError::InvalidGraphError(std::vector<Violation> violations)
    : std::invalid_argument([&] {
          std::string msg = "invalid SPN:";
          for (const auto& v : violations) msg += "\n  " + to_string(v);
          return msg;
      }()),
      violations_(std::move(violations)) {}

GraphBuilder::GraphBuilder(std::vector<int> cardinalities) : cardinalities_(std::move(cardinalities)) {}

GraphBuilder::GraphBuilder(const SpnGraph& graph)
    : cardinalities_(graph.cardinalities()), nodes_(graph.nodes_), root_(graph.root()), has_root_(true) {}

GraphBuilder::GraphBuilder(std::vector<int> cardinalities, std::vector<Node> nodes, NodeId root)
    : cardinalities_(std::move(cardinalities)), nodes_(std::move(nodes)), root_(root), has_root_(true) {
    for (Node& n : nodes_) {
        if (n.kind == NodeKind::kLeaf && n.leaf) {
            n.scope = n.leaf->scope();
            std::sort(n.scope.begin(), n.scope.end());
        }
    }
}

NodeId GraphBuilder::push(Node node) {
    nodes_.push_back(std::move(node));
    return NodeId(nodes_.size() - 1);
}

void GraphBuilder::check_child(NodeId child) const {
    if (child.index() >= nodes_.size()) throw std::out_of_range("graph builder: unknown child node");
}

NodeId GraphBuilder::root() const {
    if (has_root_) return root_;
    if (nodes_.empty()) throw std::logic_error("graph builder: empty graph has no root");
    return NodeId(nodes_.size() - 1);
}

NodeId GraphBuilder::add_leaf(LeafPtr leaf) {
    if (!leaf) throw std::invalid_argument("graph builder: null leaf");
    Node node;
    node.kind = NodeKind::kLeaf;
    node.scope = leaf->scope();
    std::sort(node.scope.begin(), node.scope.end());
    node.leaf = std::move(leaf);
    return push(std::move(node));
}

NodeId GraphBuilder::add_product(std::vector<NodeId> children) {
    for (NodeId c : children) check_child(c);
    Node node;
    node.kind = NodeKind::kProduct;
    node.children = std::move(children);
    return push(std::move(node));
}

NodeId GraphBuilder::add_sum(std::vector<NodeId> children, std::vector<double> weights) {
    if (children.size() != weights.size()) throw std::invalid_argument("graph builder: weights do not match children");
    Node node;
    node.kind = NodeKind::kSum;
    for (std::size_t i = 0; i < children.size(); ++i) {
        check_child(children[i]);
        auto it = std::find(node.children.begin(), node.children.end(), children[i]);
        if (it != node.children.end()) {
            node.weights[it - node.children.begin()] += weights[i];
        } else {
            node.children.push_back(children[i]);
            node.weights.push_back(weights[i]);
        }
    }
    return push(std::move(node));
}

void GraphBuilder::append_child(NodeId sum, NodeId child, double weight) {
    check_child(sum);
    check_child(child);
    Node& node = nodes_[sum.index()];
    if (node.kind != NodeKind::kSum) throw std::invalid_argument("graph builder: append_child on a non-sum node");
    auto it = std::find(node.children.begin(), node.children.end(), child);
    if (it != node.children.end()) {
        node.weights[it - node.children.begin()] += weight;
    } else {
        node.children.push_back(child);
        node.weights.push_back(weight);
    }
}

std::vector<Violation> validate(const GraphBuilder& builder) {
    std::vector<Violation> out;
    const auto& nodes = builder.nodes_;
    if (nodes.empty()) {
        out.push_back({NodeId{}, "root", "graph has no nodes"});
        return out;
    }
    const NodeId root = builder.root();
    if (root.index() >= nodes.size()) {
        out.push_back({root, "root", "root id out of range"});
        return out;
    }

    bool structural_ok = true;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        const NodeId id(i);
        for (NodeId c : n.children) {
            if (c.index() >= nodes.size()) {
                out.push_back({id, "index", "child id " + std::to_string(c.value) + " out of range"});
                structural_ok = false;
            }
        }
        switch (n.kind) {
            case NodeKind::kLeaf:
                if (!n.leaf) {
                    out.push_back({id, "leaf", "leaf node without a distribution"});
                    structural_ok = false;
                } else if (!n.children.empty()) {
                    out.push_back({id, "leaf", "leaf node with children"});
                    structural_ok = false;
                } else if (auto msg = check_leaf_cardinalities(*n.leaf, builder.cardinalities_); !msg.empty()) {
                    out.push_back({id, "leaf-scope", msg});
                    structural_ok = false;
                }
                break;
            case NodeKind::kProduct:
                if (n.children.empty()) {
                    out.push_back({id, "arity", "product without children"});
                    structural_ok = false;
                }
                break;
            case NodeKind::kSum:
                if (n.children.empty() || n.children.size() != n.weights.size()) {
                    out.push_back({id, "arity", "sum children and weights disagree"});
                    structural_ok = false;
                } else if (auto msg = check_weights(n.weights); !msg.empty()) {
                    out.push_back({id, "normalization", msg});
                }
                break;
        }
    }
    if (!structural_ok) return out;

    const Traversal t = traverse(nodes, root);
    for (NodeId id : t.cycle_nodes) out.push_back({id, "acyclicity", "edge closes a directed cycle"});
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!t.reached[i]) out.push_back({NodeId(i), "reachability", "node not reachable from the root"});
    }
    if (!t.cycle_nodes.empty()) return out;

    std::vector<std::vector<int>> scope(nodes.size());
    for (NodeId id : t.postorder) {
        const Node& n = nodes[id.index()];
        if (n.kind == NodeKind::kLeaf) {
            scope[id.index()] = n.scope;
            std::sort(scope[id.index()].begin(), scope[id.index()].end());
            continue;
        }
        if (n.kind == NodeKind::kSum) {
            const auto& first = scope[n.children.front().index()];
            for (NodeId c : n.children) {
                if (scope[c.index()] != first) {
                    out.push_back({id, "completeness",
                                   "child " + std::to_string(c.value) + " has scope " + join_ids(scope[c.index()]) +
                                       ", expected " + join_ids(first)});
                    break;
                }
            }
            scope[id.index()] = first;
            continue;
        }
        std::vector<int> merged;
        bool overlap = false;
        for (NodeId c : n.children) {
            std::vector<int> next;
            const auto& cs = scope[c.index()];
            std::set_union(merged.begin(), merged.end(), cs.begin(), cs.end(), std::back_inserter(next));
            if (next.size() != merged.size() + cs.size()) overlap = true;
            merged = std::move(next);
        }
        if (overlap) out.push_back({id, "decomposability", "children scopes overlap"});
        scope[id.index()] = std::move(merged);
    }
    return out;
}

SpnGraph GraphBuilder::freeze() const {
    auto violations = validate(*this);
    if (!violations.empty()) throw InvalidGraphError(std::move(violations));

    SpnGraph g;
    g.nodes_ = nodes_;
    g.root_ = root();
    g.cardinalities_ = cardinalities_;
    g.topo_order_ = traverse(nodes_, g.root_).postorder;
    for (NodeId id : g.topo_order_) {
        Node& n = g.nodes_[id.index()];
        g.num_edges_ += n.children.size();
        if (n.kind == NodeKind::kLeaf) {
            g.leaves_.push_back(id);
        } else if (n.kind == NodeKind::kSum) {
            g.sums_.push_back(id);
            n.scope = g.nodes_[n.children.front().index()].scope;
        } else {
            n.scope.clear();
            for (NodeId c : n.children) {
                const auto& cs = g.nodes_[c.index()].scope;
                n.scope.insert(n.scope.end(), cs.begin(), cs.end());
            }
            std::sort(n.scope.begin(), n.scope.end());
        }
    }
    return g;
}

SpnGraph SpnGraph::reparameterized(std::span<const std::vector<double>> weights, std::span<const LeafPtr> leaves) const {
    if (weights.size() != nodes_.size() || leaves.size() != nodes_.size()) {
        throw std::invalid_argument("reparameterized: parameter arrays must be indexed by node id");
    }
    SpnGraph g = *this;
    std::vector<Violation> violations;
    for (NodeId id : sums_) {
        Node& n = g.nodes_[id.index()];
        const auto& w = weights[id.index()];
        if (w.size() != n.children.size()) {
            violations.push_back({id, "arity", "weight count differs from child count"});
            continue;
        }
        if (auto msg = check_weights(w); !msg.empty()) violations.push_back({id, "normalization", msg});
        n.weights = w;
    }
    for (NodeId id : leaves_) {
        Node& n = g.nodes_[id.index()];
        const auto& leaf = leaves[id.index()];
        if (!leaf) {
            violations.push_back({id, "leaf", "missing leaf model"});
            continue;
        }
        std::vector<int> scope = leaf->scope();
        std::sort(scope.begin(), scope.end());
        if (scope != n.scope) {
            violations.push_back({id, "leaf-scope", "replacement leaf has a different scope"});
            continue;
        }
        if (auto msg = check_leaf_cardinalities(*leaf, cardinalities_); !msg.empty()) {
            violations.push_back({id, "leaf-scope", msg});
            continue;
        }
        n.leaf = leaf;
    }
    if (!violations.empty()) throw InvalidGraphError(std::move(violations));
    return g;
}

std::vector<std::vector<double>> SpnGraph::weights_by_node() const {
    std::vector<std::vector<double>> out(nodes_.size());
    for (NodeId id : sums_) out[id.index()] = nodes_[id.index()].weights;
    return out;
}

std::vector<LeafPtr> SpnGraph::leaves_by_node() const {
    std::vector<LeafPtr> out(nodes_.size());
    for (NodeId id : leaves_) out[id.index()] = nodes_[id.index()].leaf;
    return out;
}

}  // namespace treespn
