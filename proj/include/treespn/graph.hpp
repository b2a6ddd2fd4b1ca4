#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "treespn/leaf.hpp"

namespace treespn {

struct NodeId {
    std::uint32_t value = 0;

    constexpr NodeId() = default;
    constexpr explicit NodeId(std::uint32_t v) : value(v) {}
    constexpr explicit NodeId(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}
    constexpr explicit NodeId(int v) : value(static_cast<std::uint32_t>(v)) {}
    constexpr std::size_t index() const { return value; }
    friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

enum class NodeKind { kSum, kProduct, kLeaf };

const char* kind_name(NodeKind kind);

struct Node {
    NodeKind kind = NodeKind::kLeaf;
    std::vector<NodeId> children;
    std::vector<double> weights;  // parallel to children, sum nodes only
    LeafPtr leaf;                 // leaf nodes only
    std::vector<int> scope;       // sorted variable ids; filled when frozen
};

struct Violation {
    NodeId node;
    std::string rule;  // normalization, completeness, decomposability, acyclicity, ...
    std::string detail;
};

std::string to_string(const Violation& v);

class SpnGraph;

class InvalidGraphError : public std::invalid_argument {
  public:
    explicit InvalidGraphError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

  private:
    std::vector<Violation> violations_;
};

// Append-only construction of an SPN. Children must already exist when a
// node is added; freeze() validates and produces the immutable graph.
class GraphBuilder {
  public:
    explicit GraphBuilder(std::vector<int> cardinalities);
    explicit GraphBuilder(const SpnGraph& graph);
    // Adopts nodes with fixed ids, as read back from a model file.
    GraphBuilder(std::vector<int> cardinalities, std::vector<Node> nodes, NodeId root);

    NodeId add_leaf(LeafPtr leaf);
    NodeId add_product(std::vector<NodeId> children);
    // Repeated children are merged into one edge carrying the summed weight.
    NodeId add_sum(std::vector<NodeId> children, std::vector<double> weights);
    // Appends an edge to an existing sum node, merging with an existing edge.
    void append_child(NodeId sum, NodeId child, double weight);
    // Raw access for tests that need malformed graphs.
    Node& mutable_node(NodeId id) { return nodes_.at(id.index()); }

    void set_root(NodeId root) { root_ = root; has_root_ = true; }
    NodeId root() const;
    std::size_t size() const { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_.at(id.index()); }
    const std::vector<int>& cardinalities() const { return cardinalities_; }

    SpnGraph freeze() const;

  private:
    friend std::vector<Violation> validate(const GraphBuilder&);
    NodeId push(Node node);
    void check_child(NodeId child) const;

    std::vector<int> cardinalities_;
    std::vector<Node> nodes_;
    NodeId root_{};
    bool has_root_ = false;
};

// Empty result means the graph is a valid normalized SPN.
std::vector<Violation> validate(const GraphBuilder& builder);

// Validated, immutable SPN. Only reachable through GraphBuilder::freeze, so
// every evaluation runs on a checked structure.
class SpnGraph {
  public:
    std::size_t size() const { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_[id.index()]; }
    NodeId root() const { return root_; }
    // Children before parents.
    const std::vector<NodeId>& topo_order() const { return topo_order_; }
    const std::vector<NodeId>& leaves() const { return leaves_; }
    const std::vector<NodeId>& sum_nodes() const { return sums_; }
    std::size_t num_variables() const { return cardinalities_.size(); }
    const std::vector<int>& cardinalities() const { return cardinalities_; }
    std::size_t num_edges() const { return num_edges_; }

    // Same structure with new sum weights and leaf models, both indexed by
    // node id; entries for other node kinds are ignored.
    SpnGraph reparameterized(std::span<const std::vector<double>> weights, std::span<const LeafPtr> leaves) const;

    // Sum weights and leaves indexed by node id, the inverse of reparameterized.
    std::vector<std::vector<double>> weights_by_node() const;
    std::vector<LeafPtr> leaves_by_node() const;

  private:
    friend class GraphBuilder;
    SpnGraph() = default;

    std::vector<Node> nodes_;
    NodeId root_{};
    std::vector<NodeId> topo_order_;
    std::vector<NodeId> leaves_;
    std::vector<NodeId> sums_;
    std::vector<int> cardinalities_;
    std::size_t num_edges_ = 0;
};

}  // namespace treespn
