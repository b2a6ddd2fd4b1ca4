#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "treespn/dataset.hpp"
#include "treespn/graph.hpp"
#include "treespn/inference.hpp"

// Brute-force view of an SPN as the mixture of all its subnetworks. Test
// tool only: the enumeration is exponential in the number of edges.
namespace treespn::oracle {

// One child per included sum node, all children per included product node.
struct Subnetwork {
    std::map<NodeId, NodeId> chosen_child;  // included sum node -> chosen child
    double log_coefficient = 0.0;                // log of the product of chosen weights
    std::vector<NodeId> leaves;             // sorted
    std::vector<NodeId> nodes;              // every included node, sorted
    std::vector<std::pair<NodeId, NodeId>> edges;  // (parent, child), sorted

    double coefficient() const;
    bool contains(NodeId node) const;
};

class EnumerationRefused : public std::runtime_error {
  public:
    EnumerationRefused(double estimated, double cap);
    double estimated_count() const { return estimated_; }

  private:
    double estimated_;
};

inline constexpr double kDefaultEnumerationCap = 1e6;

// Sum node: total over children; product node: product over children.
double subnetwork_count(const SpnGraph& graph);
double subnetwork_count(const SpnGraph& graph, NodeId node);

std::vector<Subnetwork> enumerate_subnetworks(const SpnGraph& graph, double cap = kDefaultEnumerationCap);

// log of the coefficient times the product of leaf densities, for one subnetwork.
double log_component(const SpnGraph& graph, const Subnetwork& subnet, const RowView& x);

double log_mixture_value(const SpnGraph& graph, std::span<const Subnetwork> subnets, const Assignment& x);
double mixture_value(const SpnGraph& graph, std::span<const Subnetwork> subnets, const Assignment& x);

// Sum of coefficient times density over the subnetworks using edge (sum, child_index).
// Throws std::invalid_argument when the node is not a sum node or the index
// is out of range.
double edge_submixture_value(const SpnGraph& graph, std::span<const Subnetwork> subnets, NodeId sum,
                             std::size_t child_index, const Assignment& x);

struct DerivativeIdentityResult {
    bool skipped = false;
    std::string diagnostic;
    double derivative = 0.0;  // dS/dS_q from the downward pass
    double enumerated = 0.0;  // sum over subnetworks through the node of coefficient times density, over the node value
    double residual = 0.0;    // relative
};

// Compares dS/dS_q with the enumerated right-hand side. Skipped when
// S_q(x) = 0.
DerivativeIdentityResult derivative_identity_check(const SpnGraph& graph, std::span<const Subnetwork> subnets, NodeId node,
                          const Assignment& x);

struct FactorizationResult {
    double direct = 0.0;    // sum over subnetworks through the edge
    double factored = 0.0;  // w * (sum over parts above) * (sum over parts below)
    std::size_t above_parts = 0;
    std::size_t below_parts = 0;
    std::size_t through_edge = 0;
    double residual = 0.0;  // relative
};

// Groups the subnetworks through sum edge (sum, child_index) by their part
// below the child and the part above the sum, and checks that the direct
// sum equals the product of the grouped sums.
FactorizationResult factorization_check(const SpnGraph& graph, std::span<const Subnetwork> subnets, NodeId sum,
                                        std::size_t child_index, const Assignment& x);

// |a - b| / |a|, or |b| when a = 0.
double relative_residual(double reference, double value);

struct RandomSpnOptions {
    int max_internal_nodes = 12;
    int max_children = 3;
    int min_variables = 1;
    int max_variables = 4;
    double reuse_probability = 0.3;  // chance of reusing an existing node with the same scope
};

// Random valid SPN over binary variables with Bernoulli leaves and shared
// substructure.
SpnGraph random_spn(std::mt19937_64& rng, const RandomSpnOptions& options = {});

// Each variable observed uniformly at random, or marginalized with the given
// probability.
Assignment random_assignment(std::mt19937_64& rng, std::span<const int> cardinalities,
                             double marginalize_probability = 0.2);

struct OracleCheckConfig {
    int trials = 100;
    int assignments_per_trial = 10;
    int max_internal_nodes = 12;
    std::uint64_t seed = 0;
    double tolerance = 1e-9;
    // Applied to every downward-pass trace before comparison; lets a harness
    // confirm that wrong derivatives are caught.
    std::function<void(EvalTrace&)> corrupt_trace;
};

struct OracleCheckReport {
    int trials = 0;
    std::size_t comparisons = 0;
    double max_mixture_residual = 0.0;
    double max_edge_residual = 0.0;
    double max_derivative_identity_residual = 0.0;
    double max_factorization_residual = 0.0;
    double max_coefficient_sum_error = 0.0;
    std::size_t derivative_identity_skipped = 0;
    bool passed = true;
};

OracleCheckReport run_oracle_check(const OracleCheckConfig& config);

}  // namespace treespn::oracle
