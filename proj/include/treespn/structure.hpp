#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treespn/dataset.hpp"
#include "treespn/graph.hpp"

namespace treespn {

struct StructureConfig {
    double independence_threshold = 0.01;  // variables dependent when the test score falls below
    int trees_per_sum = 20;
    int max_depth = 4;  // sum nodes on any root path
    int num_clusters = 2;
    int min_instances = 50;
    double smoothing = 0.1;  // pseudo-count for the initial leaf fits
    std::uint64_t seed = 0;

    void validate() const;
};

// G-test of independence between two discrete variables over the given rows,
// returned as the chi-square survival probability with (k_u-1)(k_v-1)
// degrees of freedom. Empty weights mean unit weights. A constant variable
// scores 1. Throws std::invalid_argument for an empty row set.
double independence_test(const Dataset& data, std::span<const std::size_t> rows, int u, int v,
                         std::span<const double> weights = {});

// Hard EM over a mixture of products of categoricals on the given variables,
// 10 iterations. Returns one cluster index per row in rows. Initial
// assignments are hashed from row contents and the seed, so the result does
// not depend on row order.
std::vector<int> cluster_instances(const Dataset& data, std::span<const std::size_t> rows,
                                   std::span<const int> variables, int k, std::uint64_t seed);

// Recursive learner: independent variable groups become product nodes,
// clusters of instances become sum nodes, and every sum node also receives
// trees_per_sum Chow-Liu tree leaves fit on bootstrap resamples.
SpnGraph learn_structure(const Dataset& data, const StructureConfig& config);

// Explicit edges plus, for each tree leaf, the edges of the equivalent SPN:
// sum over v of ctx(v) * k_v * (2 + children(v)), ctx(root) = 1 and
// ctx(v) = k_parent(v) otherwise.
std::size_t count_edges(const SpnGraph& graph);

}  // namespace treespn
