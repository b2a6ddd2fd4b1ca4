#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "treespn/dataset.hpp"
#include "treespn/graph.hpp"
#include "treespn/leaves.hpp"

namespace treespn::testing {

// S = 0.3 * B(0.9)[A] * B(0.8)[B] + 0.7 * B(0.2)[A] * B(0.5)[B]
struct TwoComponent {
    SpnGraph graph;
    NodeId leaf1, leaf2, leaf3, leaf4, prod1, prod2, root;
};

inline TwoComponent two_component(double p1 = 0.9, double p2 = 0.8, double p3 = 0.2, double p4 = 0.5,
                                  double w1 = 0.3) {
    GraphBuilder b({2, 2});
    const NodeId l1 = b.add_leaf(make_bernoulli(0, p1));
    const NodeId l2 = b.add_leaf(make_bernoulli(1, p2));
    const NodeId l3 = b.add_leaf(make_bernoulli(0, p3));
    const NodeId l4 = b.add_leaf(make_bernoulli(1, p4));
    const NodeId q1 = b.add_product({l1, l2});
    const NodeId q2 = b.add_product({l3, l4});
    const NodeId r = b.add_sum({q1, q2}, {w1, 1.0 - w1});
    return {b.freeze(), l1, l2, l3, l4, q1, q2, r};
}

// Single sum over one leaf per child.
inline SpnGraph flat_mixture(std::vector<int> cards, std::vector<LeafPtr> leaves, std::vector<double> weights) {
    GraphBuilder b(std::move(cards));
    std::vector<NodeId> children;
    for (auto& l : leaves) children.push_back(b.add_leaf(std::move(l)));
    b.add_sum(std::move(children), std::move(weights));
    return b.freeze();
}

inline std::vector<std::vector<int>> random_binary_rows(std::mt19937_64& rng, std::size_t rows, std::size_t vars,
                                                        double p_one = 0.5) {
    std::bernoulli_distribution bit(p_one);
    std::vector<std::vector<int>> out(rows, std::vector<int>(vars));
    for (auto& r : out) {
        for (auto& x : r) x = bit(rng) ? 1 : 0;
    }
    return out;
}

inline Dataset binary_dataset(const std::vector<std::vector<int>>& rows, std::size_t vars) {
    return Dataset::from_rows("test", rows, std::vector<int>(vars, 2));
}

inline std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> w(n);
    for (double& x : w) x = u(rng);
    return w;
}

inline double relative_error(double expected, double actual) {
    const double scale = std::max(std::abs(expected), 1e-300);
    return std::abs(expected - actual) / scale;
}

}  // namespace treespn::testing
