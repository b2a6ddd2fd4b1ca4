#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "support.hpp"
#include "treespn/inference.hpp"
#include "treespn/serialization.hpp"
#include "treespn/structure.hpp"

using namespace treespn;
using treespn::testing::binary_dataset;
using treespn::testing::random_binary_rows;

namespace {

// Two blocks of three variables; strong dependence inside a block, none
// across blocks.
Dataset blockwise(std::mt19937_64& rng, std::size_t rows) {
    std::bernoulli_distribution bit(0.5), flip(0.05);
    std::vector<std::vector<int>> out(rows, std::vector<int>(6));
    for (auto& r : out) {
        const int a = bit(rng), b = bit(rng);
        for (int v = 0; v < 3; ++v) r[v] = a ^ static_cast<int>(flip(rng));
        for (int v = 3; v < 6; ++v) r[v] = b ^ static_cast<int>(flip(rng));
    }
    return binary_dataset(out, 6);
}

// Two well separated prototypes over 8 variables, 5% noise.
Dataset two_prototypes(std::mt19937_64& rng, std::size_t rows, std::vector<int>& label) {
    std::bernoulli_distribution bit(0.5), flip(0.05);
    std::vector<std::vector<int>> out(rows, std::vector<int>(8));
    label.assign(rows, 0);
    for (std::size_t n = 0; n < rows; ++n) {
        label[n] = bit(rng);
        for (int v = 0; v < 8; ++v) {
            const int proto = label[n] ? (v % 2) : 1 - (v % 2);
            out[n][v] = proto ^ static_cast<int>(flip(rng));
        }
    }
    return binary_dataset(out, 8);
}

// Correlated data that forces sum nodes: a latent switch shared by all variables.
Dataset mixture_data(std::mt19937_64& rng, std::size_t rows, std::size_t vars) {
    std::bernoulli_distribution bit(0.5);
    std::vector<std::vector<int>> out(rows, std::vector<int>(vars));
    for (auto& r : out) {
        const bool z = bit(rng);
        for (std::size_t v = 0; v < vars; ++v) {
            r[v] = std::bernoulli_distribution(z ? 0.2 + 0.05 * (v % 4) : 0.8 - 0.05 * (v % 3))(rng) ? 1 : 0;
        }
    }
    return binary_dataset(out, vars);
}

int max_sum_depth(const SpnGraph& g) {
    std::vector<int> depth(g.size(), 0);
    const auto& order = g.topo_order();
    // topo_order lists children before parents.
    for (NodeId q : order) {
        const Node& n = g.node(q);
        int d = 0;
        for (NodeId c : n.children) d = std::max(d, depth[c.index()]);
        depth[q.index()] = d + (n.kind == NodeKind::kSum ? 1 : 0);
    }
    return depth[g.root().index()];
}

std::vector<std::size_t> all_rows(const Dataset& d) {
    std::vector<std::size_t> rows(d.num_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return rows;
}

}  // namespace

TEST_CASE("independent variable blocks become a product root") {
    std::mt19937_64 rng(1);
    const Dataset d = blockwise(rng, 400);
    StructureConfig c;
    c.trees_per_sum = 2;
    const SpnGraph g = learn_structure(d, c);
    const Node& root = g.node(g.root());
    REQUIRE(root.kind == NodeKind::kProduct);
    REQUIRE(root.children.size() == 2);
    std::set<std::set<int>> scopes;
    for (NodeId child : root.children) {
        const auto& s = g.node(child).scope;
        scopes.insert(std::set<int>(s.begin(), s.end()));
    }
    CHECK(scopes == std::set<std::set<int>>{{0, 1, 2}, {3, 4, 5}});
}

TEST_CASE("depth zero gives a single tree leaf") {
    std::mt19937_64 rng(2);
    const Dataset d = mixture_data(rng, 200, 5);
    StructureConfig c;
    c.max_depth = 0;
    const SpnGraph g = learn_structure(d, c);
    CHECK(g.size() == 1);
    CHECK(dynamic_cast<const TreeLeaf*>(g.node(g.root()).leaf.get()) != nullptr);
}

TEST_CASE("sum nodes carry cluster children and bootstrap trees") {
    std::mt19937_64 rng(3);
    const Dataset d = mixture_data(rng, 600, 7);
    for (int trees : {0, 1, 5}) {
        StructureConfig c;
        c.trees_per_sum = trees;
        c.max_depth = 2;
        c.min_instances = 30;
        c.independence_threshold = 0.5;
        const SpnGraph g = learn_structure(d, c);
        REQUIRE_FALSE(g.sum_nodes().empty());
        for (NodeId q : g.sum_nodes()) {
            const Node& n = g.node(q);
            std::size_t tree_children = 0, other = 0;
            double tree_mass = 0.0;
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                const Node& child = g.node(n.children[i]);
                const bool boot = child.kind == NodeKind::kLeaf && child.scope.size() == n.scope.size() &&
                                  dynamic_cast<const TreeLeaf*>(child.leaf.get()) != nullptr;
                if (boot && i >= n.children.size() - static_cast<std::size_t>(trees)) {
                    ++tree_children;
                    tree_mass += n.weights[i];
                } else {
                    ++other;
                }
            }
            CHECK(n.children.size() == static_cast<std::size_t>(c.num_clusters + trees));
            CHECK(tree_children == static_cast<std::size_t>(trees));
            CHECK(other == static_cast<std::size_t>(c.num_clusters));
            CHECK(tree_mass == doctest::Approx(trees > 0 ? 0.5 : 0.0).epsilon(1e-12));
            double total = 0.0;
            for (double w : n.weights) total += w;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("learned networks are valid and respect the depth bound") {
    std::mt19937_64 rng(4);
    const Dataset d = mixture_data(rng, 500, 9);
    for (int depth : {1, 2, 3}) {
        StructureConfig c;
        c.max_depth = depth;
        c.trees_per_sum = 3;
        c.min_instances = 20;
        c.independence_threshold = 0.1;
        const SpnGraph g = learn_structure(d, c);
        CHECK(max_sum_depth(g) <= depth);
        CHECK(std::abs(std::exp(evaluate(g, Assignment(g.num_variables())).log_root(g)) - 1.0) < 1e-10);
        CHECK(g.node(g.root()).scope.size() == 9);
        // Round trip through the model format revalidates every structural rule.
        CHECK_NOTHROW(model_from_string(model_to_string(g)));
        CHECK(std::isfinite(log_likelihood(g, d)));
    }
}

TEST_CASE("independence test") {
    std::mt19937_64 rng(5);
    SUBCASE("identical variables are dependent") {
        std::vector<std::vector<int>> rows = random_binary_rows(rng, 1000, 2);
        for (auto& r : rows) r[1] = r[0];
        const Dataset d = binary_dataset(rows, 2);
        CHECK(independence_test(d, all_rows(d), 0, 1) < 1e-3);
    }
    SUBCASE("independent variables give central p-values") {
        std::vector<double> ps;
        for (int seed = 0; seed < 100; ++seed) {
            std::mt19937_64 r(1000 + seed);
            const Dataset d = binary_dataset(random_binary_rows(r, 10000, 2), 2);
            ps.push_back(independence_test(d, all_rows(d), 0, 1));
        }
        std::sort(ps.begin(), ps.end());
        const double median = 0.5 * (ps[49] + ps[50]);
        CHECK(median >= 0.2);
        CHECK(median <= 0.8);
    }
    SUBCASE("a constant variable scores one") {
        std::vector<std::vector<int>> rows = random_binary_rows(rng, 50, 2);
        for (auto& r : rows) r[1] = 1;
        const Dataset d = binary_dataset(rows, 2);
        CHECK(independence_test(d, all_rows(d), 0, 1) == 1.0);
    }
    SUBCASE("weights scale the statistic") {
        std::vector<std::vector<int>> rows = random_binary_rows(rng, 60, 2);
        for (std::size_t n = 0; n < 40; ++n) rows[n][1] = rows[n][0];
        const Dataset d = binary_dataset(rows, 2);
        const std::vector<double> twos(d.num_rows(), 2.0);
        CHECK(independence_test(d, all_rows(d), 0, 1, twos) < independence_test(d, all_rows(d), 0, 1));
    }
    SUBCASE("an empty row set is rejected") {
        const Dataset d = binary_dataset(random_binary_rows(rng, 5, 2), 2);
        CHECK_THROWS_AS(independence_test(d, {}, 0, 1), std::invalid_argument);
    }
}

TEST_CASE("instance clustering") {
    std::mt19937_64 rng(6);
    std::vector<int> label;
    const Dataset d = two_prototypes(rng, 400, label);
    const std::vector<int> vars{0, 1, 2, 3, 4, 5, 6, 7};
    const auto rows = all_rows(d);
    SUBCASE("separated prototypes are recovered") {
        const auto a = cluster_instances(d, rows, vars, 2, 3);
        std::size_t agree = 0;
        for (std::size_t n = 0; n < rows.size(); ++n) agree += a[n] == label[n];
        const double purity = std::max(agree, rows.size() - agree) / static_cast<double>(rows.size());
        CHECK(purity >= 0.95);
    }
    SUBCASE("deterministic for a fixed seed") {
        CHECK(cluster_instances(d, rows, vars, 2, 9) == cluster_instances(d, rows, vars, 2, 9));
    }
    SUBCASE("row order does not matter") {
        std::vector<std::size_t> reversed(rows.rbegin(), rows.rend());
        const auto forward = cluster_instances(d, rows, vars, 2, 4);
        const auto backward = cluster_instances(d, reversed, vars, 2, 4);
        for (std::size_t i = 0; i < rows.size(); ++i) CHECK(backward[i] == forward[rows.size() - 1 - i]);
    }
    SUBCASE("one cluster per distinct row") {
        const Dataset small = Dataset::from_rows("s", {{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {2, 2});
        const std::vector<int> two{0, 1};
        const auto a = cluster_instances(small, all_rows(small), two, 4, 1);
        CHECK(std::set<int>(a.begin(), a.end()).size() == 4);
    }
}

TEST_CASE("edge counting") {
    // Chain over two binary variables: 1*2*(2+1) at the root, 2*2*(2+0) below.
    const auto chain = std::make_shared<TreeLeaf>(std::vector<int>{0, 1}, std::vector<int>{2, 2}, std::vector<int>{-1, 0},
                                                  std::vector<std::vector<double>>{{0.4, 0.6}, {0.3, 0.7, 0.9, 0.1}});
    GraphBuilder one({2, 2});
    one.add_leaf(chain);
    CHECK(count_edges(one.freeze()) == 14);

    GraphBuilder mixed({2, 2});
    const NodeId t = mixed.add_leaf(chain);
    const NodeId a = mixed.add_leaf(make_bernoulli(0, 0.3));
    const NodeId b = mixed.add_leaf(make_bernoulli(1, 0.6));
    const NodeId p = mixed.add_product({a, b});
    mixed.add_sum({t, p}, {0.5, 0.5});
    const SpnGraph g = mixed.freeze();
    CHECK(g.num_edges() == 4);
    CHECK(count_edges(g) == 4 + 14);

    // Ternary parent with a binary child: 1*3*3 + 3*2*2.
    GraphBuilder ternary({3, 2});
    ternary.add_leaf(std::make_shared<TreeLeaf>(
        std::vector<int>{0, 1}, std::vector<int>{3, 2}, std::vector<int>{-1, 0},
        std::vector<std::vector<double>>{{0.2, 0.3, 0.5}, {0.5, 0.5, 0.1, 0.9, 0.7, 0.3}}));
    CHECK(count_edges(ternary.freeze()) == 9 + 12);

    std::mt19937_64 rng(7);
    const Dataset d = mixture_data(rng, 300, 6);
    StructureConfig c;
    c.trees_per_sum = 2;
    c.max_depth = 2;
    c.min_instances = 20;
    const std::size_t small = count_edges(learn_structure(d, c));
    c.trees_per_sum = 4;
    CHECK(count_edges(learn_structure(d, c)) > small);
}

TEST_CASE("learned structure does not depend on row order") {
    std::mt19937_64 rng(8);
    const Dataset d = mixture_data(rng, 300, 6);
    std::vector<std::size_t> perm = all_rows(d);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Dataset shuffled = d.subset(perm);
    StructureConfig c;
    c.trees_per_sum = 3;
    c.max_depth = 2;
    c.min_instances = 20;
    c.seed = 17;
    CHECK(model_to_string(learn_structure(d, c)) == model_to_string(learn_structure(shuffled, c)));
    CHECK(model_to_string(learn_structure(d, c)) == model_to_string(learn_structure(d, c)));
}

TEST_CASE("structure config validation") {
    StructureConfig c;
    c.independence_threshold = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = StructureConfig{};
    c.num_clusters = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = StructureConfig{};
    c.trees_per_sum = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = StructureConfig{};
    c.max_depth = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
