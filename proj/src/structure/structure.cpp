#include "treespn/structure.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "treespn/leaves.hpp"

namespace treespn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

double unit_uniform(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// One key per row: content hash combined with the row's ordinal among
// identical rows. Permuting rows permutes the keys.
std::vector<std::uint64_t> row_keys(const Dataset& data, std::span<const std::size_t> rows) {
    std::vector<std::uint64_t> keys(rows.size());
    std::unordered_map<std::uint64_t, std::uint64_t> seen;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::uint64_t h = 0x51ed270b27a1f2c3ULL;
        for (std::size_t v = 0; v < data.num_variables(); ++v) {
            h = mix(h, static_cast<std::uint64_t>(data.state(rows[i], v)));
        }
        keys[i] = mix(h, seen[h]++);
    }
    return keys;
}

// Poisson(1) draw by inversion.
int poisson_one(double u) {
    double p = std::exp(-1.0);
    double cdf = p;
    int k = 0;
    while (u > cdf && k < 64) {
        ++k;
        p /= k;
        cdf += p;
    }
    return k;
}

class DisjointSets {
  public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[std::max(a, b)] = std::min(a, b);
        return true;
    }

  private:
    std::vector<std::size_t> parent_;
};

constexpr double kClusterSmoothing = 1.0;
constexpr int kClusterIterations = 10;

class Learner {
  public:
    Learner(const Dataset& data, const StructureConfig& config)
        : config_(config), builder_(data.cardinalities()) {}

    NodeId learn(const Dataset& local, const std::vector<int>& vars, int depth, std::uint64_t seed) {
        const std::size_t n = local.num_rows();
        if (depth >= config_.max_depth || vars.size() <= 2 || n < static_cast<std::size_t>(config_.min_instances)) {
            return base_leaf(local, vars);
        }
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);

        auto components = independent_groups(local, all, vars);
        if (components.size() > 1) {
            std::vector<NodeId> children;
            for (std::size_t c = 0; c < components.size(); ++c) {
                children.push_back(learn(local, components[c], depth, mix(seed, c + 1)));
            }
            return builder_.add_product(std::move(children));
        }

        const int k = config_.num_clusters;
        if (n < static_cast<std::size_t>(k)) return base_leaf(local, vars);
        const auto assignment = cluster_instances(local, all, vars, k, mix(seed, 0));
        std::vector<std::vector<std::size_t>> members(k);
        for (std::size_t i = 0; i < n; ++i) members[assignment[i]].push_back(i);

        std::vector<NodeId> children;
        std::vector<double> weights;
        const double cluster_mass = config_.trees_per_sum > 0 ? 0.5 : 1.0;
        for (int c = 0; c < k; ++c) {
            if (members[c].empty()) continue;
            const Dataset part = local.subset(members[c]);
            children.push_back(learn(part, vars, depth + 1, mix(seed, 100 + c)));
            weights.push_back(cluster_mass * static_cast<double>(members[c].size()) / static_cast<double>(n));
        }
        const auto keys = row_keys(local, all);
        std::vector<double> boot(n);
        for (int t = 0; t < config_.trees_per_sum; ++t) {
            const std::uint64_t tree_seed = mix(seed, 10000 + static_cast<std::uint64_t>(t));
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                boot[i] = poisson_one(unit_uniform(mix(keys[i], tree_seed)));
                total += boot[i];
            }
            if (total == 0.0) std::fill(boot.begin(), boot.end(), 1.0);
            children.push_back(builder_.add_leaf(chow_liu_weighted(local, vars, boot, config_.smoothing)));
            weights.push_back(0.5 / config_.trees_per_sum);
        }
        const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
        for (double& w : weights) w /= sum;
        return builder_.add_sum(std::move(children), std::move(weights));
    }

    SpnGraph finish(NodeId root) {
        builder_.set_root(root);
        return builder_.freeze();
    }

  private:
    NodeId base_leaf(const Dataset& local, const std::vector<int>& vars) {
        if (vars.size() == 1) {
            const int var = vars.front();
            const int card = local.cardinality(var);
            std::vector<double> probs(card, config_.smoothing);
            double total = config_.smoothing * card;
            for (std::size_t n = 0; n < local.num_rows(); ++n) {
                probs[local.state(n, var)] += 1.0;
                total += 1.0;
            }
            if (total == 0.0) {
                std::fill(probs.begin(), probs.end(), 1.0);
                total = card;
            }
            for (double& p : probs) p /= total;
            const double s = std::accumulate(probs.begin(), probs.end(), 0.0);
            for (double& p : probs) p /= s;
            return builder_.add_leaf(std::make_shared<CategoricalLeaf>(var, std::move(probs)));
        }
        std::vector<double> ones(local.num_rows(), 1.0);
        return builder_.add_leaf(chow_liu_weighted(local, vars, ones, config_.smoothing));
    }

    std::vector<std::vector<int>> independent_groups(const Dataset& local, std::span<const std::size_t> rows,
                                                     const std::vector<int>& vars) {
        DisjointSets sets(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) {
            for (std::size_t j = i + 1; j < vars.size(); ++j) {
                if (sets.find(i) == sets.find(j)) continue;
                if (independence_test(local, rows, vars[i], vars[j]) < config_.independence_threshold) {
                    sets.unite(i, j);
                }
            }
        }
        std::vector<std::vector<int>> groups;
        std::vector<int> group_of(vars.size(), -1);
        for (std::size_t i = 0; i < vars.size(); ++i) {
            const std::size_t r = sets.find(i);
            if (group_of[r] < 0) {
                group_of[r] = static_cast<int>(groups.size());
                groups.emplace_back();
            }
            groups[group_of[r]].push_back(vars[i]);
        }
        return groups;
    }

    const StructureConfig& config_;
    GraphBuilder builder_;
};

}  // namespace

void StructureConfig::validate() const {
    if (!(independence_threshold > 0.0 && independence_threshold <= 1.0)) {
        throw std::invalid_argument("structure config: independence threshold must lie in (0, 1]");
    }
    if (trees_per_sum < 0) throw std::invalid_argument("structure config: trees_per_sum must be nonnegative");
    if (max_depth < 0) throw std::invalid_argument("structure config: max_depth must be nonnegative");
    if (num_clusters < 2) throw std::invalid_argument("structure config: num_clusters must be at least 2");
    if (min_instances < 1) throw std::invalid_argument("structure config: min_instances must be positive");
    if (!(smoothing >= 0.0)) throw std::invalid_argument("structure config: smoothing must be nonnegative");
}

double independence_test(const Dataset& data, std::span<const std::size_t> rows, int u, int v,
                         std::span<const double> weights) {
    if (rows.empty()) throw std::invalid_argument("independence_test: empty row set");
    if (!weights.empty() && weights.size() != rows.size()) {
        throw std::invalid_argument("independence_test: weight count does not match row count");
    }
    const int ku = data.cardinality(u);
    const int kv = data.cardinality(v);
    if (ku < 1 || kv < 1) throw std::invalid_argument("independence_test: variables must be discrete");
    std::vector<double> table(static_cast<std::size_t>(ku) * kv, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        table[data.state(rows[i], u) * kv + data.state(rows[i], v)] += w;
    }
    std::vector<double> row_sum(ku, 0.0);
    std::vector<double> col_sum(kv, 0.0);
    double total = 0.0;
    for (int a = 0; a < ku; ++a) {
        for (int b = 0; b < kv; ++b) {
            row_sum[a] += table[a * kv + b];
            col_sum[b] += table[a * kv + b];
        }
    }
    for (double r : row_sum) total += r;
    if (!(total > 0.0)) return 1.0;
    double g = 0.0;
    for (int a = 0; a < ku; ++a) {
        for (int b = 0; b < kv; ++b) {
            const double o = table[a * kv + b];
            if (o > 0.0) g += o * std::log(o * total / (row_sum[a] * col_sum[b]));
        }
    }
    g *= 2.0;
    const int dof = (ku - 1) * (kv - 1);
    if (dof == 0 || !(g > 0.0)) return 1.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * g);
}

std::vector<int> cluster_instances(const Dataset& data, std::span<const std::size_t> rows,
                                   std::span<const int> variables, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("cluster_instances: k must be at least 2");
    const std::size_t n = rows.size();
    if (n < static_cast<std::size_t>(k)) throw std::invalid_argument("cluster_instances: fewer rows than clusters");

    const auto keys = row_keys(data, rows);
    std::vector<int> assign(n);
    for (std::size_t i = 0; i < n; ++i) assign[i] = static_cast<int>(mix(keys[i], seed) % static_cast<unsigned>(k));

    // log_params[c][j] holds the log-probabilities of variables[j] in cluster c.
    std::vector<std::vector<std::vector<double>>> log_params(k, std::vector<std::vector<double>>(variables.size()));
    std::vector<double> best_ll(n, 0.0);
    for (int iter = 0; iter < kClusterIterations; ++iter) {
        std::vector<std::size_t> size(k, 0);
        for (int c : assign) ++size[c];
        for (int c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < variables.size(); ++j) {
                log_params[c][j].assign(data.cardinality(variables[j]), kClusterSmoothing);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < variables.size(); ++j) {
                log_params[assign[i]][j][data.state(rows[i], variables[j])] += 1.0;
            }
        }
        for (int c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < variables.size(); ++j) {
                const double denom = static_cast<double>(size[c]) + kClusterSmoothing * log_params[c][j].size();
                for (double& p : log_params[c][j]) p = std::log(p / denom);
            }
        }

        std::fill(size.begin(), size.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_value = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double ll = 0.0;
                for (std::size_t j = 0; j < variables.size(); ++j) {
                    ll += log_params[c][j][data.state(rows[i], variables[j])];
                }
                if (ll > best_value) {
                    best_value = ll;
                    best = c;
                }
            }
            assign[i] = best;
            best_ll[i] = best_value;
            ++size[best];
        }

        for (int c = 0; c < k; ++c) {
            if (size[c] > 0) continue;
            std::size_t pick = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (size[assign[i]] < 2) continue;
                if (pick == n || best_ll[i] < best_ll[pick] || (best_ll[i] == best_ll[pick] && keys[i] < keys[pick])) {
                    pick = i;
                }
            }
            --size[assign[pick]];
            assign[pick] = c;
            ++size[c];
            best_ll[pick] = std::numeric_limits<double>::infinity();
        }
    }
    return assign;
}

SpnGraph learn_structure(const Dataset& data, const StructureConfig& config) {
    config.validate();
    if (data.num_variables() == 0) throw std::invalid_argument("learn_structure: empty variable set");
    if (data.empty()) throw std::invalid_argument("learn_structure: empty dataset");
    for (int k : data.cardinalities()) {
        if (k < 1) throw std::invalid_argument("learn_structure: all variables must be discrete");
    }
    std::vector<int> vars(data.num_variables());
    std::iota(vars.begin(), vars.end(), 0);
    Learner learner(data, config);
    const NodeId root = learner.learn(data, vars, 0, config.seed);
    return learner.finish(root);
}

std::size_t count_edges(const SpnGraph& graph) {
    std::size_t total = graph.num_edges();
    for (NodeId l : graph.leaves()) {
        const auto* tree = dynamic_cast<const TreeLeaf*>(graph.node(l).leaf.get());
        if (tree == nullptr) continue;
        const auto& parent = tree->parent();
        const auto& cards = tree->cardinalities();
        std::vector<std::size_t> child_count(parent.size(), 0);
        for (int p : parent) {
            if (p >= 0) ++child_count[p];
        }
        for (std::size_t v = 0; v < parent.size(); ++v) {
            const std::size_t ctx = parent[v] < 0 ? 1 : static_cast<std::size_t>(cards[parent[v]]);
            total += ctx * static_cast<std::size_t>(cards[v]) * (2 + child_count[v]);
        }
    }
    return total;
}

}  // namespace treespn
