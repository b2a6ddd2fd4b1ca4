#include "treespn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "treespn/leaves.hpp"
#include "treespn/log_math.hpp"

namespace treespn::oracle {

namespace {

std::string refusal_message(double estimated, double cap) {
    std::ostringstream msg;
    msg << "subnetwork enumeration refused: estimated " << estimated << " subnetworks exceeds cap " << cap;
    return msg.str();
}

void merge_into(Subnetwork& into, const Subnetwork& part) {
    into.chosen_child.insert(part.chosen_child.begin(), part.chosen_child.end());
    into.log_coefficient += part.log_coefficient;
    into.leaves.insert(into.leaves.end(), part.leaves.begin(), part.leaves.end());
    into.nodes.insert(into.nodes.end(), part.nodes.begin(), part.nodes.end());
    into.edges.insert(into.edges.end(), part.edges.begin(), part.edges.end());
}

void finalize(Subnetwork& s) {
    std::sort(s.leaves.begin(), s.leaves.end());
    std::sort(s.nodes.begin(), s.nodes.end());
    std::sort(s.edges.begin(), s.edges.end());
}

double log_component_from_trace(const Subnetwork& subnet, const EvalTrace& trace) {
    double total = subnet.log_coefficient;
    for (NodeId l : subnet.leaves) total += trace.log_value[l.index()];
    return total;
}

void check_sum_edge(const SpnGraph& graph, NodeId sum, std::size_t child_index) {
    if (sum.index() >= graph.size() || graph.node(sum).kind != NodeKind::kSum) {
        throw std::invalid_argument("edge (" + std::to_string(sum.value) + ", " + std::to_string(child_index) +
                                    ") is not a sum edge");
    }
    if (child_index >= graph.node(sum).children.size()) {
        throw std::invalid_argument("sum node " + std::to_string(sum.value) + " has no child index " +
                                    std::to_string(child_index));
    }
}

EvalTrace full_trace(const SpnGraph& graph, const Assignment& x) {
    EvalTrace trace = evaluate(graph, x);
    backward(graph, trace);
    return trace;
}

double edge_submixture_from_trace(const SpnGraph& graph, std::span<const Subnetwork> subnets, NodeId sum,
                                  std::size_t child_index, const EvalTrace& trace) {
    const NodeId child = graph.node(sum).children[child_index];
    LogAccumulator acc;
    for (const auto& s : subnets) {
        auto it = s.chosen_child.find(sum);
        if (it != s.chosen_child.end() && it->second == child) acc.add(log_component_from_trace(s, trace));
    }
    return std::exp(acc.value());
}

DerivativeIdentityResult derivative_identity_from_trace(std::span<const Subnetwork> subnets, NodeId node, const EvalTrace& trace) {
    DerivativeIdentityResult r;
    const double log_sq = trace.log_value[node.index()];
    if (log_sq == kLogZero) {
        r.skipped = true;
        r.diagnostic = "node " + std::to_string(node.value) + " evaluates to zero; ratio undefined";
        return r;
    }
    LogAccumulator acc;
    for (const auto& s : subnets) {
        if (s.contains(node)) acc.add(log_component_from_trace(s, trace));
    }
    r.derivative = std::exp(trace.log_derivative[node.index()]);
    r.enumerated = std::exp(acc.value() - log_sq);
    r.residual = relative_residual(r.derivative, r.enumerated);
    return r;
}

// Nodes of the subnetwork reachable from start through its chosen edges.
std::vector<NodeId> reachable_part(const SpnGraph& graph, const Subnetwork& s, NodeId start) {
    std::vector<NodeId> out;
    std::vector<NodeId> stack{start};
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        out.push_back(n);
        const Node& node = graph.node(n);
        if (node.kind == NodeKind::kSum) {
            stack.push_back(s.chosen_child.at(n));
        } else if (node.kind == NodeKind::kProduct) {
            for (NodeId c : node.children) stack.push_back(c);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double weight_of(const SpnGraph& graph, NodeId sum, NodeId child) {
    const Node& n = graph.node(sum);
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (n.children[i] == child) return n.weights[i];
    }
    return 0.0;
}

}  // namespace

double Subnetwork::coefficient() const { return std::exp(log_coefficient); }

bool Subnetwork::contains(NodeId node) const { return std::binary_search(nodes.begin(), nodes.end(), node); }

EnumerationRefused::EnumerationRefused(double estimated, double cap)
    : std::runtime_error(refusal_message(estimated, cap)), estimated_(estimated) {}

double subnetwork_count(const SpnGraph& graph, NodeId node) {
    std::vector<double> count(graph.size(), 0.0);
    for (NodeId id : graph.topo_order()) {
        const Node& n = graph.node(id);
        switch (n.kind) {
            case NodeKind::kLeaf:
                count[id.index()] = 1.0;
                break;
            case NodeKind::kSum: {
                double c = 0.0;
                for (NodeId ch : n.children) c += count[ch.index()];
                count[id.index()] = c;
                break;
            }
            case NodeKind::kProduct: {
                double c = 1.0;
                for (NodeId ch : n.children) c *= count[ch.index()];
                count[id.index()] = c;
                break;
            }
        }
    }
    return count[node.index()];
}

double subnetwork_count(const SpnGraph& graph) { return subnetwork_count(graph, graph.root()); }

std::vector<Subnetwork> enumerate_subnetworks(const SpnGraph& graph, double cap) {
    const double estimated = subnetwork_count(graph);
    if (estimated > cap) throw EnumerationRefused(estimated, cap);

    std::vector<std::vector<Subnetwork>> memo(graph.size());
    for (NodeId id : graph.topo_order()) {
        const Node& n = graph.node(id);
        auto& out = memo[id.index()];
        if (n.kind == NodeKind::kLeaf) {
            Subnetwork s;
            s.leaves = {id};
            s.nodes = {id};
            out.push_back(std::move(s));
        } else if (n.kind == NodeKind::kSum) {
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                const NodeId c = n.children[i];
                for (const auto& part : memo[c.index()]) {
                    Subnetwork s = part;
                    s.chosen_child[id] = c;
                    s.log_coefficient += safe_log(n.weights[i]);
                    s.nodes.push_back(id);
                    s.edges.emplace_back(id, c);
                    out.push_back(std::move(s));
                }
            }
        } else {
            Subnetwork seed;
            seed.nodes = {id};
            out.push_back(std::move(seed));
            for (NodeId c : n.children) {
                std::vector<Subnetwork> joined;
                joined.reserve(out.size() * memo[c.index()].size());
                for (const auto& left : out) {
                    for (const auto& right : memo[c.index()]) {
                        Subnetwork s = left;
                        merge_into(s, right);
                        s.edges.emplace_back(id, c);
                        joined.push_back(std::move(s));
                    }
                }
                out = std::move(joined);
            }
        }
    }
    std::vector<Subnetwork> result = std::move(memo[graph.root().index()]);
    for (auto& s : result) finalize(s);
    return result;
}

double log_component(const SpnGraph& graph, const Subnetwork& subnet, const RowView& x) {
    double total = subnet.log_coefficient;
    for (NodeId l : subnet.leaves) total += graph.node(l).leaf->log_value(x);
    return total;
}

double log_mixture_value(const SpnGraph& graph, std::span<const Subnetwork> subnets, const Assignment& x) {
    const RowView row = x.view();
    LogAccumulator acc;
    for (const auto& s : subnets) acc.add(log_component(graph, s, row));
    return acc.value();
}

double mixture_value(const SpnGraph& graph, std::span<const Subnetwork> subnets, const Assignment& x) {
    return std::exp(log_mixture_value(graph, subnets, x));
}

double edge_submixture_value(const SpnGraph& graph, std::span<const Subnetwork> subnets, NodeId sum,
                             std::size_t child_index, const Assignment& x) {
    check_sum_edge(graph, sum, child_index);
    const NodeId child = graph.node(sum).children[child_index];
    const RowView row = x.view();
    LogAccumulator acc;
    for (const auto& s : subnets) {
        auto it = s.chosen_child.find(sum);
        if (it != s.chosen_child.end() && it->second == child) acc.add(log_component(graph, s, row));
    }
    return std::exp(acc.value());
}

DerivativeIdentityResult derivative_identity_check(const SpnGraph& graph, std::span<const Subnetwork> subnets, NodeId node,
                          const Assignment& x) {
    return derivative_identity_from_trace(subnets, node, full_trace(graph, x));
}

FactorizationResult factorization_check(const SpnGraph& graph, std::span<const Subnetwork> subnets, NodeId sum,
                                        std::size_t child_index, const Assignment& x) {
    check_sum_edge(graph, sum, child_index);
    const NodeId child = graph.node(sum).children[child_index];
    const double log_w = safe_log(graph.node(sum).weights[child_index]);
    const EvalTrace trace = evaluate(graph, x);

    using Key = std::vector<std::pair<NodeId, NodeId>>;
    std::map<Key, double> above;
    std::map<Key, double> below;
    FactorizationResult r;
    LogAccumulator direct;
    for (const auto& s : subnets) {
        auto it = s.chosen_child.find(sum);
        if (it == s.chosen_child.end() || it->second != child) continue;
        ++r.through_edge;
        direct.add(log_component_from_trace(s, trace));

        const std::vector<NodeId> lower = reachable_part(graph, s, child);
        auto in_lower = [&](NodeId n) { return std::binary_search(lower.begin(), lower.end(), n); };
        Key below_key;
        Key above_key;
        double log_below = 0.0;
        double log_above = 0.0;
        for (const auto& [q, c] : s.chosen_child) {
            if (in_lower(q)) {
                below_key.emplace_back(q, c);
                log_below += safe_log(weight_of(graph, q, c));
            } else if (q != sum) {
                above_key.emplace_back(q, c);
                log_above += safe_log(weight_of(graph, q, c));
            }
        }
        for (NodeId l : s.leaves) {
            (in_lower(l) ? log_below : log_above) += trace.log_value[l.index()];
        }
        below.emplace(std::move(below_key), log_below);
        above.emplace(std::move(above_key), log_above);
    }
    LogAccumulator above_sum;
    for (const auto& [k, v] : above) above_sum.add(v);
    LogAccumulator below_sum;
    for (const auto& [k, v] : below) below_sum.add(v);
    r.above_parts = above.size();
    r.below_parts = below.size();
    r.direct = std::exp(direct.value());
    r.factored = std::exp(log_w + above_sum.value() + below_sum.value());
    r.residual = relative_residual(r.direct, r.factored);
    return r;
}

double relative_residual(double reference, double value) {
    const double diff = std::abs(reference - value);
    return reference == 0.0 ? diff : diff / std::abs(reference);
}

namespace {

class RandomSpnBuilder {
  public:
    RandomSpnBuilder(std::mt19937_64& rng, const RandomSpnOptions& options, int num_vars)
        : rng_(rng), options_(options), builder_(std::vector<int>(num_vars, 2)) {}

    NodeId make(const std::vector<int>& scope, int depth) {
        auto& existing = by_scope_[scope];
        if (!existing.empty() && chance(options_.reuse_probability)) {
            return existing[pick(existing.size())];
        }
        NodeId id;
        const bool deep = depth >= 4 || internal_ >= options_.max_internal_nodes;
        if (scope.size() == 1 && (deep || chance(0.5))) {
            std::uniform_real_distribution<double> p(0.05, 0.95);
            id = builder_.add_leaf(make_bernoulli(scope.front(), p(rng_)));
        } else if (scope.size() > 1 && (deep || chance(0.5))) {
            id = make_product(scope, depth);
        } else {
            id = make_sum(scope, depth);
        }
        by_scope_[scope].push_back(id);
        return id;
    }

    int internal() const { return internal_; }
    GraphBuilder& builder() { return builder_; }

  private:
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    NodeId make_product(std::vector<int> scope, int depth) {
        ++internal_;
        std::shuffle(scope.begin(), scope.end(), rng_);
        const std::size_t k =
            2 + pick(std::min<std::size_t>(scope.size(), static_cast<std::size_t>(options_.max_children)) - 1);
        std::vector<std::vector<int>> parts(k);
        for (std::size_t i = 0; i < scope.size(); ++i) parts[i < k ? i : pick(k)].push_back(scope[i]);
        std::vector<NodeId> children;
        for (auto& part : parts) {
            std::sort(part.begin(), part.end());
            children.push_back(make(part, depth + 1));
        }
        return builder_.add_product(std::move(children));
    }

    NodeId make_sum(const std::vector<int>& scope, int depth) {
        ++internal_;
        const std::size_t k = 2 + pick(static_cast<std::size_t>(options_.max_children) - 1);
        std::vector<NodeId> children;
        std::vector<double> weights;
        std::uniform_real_distribution<double> w(0.05, 1.0);
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            children.push_back(make(scope, depth + 1));
            weights.push_back(w(rng_));
            total += weights.back();
        }
        for (double& x : weights) x /= total;
        return builder_.add_sum(std::move(children), std::move(weights));
    }

    std::mt19937_64& rng_;
    const RandomSpnOptions& options_;
    GraphBuilder builder_;
    std::map<std::vector<int>, std::vector<NodeId>> by_scope_;
    int internal_ = 0;
};

}  // namespace

SpnGraph random_spn(std::mt19937_64& rng, const RandomSpnOptions& options) {
    if (options.max_children < 2 || options.min_variables < 1 || options.max_variables < options.min_variables) {
        throw std::invalid_argument("random_spn: bad options");
    }
    for (;;) {
        const int num_vars = std::uniform_int_distribution<int>(options.min_variables, options.max_variables)(rng);
        std::vector<int> scope(num_vars);
        for (int v = 0; v < num_vars; ++v) scope[v] = v;
        RandomSpnBuilder gen(rng, options, num_vars);
        const NodeId root = gen.make(scope, 0);
        if (gen.internal() > options.max_internal_nodes) continue;
        gen.builder().set_root(root);
        return gen.builder().freeze();
    }
}

Assignment random_assignment(std::mt19937_64& rng, std::span<const int> cardinalities,
                             double marginalize_probability) {
    Assignment x(cardinalities.size());
    std::bernoulli_distribution hide(marginalize_probability);
    for (std::size_t v = 0; v < cardinalities.size(); ++v) {
        if (hide(rng)) continue;
        x.observe(v, std::uniform_int_distribution<int>(0, cardinalities[v] - 1)(rng));
    }
    return x;
}

OracleCheckReport run_oracle_check(const OracleCheckConfig& config) {
    OracleCheckReport report;
    RandomSpnOptions options;
    options.max_internal_nodes = config.max_internal_nodes;
    for (int t = 0; t < config.trials; ++t) {
        std::mt19937_64 rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(t));
        const SpnGraph graph = random_spn(rng, options);
        const auto subnets = enumerate_subnetworks(graph);
        ++report.trials;

        double coefficient_sum = 0.0;
        for (const auto& s : subnets) coefficient_sum += s.coefficient();
        report.max_coefficient_sum_error = std::max(report.max_coefficient_sum_error, std::abs(coefficient_sum - 1.0));

        for (int a = 0; a < config.assignments_per_trial; ++a) {
            const Assignment x = random_assignment(rng, graph.cardinalities());
            EvalTrace trace = full_trace(graph, x);
            if (config.corrupt_trace) config.corrupt_trace(trace);

            const double spn_value = std::exp(trace.log_root(graph));
            report.max_mixture_residual = std::max(report.max_mixture_residual,
                                                   relative_residual(mixture_value(graph, subnets, x), spn_value));
            ++report.comparisons;

            for (NodeId q : graph.sum_nodes()) {
                const Node& n = graph.node(q);
                for (std::size_t i = 0; i < n.children.size(); ++i) {
                    const double enumerated = edge_submixture_from_trace(graph, subnets, q, i, trace);
                    const double from_passes = n.weights[i] * std::exp(trace.log_derivative[q.index()] +
                                                                       trace.log_value[n.children[i].index()]);
                    report.max_edge_residual =
                        std::max(report.max_edge_residual, relative_residual(enumerated, from_passes));
                    const auto f = factorization_check(graph, subnets, q, i, x);
                    report.max_factorization_residual = std::max(report.max_factorization_residual, f.residual);
                    report.comparisons += 2;
                }
            }
            for (NodeId id : graph.topo_order()) {
                const auto r = derivative_identity_from_trace(subnets, id, trace);
                if (r.skipped) {
                    ++report.derivative_identity_skipped;
                    continue;
                }
                report.max_derivative_identity_residual = std::max(report.max_derivative_identity_residual, r.residual);
                ++report.comparisons;
            }
        }
    }
    report.passed = report.max_mixture_residual < config.tolerance && report.max_edge_residual < config.tolerance &&
                    report.max_derivative_identity_residual < config.tolerance &&
                    report.max_factorization_residual < config.tolerance &&
                    report.max_coefficient_sum_error < config.tolerance;
    return report;
}

}  // namespace treespn::oracle
