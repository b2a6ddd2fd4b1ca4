#include "treespn/em.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <string>

#include "treespn/inference.hpp"
#include "treespn/leaves.hpp"
#include "treespn/log_math.hpp"

namespace treespn {

namespace {

constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();

std::string describe_samples(const std::vector<std::size_t>& samples) {
    std::string msg = "zero-likelihood samples:";
    const std::size_t shown = std::min<std::size_t>(samples.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg += " " + std::to_string(samples[i]);
    if (shown < samples.size()) msg += " ... (" + std::to_string(samples.size()) + " total)";
    return msg;
}

// Discard tolerance for the bound check; absorbs rounding when the update
// reproduces the current optimum.
bool violates_bound(double new_ll, double old_ll) {
    return new_ll < old_ll - 1e-12 * std::max(1.0, std::abs(old_ll));
}

std::vector<double> normalized_copy(std::vector<double> w) {
    double sum = 0.0;
    for (double x : w) sum += x;
    for (double& x : w) x /= sum;
    return w;
}

}  // namespace

ZeroLikelihoodError::ZeroLikelihoodError(std::vector<std::size_t> samples)
    : std::runtime_error(describe_samples(samples)), samples_(std::move(samples)) {}

void TieGroups::validate(const SpnGraph& graph) const {
    std::set<NodeId> used;
    for (const auto& group : weight_groups) {
        if (group.empty()) throw std::invalid_argument("tie groups: empty weight group");
        const std::size_t arity = graph.node(group.front()).children.size();
        for (NodeId q : group) {
            if (q.index() >= graph.size() || graph.node(q).kind != NodeKind::kSum) {
                throw std::invalid_argument("tie groups: weight group member is not a sum node");
            }
            if (graph.node(q).children.size() != arity) {
                throw std::invalid_argument("tie groups: tied sum nodes differ in child count");
            }
            if (!used.insert(q).second) throw std::invalid_argument("tie groups: node in more than one group");
        }
    }
    used.clear();
    for (const auto& group : leaf_groups) {
        if (group.empty()) throw std::invalid_argument("tie groups: empty leaf group");
        for (NodeId l : group) {
            if (l.index() >= graph.size() || graph.node(l).kind != NodeKind::kLeaf) {
                throw std::invalid_argument("tie groups: leaf group member is not a leaf");
            }
            if (!used.insert(l).second) throw std::invalid_argument("tie groups: leaf in more than one group");
        }
        const LeafModel& first = *graph.node(group.front()).leaf;
        for (NodeId l : group) {
            const LeafModel& leaf = *graph.node(l).leaf;
            if (leaf.family() != first.family() || leaf.scope().size() != first.scope().size()) {
                throw std::invalid_argument("tie groups: shared leaves must have the same family and arity");
            }
            for (std::size_t i = 0; i < leaf.scope().size(); ++i) {
                if (graph.cardinalities()[leaf.scope()[i]] != graph.cardinalities()[first.scope()[i]]) {
                    throw std::invalid_argument("tie groups: shared leaves differ in variable cardinalities");
                }
            }
        }
    }
}

void TrainConfig::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("train config: max_iterations must be at least 1");
    if (!(ll_tolerance > 0.0)) throw std::invalid_argument("train config: ll_tolerance must be positive");
    if (!(smoothing >= 0.0)) throw std::invalid_argument("train config: smoothing must be nonnegative");
    if (!(covariance_jitter >= 0.0)) throw std::invalid_argument("train config: jitter must be nonnegative");
}

LeafPtr exact_leaf_update(const LeafModel& current, std::span<const FitBlock> blocks, const FitOptions& options,
                          std::uint64_t) {
    return current.weighted_fit(blocks, options);
}

EmStatistics e_step(const SpnGraph& graph, const Dataset& data, bool normalize_alpha) {
    if (data.empty()) throw std::invalid_argument("e_step: empty dataset");
    check_compatible(graph, data);
    const std::size_t n_samples = data.num_rows();

    EmStatistics stats;
    stats.num_samples = n_samples;
    stats.leaf_ids = graph.leaves();
    stats.leaf_row.assign(graph.size(), kNoRow);
    for (std::size_t r = 0; r < stats.leaf_ids.size(); ++r) stats.leaf_row[stats.leaf_ids[r].index()] = r;
    stats.alpha.assign(stats.leaf_ids.size(), std::vector<double>(n_samples, 0.0));
    stats.alpha_raw_sum.assign(stats.leaf_ids.size(), 0.0);
    stats.beta.assign(graph.size(), {});
    for (NodeId q : graph.sum_nodes()) stats.beta[q.index()].assign(graph.node(q).children.size(), 0.0);

    std::vector<std::size_t> zero_samples;
    double total_ll = 0.0;
    EvalTrace trace;
    for (std::size_t n = 0; n < n_samples; ++n) {
        evaluate_into(graph, data.row(n), trace);
        const double log_s = trace.log_root(graph);
        if (log_s == kLogZero) {
            zero_samples.push_back(n);
            continue;
        }
        total_ll += log_s;
        backward(graph, trace);
        for (std::size_t r = 0; r < stats.leaf_ids.size(); ++r) {
            const std::size_t l = stats.leaf_ids[r].index();
            const double a = std::exp(trace.log_derivative[l] + trace.log_value[l] - log_s);
            stats.alpha[r][n] = a;
            stats.alpha_raw_sum[r] += a;
        }
        for (NodeId q : graph.sum_nodes()) {
            const Node& node = graph.node(q);
            const double dq = trace.log_derivative[q.index()];
            if (dq == kLogZero) continue;
            auto& beta = stats.beta[q.index()];
            for (std::size_t i = 0; i < node.children.size(); ++i) {
                if (node.weights[i] <= 0.0) continue;
                beta[i] += std::exp(std::log(node.weights[i]) + dq + trace.log_value[node.children[i].index()] - log_s);
            }
        }
    }
    if (!zero_samples.empty()) throw ZeroLikelihoodError(std::move(zero_samples));
    stats.mean_log_likelihood = total_ll / static_cast<double>(n_samples);

    if (normalize_alpha) {
        stats.alpha_normalized = true;
        for (std::size_t r = 0; r < stats.alpha.size(); ++r) {
            const double sum = stats.alpha_raw_sum[r];
            if (sum > 0.0) {
                for (double& a : stats.alpha[r]) a /= sum;
            }
        }
    }
    return stats;
}

std::vector<std::vector<double>> m_step_weights(const SpnGraph& graph, const EmStatistics& stats,
                                                const TieGroups& ties) {
    ties.validate(graph);
    std::vector<std::vector<double>> weights = graph.weights_by_node();
    std::vector<bool> tied(graph.size(), false);

    for (const auto& group : ties.weight_groups) {
        const std::size_t arity = graph.node(group.front()).children.size();
        std::vector<double> pooled(arity, 0.0);
        for (NodeId q : group) {
            tied[q.index()] = true;
            for (std::size_t j = 0; j < arity; ++j) pooled[j] += stats.beta[q.index()][j];
        }
        double total = 0.0;
        for (double b : pooled) total += b;
        if (!(total > 0.0)) continue;  // dead group keeps its weights
        for (double& b : pooled) b /= total;
        pooled = normalized_copy(std::move(pooled));
        for (NodeId q : group) weights[q.index()] = pooled;
    }
    for (NodeId q : graph.sum_nodes()) {
        if (tied[q.index()]) continue;
        const auto& beta = stats.beta[q.index()];
        double total = 0.0;
        for (double b : beta) total += b;
        if (!(total > 0.0)) continue;
        std::vector<double> w(beta.size());
        for (std::size_t j = 0; j < beta.size(); ++j) w[j] = beta[j] / total;
        weights[q.index()] = normalized_copy(std::move(w));
    }
    return weights;
}

LeafUpdate m_step_leaves(const SpnGraph& graph, const EmStatistics& stats, const Dataset& data,
                         const TieGroups& ties, const TrainConfig& config, const LeafUpdater& updater) {
    ties.validate(graph);
    LeafUpdate out;
    out.leaves = graph.leaves_by_node();

    std::vector<std::vector<NodeId>> groups = ties.leaf_groups;
    std::vector<bool> tied(graph.size(), false);
    for (const auto& g : groups) {
        for (NodeId l : g) tied[l.index()] = true;
    }
    for (NodeId l : graph.leaves()) {
        if (!tied[l.index()]) groups.push_back({l});
    }

    for (const auto& group : groups) {
        double raw_total = 0.0;
        for (NodeId l : group) raw_total += stats.alpha_raw_sum[stats.leaf_row[l.index()]];
        if (!(raw_total > 0.0)) {
            ++out.dead;
            continue;
        }

        // Weights handed to the fit: the stored alpha for a single normalized
        // leaf, otherwise raw alpha scaled by the group's total responsibility.
        // Smoothing is expressed in sample units, so it is scaled alike.
        std::vector<std::vector<double>> scaled;
        std::vector<FitBlock> blocks;
        double scale = 1.0;
        const bool single = group.size() == 1;
        if (config.normalize_alpha) scale = 1.0 / raw_total;
        for (NodeId l : group) {
            const std::size_t row = stats.leaf_row[l.index()];
            const auto& scope = graph.node(l).leaf->scope();
            if (single && stats.alpha_normalized == config.normalize_alpha) {
                blocks.push_back({&data, scope, stats.alpha[row]});
                continue;
            }
            std::vector<double> w(stats.num_samples);
            for (std::size_t n = 0; n < stats.num_samples; ++n) w[n] = stats.raw_alpha(row, n) * scale;
            scaled.push_back(std::move(w));
        }
        if (!scaled.empty()) {
            for (std::size_t i = 0; i < group.size(); ++i) {
                blocks.push_back({&data, graph.node(group[i]).leaf->scope(), scaled[i]});
            }
        }
        FitOptions options;
        options.smoothing = config.smoothing * scale;
        options.covariance_jitter = config.covariance_jitter;

        const LeafModel& current = *graph.node(group.front()).leaf;
        LeafPtr fitted;
        try {
            fitted = updater(current, blocks, options, config.seed);
        } catch (const DeadLeafError&) {
            ++out.dead;
            continue;
        }
        std::vector<LeafPtr> members;
        for (NodeId l : group) {
            members.push_back(l == group.front() && fitted->scope() == graph.node(l).leaf->scope()
                                  ? fitted
                                  : fitted->rescoped(graph.node(l).leaf->scope()));
        }

        double old_ll = 0.0;
        double new_ll = 0.0;
        for (std::size_t i = 0; i < group.size(); ++i) {
            const FitBlock& block = blocks[i];
            old_ll += graph.node(group[i]).leaf->weighted_log_likelihood(std::span<const FitBlock>(&block, 1));
            new_ll += members[i]->weighted_log_likelihood(std::span<const FitBlock>(&block, 1));
        }
        if (violates_bound(new_ll, old_ll) || std::isnan(new_ll)) {
            ++out.reverts;
            continue;
        }
        for (std::size_t i = 0; i < group.size(); ++i) out.leaves[group[i].index()] = members[i];
    }
    return out;
}

EmStep em_step(const SpnGraph& graph, const EmStatistics& stats, const Dataset& data, const TieGroups& ties,
               const TrainConfig& config, const LeafUpdater& updater) {
    auto weights = m_step_weights(graph, stats, ties);
    auto leaves = m_step_leaves(graph, stats, data, ties, config, updater);
    return {graph.reparameterized(weights, leaves.leaves), leaves.reverts};
}

TrainResult em_fit(const SpnGraph& graph, const Dataset& train, const Dataset& valid, const TrainConfig& config,
                   const TieGroups& ties, const LeafUpdater& updater) {
    config.validate();
    ties.validate(graph);
    if (train.empty()) throw std::invalid_argument("em_fit: empty training set");
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

    auto valid_ll = [&](const SpnGraph& g, double train_ll) {
        return valid.empty() ? train_ll : log_likelihood(g, valid);
    };

    SpnGraph current = graph;
    EmStatistics stats = e_step(current, train, config.normalize_alpha);
    double current_valid = valid_ll(current, stats.mean_log_likelihood);

    TrainResult result{current, {}, 0, current_valid};
    result.history.push_back({0, stats.mean_log_likelihood, current_valid, 0, elapsed()});

    for (int it = 1; it <= config.max_iterations; ++it) {
        EmStep step = em_step(current, stats, train, ties, config, updater);
        EmStatistics next_stats = e_step(step.graph, train, config.normalize_alpha);
        const double next_valid = valid_ll(step.graph, next_stats.mean_log_likelihood);
        result.history.push_back({it, next_stats.mean_log_likelihood, next_valid, step.reverts, elapsed()});

        const double improvement = next_valid - current_valid;
        current = std::move(step.graph);
        stats = std::move(next_stats);
        current_valid = next_valid;
        if (next_valid > result.best_valid_ll) {
            result.model = current;
            result.best_valid_ll = next_valid;
            result.best_iteration = it;
        }
        if (improvement < config.ll_tolerance) break;
    }
    return result;
}

void write_training_log(std::ostream& out, std::span<const IterationRecord> history) {
    out << "iteration\ttrain_ll\tvalid_ll\tleaf_reverts\twall_seconds\n";
    for (const auto& r : history) {
        out << r.iteration << '\t' << format_double(r.train_ll) << '\t' << format_double(r.valid_ll) << '\t'
            << r.reverts << '\t' << format_double(r.wall_seconds) << '\n';
    }
}

}  // namespace treespn
