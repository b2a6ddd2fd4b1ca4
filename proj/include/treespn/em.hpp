#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "treespn/dataset.hpp"
#include "treespn/graph.hpp"

namespace treespn {

// E-step output for one dataset.
struct EmStatistics {
    std::size_t num_samples = 0;
    // Row l of alpha belongs to leaf_ids[l].
    std::vector<NodeId> leaf_ids;
    std::vector<std::size_t> leaf_row;  // node id -> row of alpha (npos for non-leaves)
    // alpha[l][n]: responsibility of leaf l for sample n, divided by
    // alpha_raw_sum[l] when alpha_normalized is set (rows with zero raw sum
    // stay zero).
    std::vector<std::vector<double>> alpha;
    std::vector<double> alpha_raw_sum;
    bool alpha_normalized = false;
    // beta[q][i], indexed by node id and parallel to the children of sum node q.
    std::vector<std::vector<double>> beta;
    // Mean log S(x_n) under the parameters the statistics were computed with.
    double mean_log_likelihood = 0.0;

    // Raw (unnormalized) alpha_ln.
    double raw_alpha(std::size_t row, std::size_t n) const {
        return alpha_normalized ? alpha[row][n] * alpha_raw_sum[row] : alpha[row][n];
    }
};

// Samples with S(x_n) = 0 leave responsibilities undefined.
class ZeroLikelihoodError : public std::runtime_error {
  public:
    explicit ZeroLikelihoodError(std::vector<std::size_t> samples);
    const std::vector<std::size_t>& samples() const { return samples_; }

  private:
    std::vector<std::size_t> samples_;
};

// Sum nodes sharing one weight vector, and leaves sharing one parameter set.
struct TieGroups {
    std::vector<std::vector<NodeId>> weight_groups;
    std::vector<std::vector<NodeId>> leaf_groups;

    // Throws std::invalid_argument for overlapping groups, non-sum members of
    // weight groups, unequal child counts, or leaf groups mixing families,
    // arities or cardinalities.
    void validate(const SpnGraph& graph) const;
};

enum class DeadNodePolicy {
    kKeepPrevious,  // zero total responsibility: keep the current parameters
};

struct TrainConfig {
    int max_iterations = 100;
    double ll_tolerance = 1e-4;  // stop when validation LL improves by less
    bool normalize_alpha = true;
    double smoothing = 0.1;
    double covariance_jitter = 1e-6;
    DeadNodePolicy dead_node_policy = DeadNodePolicy::kKeepPrevious;
    std::uint64_t seed = 0;  // for randomized leaf updaters; exact EM ignores it

    void validate() const;
};

// Produces a leaf update from the weighted blocks. The default solves the
// weighted maximum-likelihood problem exactly; any partial improvement is
// acceptable because the trainer enforces the bound check.
using LeafUpdater = std::function<LeafPtr(const LeafModel& current, std::span<const FitBlock> blocks,
                                          const FitOptions& options, std::uint64_t seed)>;

LeafPtr exact_leaf_update(const LeafModel& current, std::span<const FitBlock> blocks, const FitOptions& options,
                          std::uint64_t seed);

// One up-and-down pass per sample; alpha and beta as products of the pass
// quantities divided by S(x_n), exponentiated from log space.
EmStatistics e_step(const SpnGraph& graph, const Dataset& data, bool normalize_alpha = true);

// New sum weights indexed by node id (empty for non-sum nodes).
std::vector<std::vector<double>> m_step_weights(const SpnGraph& graph, const EmStatistics& stats,
                                                const TieGroups& ties = {});

struct LeafUpdate {
    std::vector<LeafPtr> leaves;  // indexed by node id
    std::size_t reverts = 0;      // updates discarded by the bound check
    std::size_t dead = 0;         // leaves or groups with zero responsibility
};

LeafUpdate m_step_leaves(const SpnGraph& graph, const EmStatistics& stats, const Dataset& data,
                         const TieGroups& ties, const TrainConfig& config,
                         const LeafUpdater& updater = exact_leaf_update);

struct EmStep {
    SpnGraph graph;
    std::size_t reverts = 0;
};

// Joint M-step: weights and leaves both come from the same statistics.
EmStep em_step(const SpnGraph& graph, const EmStatistics& stats, const Dataset& data, const TieGroups& ties,
               const TrainConfig& config, const LeafUpdater& updater = exact_leaf_update);

struct IterationRecord {
    int iteration = 0;
    double train_ll = 0.0;
    double valid_ll = 0.0;
    std::size_t reverts = 0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    SpnGraph model;  // iterate with the best validation LL
    std::vector<IterationRecord> history;
    int best_iteration = 0;
    double best_valid_ll = 0.0;
};

// Iterates e_step and the joint M-step. Validation LL drives stopping and
// model selection; with an empty validation set the training LL is used.
TrainResult em_fit(const SpnGraph& graph, const Dataset& train, const Dataset& valid, const TrainConfig& config,
                   const TieGroups& ties = {}, const LeafUpdater& updater = exact_leaf_update);

// Tab-separated log: iteration, train_ll, valid_ll, leaf_reverts, wall_seconds.
void write_training_log(std::ostream& out, std::span<const IterationRecord> history);

}  // namespace treespn
