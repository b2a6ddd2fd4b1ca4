#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "treespn/leaf.hpp"

namespace treespn {

// Distribution over the states of one discrete variable. Bernoulli is the
// two-state case and an indicator puts all mass on one state.
class CategoricalLeaf final : public LeafModel {
  public:
    CategoricalLeaf(int variable, std::vector<double> probs);

    LeafFamily family() const override { return LeafFamily::kCategorical; }
    int variable() const { return scope().front(); }
    int cardinality() const { return static_cast<int>(probs_.size()); }
    const std::vector<double>& probs() const { return probs_; }

    double log_density(const RowView& x) const override;
    double log_marginal(const RowView& x) const override;
    LeafPtr weighted_fit(std::span<const FitBlock> blocks, const FitOptions& options) const override;
    LeafPtr rescoped(std::vector<int> scope) const override;
    void write_parameters(std::ostream& out) const override;

  private:
    std::vector<double> probs_;
    std::vector<double> log_probs_;
};

LeafPtr make_bernoulli(int variable, double p_one);
LeafPtr make_indicator(int variable, int cardinality, int state);

// Multivariate normal N(mean, covariance) over real-valued variables.
class GaussianLeaf final : public LeafModel {
  public:
    GaussianLeaf(std::vector<int> scope, Eigen::VectorXd mean, Eigen::MatrixXd covariance);

    LeafFamily family() const override { return LeafFamily::kGaussian; }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return covariance_; }

    double log_density(const RowView& x) const override;
    double log_marginal(const RowView& x) const override;
    LeafPtr weighted_fit(std::span<const FitBlock> blocks, const FitOptions& options) const override;
    LeafPtr rescoped(std::vector<int> scope) const override;
    void write_parameters(std::ostream& out) const override;

  private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd covariance_;
    Eigen::LLT<Eigen::MatrixXd> cholesky_;
    double log_normalizer_ = 0.0;
};

// Fits a Gaussian by weighted maximum likelihood; shared by GaussianLeaf and
// tests that need a free-standing fit.
std::shared_ptr<const GaussianLeaf> fit_gaussian(std::span<const FitBlock> blocks, const FitOptions& options);

// Tree-structured graphical model over discrete variables. Positions are local
// to the scope: parent[v] is the local index of v's parent, -1 for the root.
// cpt[v] is row-major with one row per parent state (a single row for the
// root) and one column per state of v.
class TreeLeaf final : public LeafModel {
  public:
    TreeLeaf(std::vector<int> scope, std::vector<int> cardinalities, std::vector<int> parent,
             std::vector<std::vector<double>> cpts);

    LeafFamily family() const override { return LeafFamily::kTree; }
    std::size_t size() const { return scope().size(); }
    const std::vector<int>& cardinalities() const { return cards_; }
    const std::vector<int>& parent() const { return parent_; }
    const std::vector<std::vector<double>>& cpts() const { return cpts_; }
    int root() const { return root_; }

    // P(v = state | parent(v) = parent_state); parent_state is ignored at the root.
    double conditional(int v, int parent_state, int state) const;

    // Undirected edges as (min local, max local) pairs, sorted.
    std::vector<std::pair<int, int>> edges() const;

    double log_density(const RowView& x) const override;
    double log_marginal(const RowView& x) const override;
    LeafPtr weighted_fit(std::span<const FitBlock> blocks, const FitOptions& options) const override;
    LeafPtr rescoped(std::vector<int> scope) const override;
    void write_parameters(std::ostream& out) const override;

  private:
    double log_density_dense(const RowView& x) const;
    double log_density_sparse(const RowView& x) const;
    int local_of(int global) const;

    std::vector<int> cards_;
    std::vector<int> parent_;
    std::vector<std::vector<double>> cpts_;
    std::vector<std::vector<double>> log_cpts_;
    int root_ = 0;
    std::vector<int> order_;  // parents before children
    std::vector<int> child_offsets_;
    std::vector<int> children_;
    std::vector<int> local_index_;  // global id -> local position or -1
    double log_all_zero_ = 0.0;
    bool sparse_ok_ = false;
};

// Weighted Chow-Liu: smoothed weighted pairwise joints, mutual information in
// nats, maximum spanning tree by Kruskal with edges ordered by decreasing MI
// then (min index, max index), rooted at the lowest global variable index.
std::shared_ptr<const TreeLeaf> chow_liu_weighted(std::span<const FitBlock> blocks, double smoothing);
std::shared_ptr<const TreeLeaf> chow_liu_weighted(const Dataset& data, std::span<const int> columns,
                                                  std::span<const double> weights, double smoothing);

// Reads "<tag> <scope...> <params...>" as written by write_leaf.
LeafPtr read_leaf(std::istream& in);
void write_leaf(std::ostream& out, const LeafModel& leaf);

}  // namespace treespn
