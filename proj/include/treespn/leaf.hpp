#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "treespn/dataset.hpp"

namespace treespn {

enum class LeafFamily { kCategorical, kGaussian, kTree };

const char* family_tag(LeafFamily family);

// One weighted data source for a leaf fit. `columns` maps the leaf's local
// variable positions onto dataset columns; `weights` has one entry per row.
// Several blocks are pooled when leaves share parameters.
struct FitBlock {
    const Dataset* data = nullptr;
    std::span<const int> columns;
    std::span<const double> weights;
};

// Thrown when a fit receives zero total weight: the leaf is dead for this
// round and callers keep its previous parameters.
class DeadLeafError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct FitOptions {
    // Laplace pseudo-count added to every weighted discrete count cell.
    double smoothing = 0.1;
    // Added to the covariance diagonal after the weighted update.
    double covariance_jitter = 1e-6;
};

class LeafModel;
using LeafPtr = std::shared_ptr<const LeafModel>;

// Contract for leaf distributions phi_l(X_l | theta_l).
//
// Implementations are immutable: fitting returns a fresh model. Log-values are
// read from full rows indexed by global variable ids; `scope()` names them.
class LeafModel {
  public:
    virtual ~LeafModel() = default;

    virtual LeafFamily family() const = 0;
    const std::vector<int>& scope() const { return scope_; }

    // log phi(x); every scope variable must be observed.
    virtual double log_density(const RowView& x) const = 0;
    // log of phi with marginalized scope variables summed/integrated out.
    virtual double log_marginal(const RowView& x) const = 0;

    // Dispatches to log_density when the row is complete.
    double log_value(const RowView& x) const { return x.complete ? log_density(x) : log_marginal(x); }

    // Weighted maximum likelihood over the pooled blocks. The result's scope is
    // the first block's column list.
    virtual LeafPtr weighted_fit(std::span<const FitBlock> blocks, const FitOptions& options) const = 0;

    // Same parameters over another variable set of equal arity and cardinalities.
    virtual LeafPtr rescoped(std::vector<int> scope) const = 0;

    // Family parameters in the model file layout (after tag and scope).
    virtual void write_parameters(std::ostream& out) const = 0;

    // Sum_n w_n log phi(x_n) over the pooled blocks, with rows read through the
    // block column maps.
    double weighted_log_likelihood(std::span<const FitBlock> blocks) const;

  protected:
    explicit LeafModel(std::vector<int> scope);

    // Local-position view of a block row: values[i] is column columns[i].
    static void gather(const FitBlock& block, std::size_t row, std::vector<double>& out);

  private:
    std::vector<int> scope_;
};

// Checks that every block has one weight per row, that column maps have the
// expected arity, and that total weight is positive. Returns the total weight.
double check_fit_blocks(std::span<const FitBlock> blocks, std::size_t arity);

std::string format_double(double x);

}  // namespace treespn
