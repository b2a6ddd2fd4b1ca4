#include <cmath>
#include <ostream>
#include <stdexcept>

#include "treespn/leaves.hpp"
#include "treespn/log_math.hpp"

namespace treespn {

CategoricalLeaf::CategoricalLeaf(int variable, std::vector<double> probs)
    : LeafModel({variable}), probs_(std::move(probs)) {
    if (probs_.size() < 1) throw std::invalid_argument("categorical leaf: no states");
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0)) throw std::invalid_argument("categorical leaf: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("categorical leaf: probabilities do not sum to 1");
    log_probs_.reserve(probs_.size());
    for (double p : probs_) log_probs_.push_back(safe_log(p));
}

double CategoricalLeaf::log_density(const RowView& x) const {
    const double value = x[variable()];
    const int s = static_cast<int>(value);
    if (!(value >= 0.0) || s >= cardinality() || s != value) {
        throw std::out_of_range("categorical leaf: state out of range");
    }
    return log_probs_[s];
}

double CategoricalLeaf::log_marginal(const RowView& x) const {
    if (is_marginalized(x[variable()])) return 0.0;
    return log_density(x);
}

LeafPtr CategoricalLeaf::weighted_fit(std::span<const FitBlock> blocks, const FitOptions& options) const {
    const double total = check_fit_blocks(blocks, 1);
    const int k = cardinality();
    std::vector<double> counts(k, 0.0);
    for (const auto& block : blocks) {
        const int column = block.columns[0];
        if (block.data->cardinality(column) != k) throw std::invalid_argument("categorical fit: cardinality mismatch");
        for (std::size_t n = 0; n < block.weights.size(); ++n) {
            const double w = block.weights[n];
            if (w == 0.0) continue;
            const double value = block.data->at(n, column);
            if (is_marginalized(value)) throw std::invalid_argument("categorical fit: missing value");
            counts[static_cast<int>(value)] += w;
        }
    }
    const double denom = total + k * options.smoothing;
    std::vector<double> probs(k);
    double sum = 0.0;
    for (int s = 0; s < k; ++s) {
        probs[s] = (counts[s] + options.smoothing) / denom;
        sum += probs[s];
    }
    for (double& p : probs) p /= sum;
    return std::make_shared<CategoricalLeaf>(blocks.front().columns[0], std::move(probs));
}

LeafPtr CategoricalLeaf::rescoped(std::vector<int> scope) const {
    if (scope.size() != 1) throw std::invalid_argument("categorical leaf: rescope arity mismatch");
    return std::make_shared<CategoricalLeaf>(scope[0], probs_);
}

void CategoricalLeaf::write_parameters(std::ostream& out) const {
    out << cardinality();
    for (double p : probs_) out << ' ' << format_double(p);
}

LeafPtr make_bernoulli(int variable, double p_one) {
    return std::make_shared<CategoricalLeaf>(variable, std::vector<double>{1.0 - p_one, p_one});
}

LeafPtr make_indicator(int variable, int cardinality, int state) {
    std::vector<double> probs(cardinality, 0.0);
    probs.at(state) = 1.0;
    return std::make_shared<CategoricalLeaf>(variable, std::move(probs));
}

}  // namespace treespn
