#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "treespn/leaves.hpp"

namespace treespn {

namespace {

double log_normalizer(const Eigen::LLT<Eigen::MatrixXd>& llt, Eigen::Index dim) {
    const auto& l = llt.matrixLLT();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) log_det += 2.0 * std::log(l(i, i));
    return -0.5 * (static_cast<double>(dim) * std::log(2.0 * std::numbers::pi) + log_det);
}

}  // namespace

GaussianLeaf::GaussianLeaf(std::vector<int> scope, Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : LeafModel(std::move(scope)), mean_(std::move(mean)), covariance_(std::move(covariance)) {
    const auto d = static_cast<Eigen::Index>(this->scope().size());
    if (mean_.size() != d || covariance_.rows() != d || covariance_.cols() != d) {
        throw std::invalid_argument("gaussian leaf: parameter dimensions do not match scope");
    }
    if (!covariance_.allFinite() || !mean_.allFinite()) throw std::invalid_argument("gaussian leaf: non-finite parameters");
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("gaussian leaf: covariance is not symmetric");
    }
    cholesky_.compute(covariance_);
    if (cholesky_.info() != Eigen::Success) throw std::invalid_argument("gaussian leaf: covariance is not positive definite");
    log_normalizer_ = log_normalizer(cholesky_, d);
}

double GaussianLeaf::log_density(const RowView& x) const {
    const auto d = mean_.size();
    Eigen::VectorXd diff(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double v = x[scope()[i]];
        if (is_marginalized(v)) throw std::invalid_argument("gaussian leaf: unobserved variable in log_density");
        diff(i) = v - mean_(i);
    }
    const Eigen::VectorXd z = cholesky_.matrixL().solve(diff);
    return log_normalizer_ - 0.5 * z.squaredNorm();
}

double GaussianLeaf::log_marginal(const RowView& x) const {
    std::vector<Eigen::Index> observed;
    for (std::size_t i = 0; i < scope().size(); ++i) {
        if (!is_marginalized(x[scope()[i]])) observed.push_back(static_cast<Eigen::Index>(i));
    }
    if (observed.empty()) return 0.0;
    if (observed.size() == scope().size()) return log_density(x);
    const auto m = static_cast<Eigen::Index>(observed.size());
    Eigen::VectorXd diff(m);
    Eigen::MatrixXd cov(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        diff(a) = x[scope()[observed[a]]] - mean_(observed[a]);
        for (Eigen::Index b = 0; b < m; ++b) cov(a, b) = covariance_(observed[a], observed[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::VectorXd z = llt.matrixL().solve(diff);
    return log_normalizer(llt, m) - 0.5 * z.squaredNorm();
}

std::shared_ptr<const GaussianLeaf> fit_gaussian(std::span<const FitBlock> blocks, const FitOptions& options) {
    const std::size_t d = blocks.front().columns.size();
    const double total = check_fit_blocks(blocks, d);
    const auto dim = static_cast<Eigen::Index>(d);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd x(dim);
    for (const auto& block : blocks) {
        for (std::size_t n = 0; n < block.weights.size(); ++n) {
            const double w = block.weights[n];
            if (w == 0.0) continue;
            for (Eigen::Index i = 0; i < dim; ++i) x(i) = block.data->at(n, block.columns[i]);
            mean += w * x;
        }
    }
    mean /= total;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& block : blocks) {
        for (std::size_t n = 0; n < block.weights.size(); ++n) {
            const double w = block.weights[n];
            if (w == 0.0) continue;
            for (Eigen::Index i = 0; i < dim; ++i) x(i) = block.data->at(n, block.columns[i]) - mean(i);
            cov.noalias() += w * x * x.transpose();
        }
    }
    cov /= total;
    cov.diagonal().array() += options.covariance_jitter;
    if (!mean.allFinite()) throw std::invalid_argument("gaussian fit: missing or non-finite values");
    return std::make_shared<GaussianLeaf>(std::vector<int>(blocks.front().columns.begin(), blocks.front().columns.end()),
                                          std::move(mean), std::move(cov));
}

LeafPtr GaussianLeaf::weighted_fit(std::span<const FitBlock> blocks, const FitOptions& options) const {
    if (blocks.front().columns.size() != scope().size()) throw std::invalid_argument("gaussian fit: arity mismatch");
    return fit_gaussian(blocks, options);
}

LeafPtr GaussianLeaf::rescoped(std::vector<int> scope) const {
    return std::make_shared<GaussianLeaf>(std::move(scope), mean_, covariance_);
}

void GaussianLeaf::write_parameters(std::ostream& out) const {
    bool first = true;
    auto put = [&](double v) {
        if (!first) out << ' ';
        out << format_double(v);
        first = false;
    };
    for (Eigen::Index i = 0; i < mean_.size(); ++i) put(mean_(i));
    for (Eigen::Index i = 0; i < covariance_.rows(); ++i) {
        for (Eigen::Index j = 0; j < covariance_.cols(); ++j) put(covariance_(i, j));
    }
}

}  // namespace treespn
