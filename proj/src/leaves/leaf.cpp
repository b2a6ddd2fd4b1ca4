#include "treespn/leaf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace treespn {

const char* family_tag(LeafFamily family) {
    switch (family) {
        case LeafFamily::kCategorical: return "categorical";
        case LeafFamily::kGaussian: return "gaussian";
        case LeafFamily::kTree: return "tree";
    }
    return "unknown";
}

LeafModel::LeafModel(std::vector<int> scope) : scope_(std::move(scope)) {
    if (scope_.empty()) throw std::invalid_argument("leaf: empty scope");
    for (int v : scope_) {
        if (v < 0) throw std::invalid_argument("leaf: negative variable index");
    }
}

void LeafModel::gather(const FitBlock& block, std::size_t row, std::vector<double>& out) {
    out.resize(block.columns.size());
    for (std::size_t i = 0; i < block.columns.size(); ++i) out[i] = block.data->at(row, block.columns[i]);
}

double LeafModel::weighted_log_likelihood(std::span<const FitBlock> blocks) const {
    double total = 0.0;
    for (const auto& block : blocks) {
        LeafPtr holder;
        const LeafModel* model = this;
        if (!std::equal(block.columns.begin(), block.columns.end(), scope_.begin(), scope_.end())) {
            holder = rescoped(std::vector<int>(block.columns.begin(), block.columns.end()));
            model = holder.get();
        }
        for (std::size_t n = 0; n < block.weights.size(); ++n) {
            const double w = block.weights[n];
            if (w == 0.0) continue;
            total += w * model->log_density(block.data->row(n));
        }
    }
    return total;
}

double check_fit_blocks(std::span<const FitBlock> blocks, std::size_t arity) {
    if (blocks.empty()) throw std::invalid_argument("fit: no data blocks");
    double total = 0.0;
    for (const auto& block : blocks) {
        if (block.data == nullptr) throw std::invalid_argument("fit: null dataset");
        if (block.columns.size() != arity) throw std::invalid_argument("fit: column map arity mismatch");
        if (block.weights.size() != block.data->num_rows()) {
            throw std::invalid_argument("fit: weight count does not match row count");
        }
        for (int c : block.columns) {
            if (c < 0 || static_cast<std::size_t>(c) >= block.data->num_variables()) {
                throw std::out_of_range("fit: column outside dataset");
            }
        }
        for (double w : block.weights) {
            if (!(w >= 0.0) || std::isinf(w)) throw std::invalid_argument("fit: weights must be finite and nonnegative");
            total += w;
        }
    }
    if (!(total > 0.0)) throw DeadLeafError("fit: total weight is zero");
    return total;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace treespn
