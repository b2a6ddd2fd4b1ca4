#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "treespn/leaves.hpp"
#include "treespn/log_math.hpp"

namespace treespn {

TreeLeaf::TreeLeaf(std::vector<int> scope, std::vector<int> cardinalities, std::vector<int> parent,
                   std::vector<std::vector<double>> cpts)
    : LeafModel(std::move(scope)), cards_(std::move(cardinalities)), parent_(std::move(parent)), cpts_(std::move(cpts)) {
    const int d = static_cast<int>(this->scope().size());
    if (static_cast<int>(cards_.size()) != d || static_cast<int>(parent_.size()) != d ||
        static_cast<int>(cpts_.size()) != d) {
        throw std::invalid_argument("tree leaf: parameter arrays do not match scope size");
    }
    root_ = -1;
    for (int v = 0; v < d; ++v) {
        if (cards_[v] < 1) throw std::invalid_argument("tree leaf: cardinality must be positive");
        if (parent_[v] == -1) {
            if (root_ != -1) throw std::invalid_argument("tree leaf: more than one root");
            root_ = v;
        } else if (parent_[v] < 0 || parent_[v] >= d || parent_[v] == v) {
            throw std::invalid_argument("tree leaf: parent index out of range");
        }
    }
    if (root_ == -1) throw std::invalid_argument("tree leaf: no root");
    for (int v = 0; v < d; ++v) {
        int u = v;
        int steps = 0;
        while (parent_[u] != -1) {
            u = parent_[u];
            if (++steps > d) throw std::invalid_argument("tree leaf: parent array contains a cycle");
        }
    }

    child_offsets_.assign(d + 1, 0);
    for (int v = 0; v < d; ++v) {
        if (parent_[v] >= 0) ++child_offsets_[parent_[v] + 1];
    }
    for (int v = 0; v < d; ++v) child_offsets_[v + 1] += child_offsets_[v];
    children_.assign(std::max(d - 1, 0), 0);
    std::vector<int> fill(child_offsets_.begin(), child_offsets_.end() - 1);
    for (int v = 0; v < d; ++v) {
        if (parent_[v] >= 0) children_[fill[parent_[v]]++] = v;
    }
    order_.clear();
    order_.push_back(root_);
    for (std::size_t head = 0; head < order_.size(); ++head) {
        const int u = order_[head];
        for (int i = child_offsets_[u]; i < child_offsets_[u + 1]; ++i) order_.push_back(children_[i]);
    }

    log_cpts_.resize(d);
    log_all_zero_ = 0.0;
    for (int v = 0; v < d; ++v) {
        const int rows = parent_[v] < 0 ? 1 : cards_[parent_[v]];
        const int cols = cards_[v];
        if (static_cast<int>(cpts_[v].size()) != rows * cols) throw std::invalid_argument("tree leaf: CPT size mismatch");
        for (int r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (int c = 0; c < cols; ++c) {
                const double p = cpts_[v][r * cols + c];
                if (!(p >= 0.0)) throw std::invalid_argument("tree leaf: negative CPT entry");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("tree leaf: CPT row does not sum to 1");
        }
        log_cpts_[v].reserve(cpts_[v].size());
        for (double p : cpts_[v]) log_cpts_[v].push_back(safe_log(p));
        log_all_zero_ += log_cpts_[v][0];
    }
    sparse_ok_ = std::isfinite(log_all_zero_);

    const int max_global = *std::max_element(this->scope().begin(), this->scope().end());
    local_index_.assign(max_global + 1, -1);
    for (int v = 0; v < d; ++v) {
        if (local_index_[this->scope()[v]] != -1) throw std::invalid_argument("tree leaf: duplicate variable in scope");
        local_index_[this->scope()[v]] = v;
    }
}

int TreeLeaf::local_of(int global) const {
    return global >= 0 && global < static_cast<int>(local_index_.size()) ? local_index_[global] : -1;
}

double TreeLeaf::conditional(int v, int parent_state, int state) const {
    const int row = parent_[v] < 0 ? 0 : parent_state;
    return cpts_[v][row * cards_[v] + state];
}

std::vector<std::pair<int, int>> TreeLeaf::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int v = 0; v < static_cast<int>(parent_.size()); ++v) {
        if (parent_[v] >= 0) out.emplace_back(std::min(v, parent_[v]), std::max(v, parent_[v]));
    }
    std::sort(out.begin(), out.end());
    return out;
}

double TreeLeaf::log_density(const RowView& x) const {
    if (sparse_ok_ && x.has_nonzero && x.complete) return log_density_sparse(x);
    return log_density_dense(x);
}

double TreeLeaf::log_density_dense(const RowView& x) const {
    const auto& sc = scope();
    auto state_of = [&](int v) {
        const double value = x[sc[v]];
        const int s = static_cast<int>(value);
        if (!(value >= 0.0) || s >= cards_[v] || s != value) throw std::out_of_range("tree leaf: state out of range");
        return s;
    };
    double total = 0.0;
    for (int v = 0; v < static_cast<int>(sc.size()); ++v) {
        const int s = state_of(v);
        const int row = parent_[v] < 0 ? 0 : state_of(parent_[v]);
        total += log_cpts_[v][row * cards_[v] + s];
    }
    return total;
}

// Starts from the all-zero configuration and corrects only the factors that
// touch a nonzero variable.
double TreeLeaf::log_density_sparse(const RowView& x) const {
    thread_local std::vector<std::pair<int, int>> active;
    active.clear();
    for (int g : x.nonzero) {
        const int v = local_of(g);
        if (v < 0) continue;
        const double value = x[g];
        const int s = static_cast<int>(value);
        if (!(value >= 0.0) || s >= cards_[v] || s != value) throw std::out_of_range("tree leaf: state out of range");
        active.emplace_back(v, s);
    }
    if (!std::is_sorted(active.begin(), active.end())) std::sort(active.begin(), active.end());
    auto state_of = [&](int v) {
        auto it = std::lower_bound(active.begin(), active.end(), std::make_pair(v, 0));
        return it != active.end() && it->first == v ? it->second : 0;
    };
    double total = log_all_zero_;
    for (const auto& [v, s] : active) {
        const int row = parent_[v] < 0 ? 0 : state_of(parent_[v]);
        total += log_cpts_[v][row * cards_[v] + s] - log_cpts_[v][0];
        for (int i = child_offsets_[v]; i < child_offsets_[v + 1]; ++i) {
            const int c = children_[i];
            if (state_of(c) != 0) continue;
            total += log_cpts_[c][s * cards_[c]] - log_cpts_[c][0];
        }
    }
    return total;
}

double TreeLeaf::log_marginal(const RowView& x) const {
    const auto& sc = scope();
    const int d = static_cast<int>(sc.size());
    bool any_observed = false;
    for (int g : sc) {
        if (!is_marginalized(x[g])) {
            any_observed = true;
            break;
        }
    }
    if (!any_observed) return 0.0;

    // Upward pass: belief[v][s] = log evidence below v given v = s.
    std::vector<std::vector<double>> belief(d);
    for (int v = 0; v < d; ++v) {
        const double value = x[sc[v]];
        if (is_marginalized(value)) {
            belief[v].assign(cards_[v], 0.0);
        } else {
            const int s = static_cast<int>(value);
            if (!(value >= 0.0) || s >= cards_[v] || s != value) throw std::out_of_range("tree leaf: state out of range");
            belief[v].assign(cards_[v], kLogZero);
            belief[v][s] = 0.0;
        }
    }
    std::vector<double> terms;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        const int v = *it;
        const int u = parent_[v];
        if (u < 0) continue;
        for (int a = 0; a < cards_[u]; ++a) {
            if (belief[u][a] == kLogZero) continue;
            terms.clear();
            for (int s = 0; s < cards_[v]; ++s) terms.push_back(log_cpts_[v][a * cards_[v] + s] + belief[v][s]);
            belief[u][a] += log_sum_exp(terms);
        }
    }
    terms.clear();
    for (int s = 0; s < cards_[root_]; ++s) terms.push_back(log_cpts_[root_][s] + belief[root_][s]);
    return log_sum_exp(terms);
}

LeafPtr TreeLeaf::weighted_fit(std::span<const FitBlock> blocks, const FitOptions& options) const {
    if (blocks.front().columns.size() != scope().size()) throw std::invalid_argument("tree fit: arity mismatch");
    return chow_liu_weighted(blocks, options.smoothing);
}

LeafPtr TreeLeaf::rescoped(std::vector<int> scope) const {
    return std::make_shared<TreeLeaf>(std::move(scope), cards_, parent_, cpts_);
}

void TreeLeaf::write_parameters(std::ostream& out) const {
    for (std::size_t v = 0; v < cards_.size(); ++v) out << (v ? " " : "") << cards_[v];
    for (int p : parent_) out << ' ' << p;
    for (const auto& table : cpts_) {
        for (double p : table) out << ' ' << format_double(p);
    }
}

}  // namespace treespn
