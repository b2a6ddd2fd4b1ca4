#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "treespn/leaves.hpp"

namespace treespn {

namespace {

class DisjointSets {
  public:
    explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[std::max(a, b)] = std::min(a, b);
        return true;
    }

  private:
    std::vector<int> parent_;
};

// Weighted marginal and pairwise counts over local positions. Only nonzero
// states are accumulated per row; zero-state cells follow from the totals.
struct PairCounts {
    int d = 0;
    std::vector<int> cards;
    double total = 0.0;
    std::vector<std::vector<double>> marginal;
    std::vector<std::size_t> offset;  // start of table (i, j), i < j
    std::vector<double> joint;

    std::size_t pair_index(int i, int j) const { return static_cast<std::size_t>(i) * d + j; }
    double* table(int i, int j) { return joint.data() + offset[pair_index(i, j)]; }
    const double* table(int i, int j) const { return joint.data() + offset[pair_index(i, j)]; }
};

PairCounts accumulate(std::span<const FitBlock> blocks) {
    PairCounts counts;
    counts.d = static_cast<int>(blocks.front().columns.size());
    const int d = counts.d;
    for (int c : blocks.front().columns) {
        const int k = blocks.front().data->cardinality(c);
        if (k == kContinuous) throw std::invalid_argument("chow-liu: continuous variable");
        counts.cards.push_back(k);
    }
    for (const auto& block : blocks) {
        for (int i = 0; i < d; ++i) {
            if (block.data->cardinality(block.columns[i]) != counts.cards[i]) {
                throw std::invalid_argument("chow-liu: pooled blocks disagree on cardinalities");
            }
        }
    }
    counts.marginal.resize(d);
    for (int i = 0; i < d; ++i) counts.marginal[i].assign(counts.cards[i], 0.0);
    counts.offset.assign(static_cast<std::size_t>(d) * d, 0);
    std::size_t size = 0;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            counts.offset[counts.pair_index(i, j)] = size;
            size += static_cast<std::size_t>(counts.cards[i]) * counts.cards[j];
        }
    }
    counts.joint.assign(size, 0.0);

    std::vector<std::pair<int, int>> active;
    for (const auto& block : blocks) {
        const Dataset& data = *block.data;
        std::vector<int> local(data.num_variables(), -1);
        bool monotone = true;
        for (int i = 0; i < d; ++i) {
            if (local[block.columns[i]] != -1) throw std::invalid_argument("chow-liu: duplicate column");
            local[block.columns[i]] = i;
            if (i > 0 && block.columns[i] < block.columns[i - 1]) monotone = false;
        }
        for (std::size_t n = 0; n < block.weights.size(); ++n) {
            const double w = block.weights[n];
            if (w == 0.0) continue;
            const RowView row = data.row(n);
            if (!row.complete) {
                for (int c : block.columns) {
                    if (is_marginalized(row[c])) throw std::invalid_argument("chow-liu: missing value in fit data");
                }
            }
            active.clear();
            for (int g : row.nonzero) {
                const int i = local[g];
                if (i >= 0) active.emplace_back(i, static_cast<int>(row[g]));
            }
            if (!monotone) std::sort(active.begin(), active.end());
            counts.total += w;
            for (std::size_t a = 0; a < active.size(); ++a) {
                const auto [i, si] = active[a];
                counts.marginal[i][si] += w;
                for (std::size_t b = a + 1; b < active.size(); ++b) {
                    const auto [j, sj] = active[b];
                    counts.table(i, j)[si * counts.cards[j] + sj] += w;
                }
            }
        }
    }

    auto clamp = [](double x) { return x > 0.0 ? x : 0.0; };
    for (int i = 0; i < d; ++i) {
        double rest = 0.0;
        for (int s = 1; s < counts.cards[i]; ++s) rest += counts.marginal[i][s];
        counts.marginal[i][0] = clamp(counts.total - rest);
    }
    for (int i = 0; i < d; ++i) {
        const int ki = counts.cards[i];
        for (int j = i + 1; j < d; ++j) {
            const int kj = counts.cards[j];
            double* t = counts.table(i, j);
            for (int a = 1; a < ki; ++a) {
                double rest = 0.0;
                for (int b = 1; b < kj; ++b) rest += t[a * kj + b];
                t[a * kj] = clamp(counts.marginal[i][a] - rest);
            }
            for (int b = 1; b < kj; ++b) {
                double rest = 0.0;
                for (int a = 1; a < ki; ++a) rest += t[a * kj + b];
                t[b] = clamp(counts.marginal[j][b] - rest);
            }
            double rest = 0.0;
            for (int b = 1; b < kj; ++b) rest += t[b];
            t[0] = clamp(counts.marginal[i][0] - rest);
        }
    }
    return counts;
}

// Mutual information in nats of the smoothed joint table, 0 log 0 = 0.
double mutual_information(const double* table, int ki, int kj, double smoothing) {
    std::vector<double> rows(ki, 0.0), cols(kj, 0.0);
    double total = 0.0;
    for (int a = 0; a < ki; ++a) {
        for (int b = 0; b < kj; ++b) {
            const double c = table[a * kj + b] + smoothing;
            rows[a] += c;
            cols[b] += c;
            total += c;
        }
    }
    if (!(total > 0.0)) return 0.0;
    double mi = 0.0;
    for (int a = 0; a < ki; ++a) {
        for (int b = 0; b < kj; ++b) {
            const double c = table[a * kj + b] + smoothing;
            if (c <= 0.0) continue;
            mi += c / total * std::log(c * total / (rows[a] * cols[b]));
        }
    }
    return std::max(mi, 0.0);
}

std::vector<double> normalized(std::vector<double> cells) {
    double sum = 0.0;
    for (double c : cells) sum += c;
    if (!(sum > 0.0)) {
        std::fill(cells.begin(), cells.end(), 1.0 / static_cast<double>(cells.size()));
        return cells;
    }
    for (double& c : cells) c /= sum;
    return cells;
}

}  // namespace

std::shared_ptr<const TreeLeaf> chow_liu_weighted(std::span<const FitBlock> blocks, double smoothing) {
    if (smoothing < 0.0) throw std::invalid_argument("chow-liu: negative smoothing");
    const int d = static_cast<int>(blocks.front().columns.size());
    if (d < 1) throw std::invalid_argument("chow-liu: empty scope");
    check_fit_blocks(blocks, d);
    const PairCounts counts = accumulate(blocks);
    const auto& columns = blocks.front().columns;

    struct Edge {
        double mi;
        int lo, hi;  // global ids, lo < hi
        int i, j;    // local positions
    };
    std::vector<Edge> candidates;
    candidates.reserve(static_cast<std::size_t>(d) * (d - 1) / 2);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            const double mi = mutual_information(counts.table(i, j), counts.cards[i], counts.cards[j], smoothing);
            candidates.push_back({mi, std::min(columns[i], columns[j]), std::max(columns[i], columns[j]), i, j});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Edge& a, const Edge& b) {
        if (a.mi != b.mi) return a.mi > b.mi;
        if (a.lo != b.lo) return a.lo < b.lo;
        return a.hi < b.hi;
    });

    std::vector<std::vector<int>> adjacent(d);
    DisjointSets sets(d);
    int added = 0;
    for (const auto& e : candidates) {
        if (added == d - 1) break;
        if (sets.unite(e.i, e.j)) {
            adjacent[e.i].push_back(e.j);
            adjacent[e.j].push_back(e.i);
            ++added;
        }
    }

    const int root = static_cast<int>(std::min_element(columns.begin(), columns.end()) - columns.begin());
    std::vector<int> parent(d, -2);
    parent[root] = -1;
    std::vector<int> queue{root};
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int u = queue[head];
        for (int v : adjacent[u]) {
            if (parent[v] != -2) continue;
            parent[v] = u;
            queue.push_back(v);
        }
    }

    std::vector<std::vector<double>> cpts(d);
    for (int v = 0; v < d; ++v) {
        const int kv = counts.cards[v];
        const int u = parent[v];
        if (u < 0) {
            std::vector<double> cells(kv);
            for (int s = 0; s < kv; ++s) cells[s] = counts.marginal[v][s] + smoothing;
            cpts[v] = normalized(std::move(cells));
            continue;
        }
        const int ku = counts.cards[u];
        const bool forward = u < v;
        const double* t = forward ? counts.table(u, v) : counts.table(v, u);
        cpts[v].reserve(static_cast<std::size_t>(ku) * kv);
        for (int a = 0; a < ku; ++a) {
            std::vector<double> cells(kv);
            for (int b = 0; b < kv; ++b) cells[b] = (forward ? t[a * kv + b] : t[b * ku + a]) + smoothing;
            const auto row = normalized(std::move(cells));
            cpts[v].insert(cpts[v].end(), row.begin(), row.end());
        }
    }
    return std::make_shared<TreeLeaf>(std::vector<int>(columns.begin(), columns.end()), counts.cards, std::move(parent),
                                      std::move(cpts));
}

std::shared_ptr<const TreeLeaf> chow_liu_weighted(const Dataset& data, std::span<const int> columns,
                                                  std::span<const double> weights, double smoothing) {
    const FitBlock block{&data, columns, weights};
    return chow_liu_weighted(std::span<const FitBlock>(&block, 1), smoothing);
}

}  // namespace treespn
