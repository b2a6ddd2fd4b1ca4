#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

#include "treespn/bench.hpp"
#include "treespn/inference.hpp"

namespace treespn::bench {

namespace {

std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

std::string short_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

TrainedModel train_model(const DatasetSplits& data, const StructureConfig& structure, const TrainConfig& train) {
    SpnGraph initial = learn_structure(data.train, structure);
    TrainResult result = em_fit(initial, data.train, data.valid, train);
    const double train_ll = result.history[result.best_iteration].train_ll;
    const double valid_ll = result.best_valid_ll;
    SpnGraph model = result.model;
    return {std::move(model), std::move(result), train_ll, valid_ll};
}

StructureConfig GridSpec::point(std::size_t index, const StructureConfig& base) const {
    if (index >= size()) throw std::out_of_range("grid point index out of range");
    StructureConfig c = base;
    const std::size_t nd = max_depths.size();
    const std::size_t nt = trees_per_sum.size();
    c.independence_threshold = thresholds[index / (nt * nd)];
    c.trees_per_sum = trees_per_sum[(index / nd) % nt];
    c.max_depth = max_depths[index % nd];
    c.seed = base.seed + index;
    return c;
}

std::size_t DatasetReport::completed() const {
    std::size_t n = 0;
    for (const auto& p : points) n += p.ok ? 1 : 0;
    return n;
}

DatasetReport run_grid(const DatasetSplits& data, const std::string& name, const GridOptions& options) {
    if (options.grid.size() == 0) throw InputError("grid has no points");
    const auto start = std::chrono::steady_clock::now();

    DatasetReport report;
    report.dataset = name;
    report.num_variables = data.train.num_variables();
    report.train_rows = data.train.num_rows();
    const std::size_t count = options.grid.size();
    report.points.resize(count);
    std::vector<std::optional<TrainedModel>> models(count);

    std::mutex progress_mutex;
    auto run_point = [&](std::size_t i) {
        GridPoint& p = report.points[i];
        p.index = i;
        p.config = options.grid.point(i, options.base);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            models[i] = train_model(data, p.config, options.train);
            p.ok = true;
            p.train_ll = models[i]->train_ll;
            p.valid_ll = models[i]->valid_ll;
        } catch (const std::exception& e) {
            p.error = e.what();
        }
        p.seconds = seconds_since(t0);
        if (options.progress != nullptr) {
            std::lock_guard lock(progress_mutex);
            *options.progress << name << " point " << i + 1 << "/" << count << " threshold "
                              << short_real(p.config.independence_threshold) << " trees " << p.config.trees_per_sum
                              << " depth " << p.config.max_depth << ": ";
            if (p.ok) {
                *options.progress << "valid " << fixed6(p.valid_ll);
            } else {
                *options.progress << "failed: " << p.error;
            }
            *options.progress << " (" << short_real(p.seconds) << " s)\n";
        }
    };

    const int workers = std::max(1, std::min<int>(options.parallel, static_cast<int>(count)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) run_point(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) run_point(i);
            });
        }
        for (auto& t : threads) t.join();
    }

    for (std::size_t i = 0; i < count; ++i) {
        if (!report.points[i].ok) continue;
        if (!report.best || report.points[i].valid_ll > report.points[*report.best].valid_ll) report.best = i;
    }
    if (report.best) {
        TrainedModel& winner = *models[*report.best];
        report.best_history = winner.training.history;
        report.best_model = std::move(winner.model);
        report.test_ll = data.test.empty() ? std::nan("") : log_likelihood(*report.best_model, data.test);
        report.edges = count_edges(*report.best_model);
    }
    report.seconds = seconds_since(start);
    return report;
}

void write_report(std::ostream& out, std::span<const DatasetReport> reports) {
    out << "dataset\tnvars\ttrain_rows\ttest_ll\tedges\tvalid_ll\tthreshold\ttrees_per_sum\tmax_depth"
           "\tpoints_ok\tpoints_failed\treported_treespn_ll\treported_cccp_ll\treported_cvi_ll"
           "\treported_treespn_edges\treported_cccp_edges\n";
    int wins_here = 0;
    int wins_cccp = 0;
    int wins_cvi = 0;
    int compared = 0;
    std::size_t total_edges = 0;
    std::size_t complete = 0;
    for (const auto& r : reports) {
        out << r.dataset << '\t' << r.num_variables << '\t' << r.train_rows << '\t';
        if (r.best) {
            const GridPoint& p = r.points[*r.best];
            out << fixed6(r.test_ll) << '\t' << r.edges << '\t' << fixed6(p.valid_ll) << '\t'
                << short_real(p.config.independence_threshold) << '\t' << p.config.trees_per_sum << '\t'
                << p.config.max_depth;
            total_edges += r.edges;
            ++complete;
        } else {
            out << "NA\tNA\tNA\tNA\tNA\tNA";
        }
        out << '\t' << r.completed() << '\t' << r.points.size() - r.completed();
        const ReportedResult* ref = find_reported(r.dataset);
        if (ref != nullptr) {
            out << '\t' << fixed6(ref->treespn_ll) << '\t' << fixed6(ref->cccp_ll) << '\t' << fixed6(ref->cvi_ll)
                << '\t' << ref->treespn_edges << '\t' << ref->cccp_edges;
            if (r.best && !std::isnan(r.test_ll)) {
                const double top = std::max({r.test_ll, ref->cccp_ll, ref->cvi_ll});
                wins_here += r.test_ll == top;
                wins_cccp += ref->cccp_ll == top;
                wins_cvi += ref->cvi_ll == top;
                ++compared;
            }
        } else {
            out << "\tNA\tNA\tNA\tNA\tNA";
        }
        out << '\n';
    }
    out << "#datasets\t" << reports.size() << "\tcompleted\t" << complete << '\n';
    out << "#wins\tcompared\t" << compared << "\tthis_run\t" << wins_here << "\treported_cccp\t" << wins_cccp
        << "\treported_cvi\t" << wins_cvi << '\n';
    out << "#total_edges\t" << total_edges << '\n';
}

}  // namespace treespn::bench
