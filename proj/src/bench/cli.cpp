#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "treespn/bench.hpp"
#include "treespn/inference.hpp"
#include "treespn/oracle.hpp"
#include "treespn/serialization.hpp"

namespace treespn::bench {

namespace {

std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

struct CommonFlags {
    std::string data = ".";
    double smoothing = 0.1;
    int num_clusters = 2;
    int min_instances = 50;
    std::uint64_t seed = 0;
    int max_iterations = 100;
    double tolerance = 1e-4;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--data", f.data, "Directory holding <name>.{ts,valid,test}.data")->capture_default_str();
    cmd->add_option("--smoothing", f.smoothing, "Pseudo-count for leaf fits")->capture_default_str();
    cmd->add_option("--num-clusters", f.num_clusters, "Instance clusters per sum node")->capture_default_str();
    cmd->add_option("--min-instances", f.min_instances, "Rows below which a leaf is fit")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
    cmd->add_option("--max-iterations", f.max_iterations, "EM iteration limit")->capture_default_str();
    cmd->add_option("--tolerance", f.tolerance, "Validation LL improvement that stops EM")->capture_default_str();
}

StructureConfig structure_from(const CommonFlags& f) {
    StructureConfig s;
    s.num_clusters = f.num_clusters;
    s.min_instances = f.min_instances;
    s.smoothing = f.smoothing;
    s.seed = f.seed;
    return s;
}

TrainConfig train_from(const CommonFlags& f) {
    TrainConfig t;
    t.max_iterations = f.max_iterations;
    t.ll_tolerance = f.tolerance;
    t.smoothing = f.smoothing;
    t.seed = f.seed;
    try {
        t.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    return t;
}

void check_structure(const StructureConfig& s) {
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
}

void write_log_file(const std::string& path, std::span<const IterationRecord> history) {
    std::ofstream log(path);
    if (!log) throw InputError("cannot open '" + path + "' for writing");
    write_training_log(log, history);
}

int cmd_train(const CommonFlags& f, const std::string& dataset, double threshold, int trees, int depth,
              std::string out_path, std::ostream& out, std::ostream& err) {
    StructureConfig s = structure_from(f);
    s.independence_threshold = threshold;
    s.trees_per_sum = trees;
    s.max_depth = depth;
    check_structure(s);
    const TrainConfig t = train_from(f);
    if (out_path.empty()) out_path = dataset + ".model";

    const DatasetSplits data = load_dataset(f.data, dataset);
    const TrainedModel trained = train_model(data, s, t);
    save_model(out_path, trained.model);
    write_log_file(out_path + ".log.tsv", trained.training.history);

    out << "dataset\ttrain_ll\tvalid_ll\tedges\tbest_iteration\n";
    out << dataset << '\t' << fixed6(trained.train_ll) << '\t' << fixed6(trained.valid_ll) << '\t'
        << count_edges(trained.model) << '\t' << trained.training.best_iteration << '\n';
    err << "wrote " << out_path << " and " << out_path << ".log.tsv\n";
    return kExitOk;
}

int cmd_eval(const std::string& data_dir, const std::string& dataset, const std::string& model_path,
             const std::string& split_name_text, std::ostream& out) {
    const Split split = parse_split(split_name_text);
    std::ifstream in(model_path, std::ios::binary);
    if (!in) throw InputError("cannot open model file '" + model_path + "'");
    const SpnGraph model = read_model(in);
    const DatasetSplits data = load_dataset(data_dir, dataset);
    const Dataset& rows = data.get(split);
    if (rows.empty()) throw InputError(std::string(split_name(split)) + " split of '" + dataset + "' is empty");
    try {
        check_compatible(model, rows);
    } catch (const std::exception& e) {
        throw InputError(std::string("model does not fit the dataset: ") + e.what());
    }
    out << dataset << '\t' << split_name(split) << '\t' << fixed6(log_likelihood(model, rows)) << '\t'
        << count_edges(model) << '\n';
    return kExitOk;
}

int cmd_grid(const CommonFlags& f, const std::vector<std::string>& datasets, const GridSpec& grid, int parallel,
             const std::string& out_dir, std::ostream& out, std::ostream& err) {
    GridOptions options;
    options.grid = grid;
    options.base = structure_from(f);
    options.train = train_from(f);
    options.parallel = parallel;
    options.progress = &err;
    if (grid.size() == 0) throw InputError("grid has no points");
    for (std::size_t i = 0; i < grid.size(); ++i) check_structure(grid.point(i, options.base));
    if (parallel < 1) throw InputError("--parallel must be at least 1");

    std::vector<DatasetSplits> loaded;
    for (const auto& name : datasets) loaded.push_back(load_dataset(f.data, name));

    std::filesystem::create_directories(out_dir);
    std::vector<DatasetReport> reports;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        DatasetReport r = run_grid(loaded[d], datasets[d], options);
        if (r.best_model) {
            const std::string model_path = (std::filesystem::path(out_dir) / (datasets[d] + ".model")).string();
            save_model(model_path, *r.best_model);
            write_log_file(model_path + ".log.tsv", r.best_history);
        }
        err << datasets[d] << ": " << r.completed() << "/" << r.points.size() << " points, wall time " << r.seconds
            << " s\n";
        r.best_model.reset();
        reports.push_back(std::move(r));
    }
    const std::string report_path = (std::filesystem::path(out_dir) / "report.tsv").string();
    std::ofstream report_file(report_path);
    if (!report_file) throw InputError("cannot open '" + report_path + "' for writing");
    write_report(report_file, reports);
    write_report(out, reports);
    for (const auto& r : reports) {
        if (!r.best) return kExitFailure;
    }
    return kExitOk;
}

int cmd_oracle_check(int trials, int max_nodes, int assignments, std::uint64_t seed, bool corrupt,
                     std::ostream& out) {
    if (trials < 0 || max_nodes < 1 || assignments < 0) throw InputError("oracle-check: counts must be nonnegative");
    oracle::OracleCheckConfig config;
    config.trials = trials;
    config.max_internal_nodes = max_nodes;
    config.assignments_per_trial = assignments;
    config.seed = seed;
    if (corrupt) {
        config.corrupt_trace = [](EvalTrace& trace) {
            for (double& d : trace.log_derivative) d += 1e-3;
        };
    }
    const auto r = oracle::run_oracle_check(config);
    char buf[64];
    auto sci = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.3e", x);
        return std::string(buf);
    };
    out << "check\tvalue\n";
    out << "trials\t" << r.trials << '\n';
    out << "comparisons\t" << r.comparisons << '\n';
    out << "max_mixture_residual\t" << sci(r.max_mixture_residual) << '\n';
    out << "max_edge_residual\t" << sci(r.max_edge_residual) << '\n';
    out << "max_derivative_identity_residual\t" << sci(r.max_derivative_identity_residual) << '\n';
    out << "max_factorization_residual\t" << sci(r.max_factorization_residual) << '\n';
    out << "max_coefficient_sum_error\t" << sci(r.max_coefficient_sum_error) << '\n';
    out << "derivative_identity_skipped\t" << r.derivative_identity_skipped << '\n';
    out << "result\t" << (r.passed ? "PASS" : "FAIL") << '\n';
    return r.passed ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sum-product networks with tree leaves: structure learning, EM training and evaluation"};
    app.name("treespn");
    app.require_subcommand(1);

    CommonFlags train_flags;
    std::string train_dataset;
    std::string train_out;
    double threshold = 0.01;
    int trees = 20;
    int depth = 4;
    auto* train = app.add_subcommand("train", "Learn a structure and fit it with EM");
    add_common(train, train_flags);
    train->add_option("--dataset", train_dataset, "Dataset name")->required();
    train->add_option("--threshold", threshold, "Independence test threshold")->capture_default_str();
    train->add_option("--trees-per-sum", trees, "Tree leaves attached to each sum node")->capture_default_str();
    train->add_option("--max-depth", depth, "Maximum sum nodes on a root path")->capture_default_str();
    train->add_option("--out", train_out, "Model file (default <dataset>.model)");

    std::string eval_data = ".";
    std::string eval_dataset;
    std::string eval_model;
    std::string eval_split = "test";
    auto* eval = app.add_subcommand("eval", "Mean log-likelihood and edge count of a saved model");
    eval->add_option("--data", eval_data, "Data directory")->capture_default_str();
    eval->add_option("--dataset", eval_dataset, "Dataset name")->required();
    eval->add_option("--model", eval_model, "Model file")->required();
    eval->add_option("--split", eval_split, "train, valid or test")->capture_default_str();

    CommonFlags grid_flags;
    std::vector<std::string> grid_datasets;
    GridSpec grid;
    int parallel = 1;
    std::string grid_out = ".";
    auto* grid_cmd = app.add_subcommand("grid", "Grid search with validation selection and a TSV report");
    add_common(grid_cmd, grid_flags);
    grid_cmd->add_option("--dataset", grid_datasets, "Dataset names")->required()->delimiter(',');
    grid_cmd->add_option("--threshold", grid.thresholds, "Thresholds to try")->delimiter(',')->capture_default_str();
    grid_cmd->add_option("--trees-per-sum", grid.trees_per_sum, "Tree counts to try")
        ->delimiter(',')
        ->capture_default_str();
    grid_cmd->add_option("--max-depth", grid.max_depths, "Depths to try")->delimiter(',')->capture_default_str();
    grid_cmd->add_option("--parallel", parallel, "Grid points trained concurrently")->capture_default_str();
    grid_cmd->add_option("--out", grid_out, "Output directory for report.tsv and best models")
        ->capture_default_str();

    int trials = 100;
    int max_nodes = 12;
    int assignments = 10;
    std::uint64_t oracle_seed = 0;
    bool corrupt = false;
    auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare inference against subnetwork enumeration");
    oracle_cmd->add_option("--trials", trials, "Random networks")->capture_default_str();
    oracle_cmd->add_option("--max-nodes", max_nodes, "Internal node cap per network")->capture_default_str();
    oracle_cmd->add_option("--assignments", assignments, "Random queries per network")->capture_default_str();
    oracle_cmd->add_option("--seed", oracle_seed, "Random seed")->capture_default_str();
    oracle_cmd->add_flag("--corrupt-derivative", corrupt, "Perturb derivatives before comparing (harness check)");

    std::vector<std::string> argv_storage{"treespn"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (train->parsed()) {
            return cmd_train(train_flags, train_dataset, threshold, trees, depth, train_out, out, err);
        }
        if (eval->parsed()) return cmd_eval(eval_data, eval_dataset, eval_model, eval_split, out);
        if (grid_cmd->parsed()) return cmd_grid(grid_flags, grid_datasets, grid, parallel, grid_out, out, err);
        if (oracle_cmd->parsed()) {
            return cmd_oracle_check(trials, max_nodes, assignments, oracle_seed, corrupt, out);
        }
    } catch (const InvalidGraphError& e) {
        err << "error: model failed validation:\n";
        for (const auto& v : e.violations()) err << "  " << to_string(v) << '\n';
        return kExitBadInput;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const ModelFormatError& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace treespn::bench
