#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "treespn/dataset.hpp"
#include "treespn/em.hpp"
#include "treespn/graph.hpp"
#include "treespn/structure.hpp"

namespace treespn::bench {

// Bad user input: unreadable or malformed files, invalid flag values,
// models that fail validation. The CLI maps it to exit status 2.
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadInput = 2;

struct DatasetSplits {
    Dataset train;
    Dataset valid;
    Dataset test;

    const Dataset& get(Split split) const;
};

// One row per line, comma-separated integer states.
Dataset read_data(std::istream& in, const std::string& file_label, const std::string& name, Split split);
Dataset read_data_file(const std::filesystem::path& path, const std::string& name, Split split);
void write_data(std::ostream& out, const Dataset& data);
void write_data_file(const std::filesystem::path& path, const Dataset& data);

// Reads <name>.ts.data, <name>.valid.data and <name>.test.data; cardinalities
// are max state + 1 over all three files.
DatasetSplits load_dataset(const std::filesystem::path& dir, const std::string& name);

Split parse_split(const std::string& text);

// Published numbers for comparison in reports. Never recomputed.
struct ReportedResult {
    const char* dataset;
    int num_variables;
    int train_rows;
    double treespn_ll;
    double cccp_ll;
    double cvi_ll;
    const char* treespn_edges;
    const char* cccp_edges;
};

std::span<const ReportedResult> reported_results();
// Case-insensitive lookup; nullptr when the dataset is not listed.
const ReportedResult* find_reported(const std::string& dataset);

struct TrainedModel {
    SpnGraph model;
    TrainResult training;
    double train_ll = 0.0;
    double valid_ll = 0.0;
};

// Structure learning on the training split, then EM with validation stopping.
TrainedModel train_model(const DatasetSplits& data, const StructureConfig& structure, const TrainConfig& train);

struct GridSpec {
    std::vector<double> thresholds{0.1, 0.01, 0.001};
    std::vector<int> trees_per_sum{5, 20, 30};
    std::vector<int> max_depths{2, 4, 6};

    std::size_t size() const { return thresholds.size() * trees_per_sum.size() * max_depths.size(); }
    // Point i with its seed derived from the base seed and i.
    StructureConfig point(std::size_t index, const StructureConfig& base) const;
};

struct GridPoint {
    std::size_t index = 0;
    StructureConfig config;
    bool ok = false;
    std::string error;
    double train_ll = 0.0;
    double valid_ll = 0.0;
    double seconds = 0.0;
};

struct DatasetReport {
    std::string dataset;
    std::size_t num_variables = 0;
    std::size_t train_rows = 0;
    std::vector<GridPoint> points;
    std::optional<std::size_t> best;  // index into points
    std::optional<SpnGraph> best_model;
    std::vector<IterationRecord> best_history;
    double test_ll = 0.0;
    std::size_t edges = 0;
    double seconds = 0.0;

    std::size_t completed() const;
};

struct GridOptions {
    GridSpec grid;
    StructureConfig base;
    TrainConfig train;
    int parallel = 1;
    std::ostream* progress = nullptr;  // per-point status lines
};

// Trains every grid point, keeps the one with the highest validation LL
// (lowest index on ties) and evaluates it on the test split. Failed points
// are recorded and skipped.
DatasetReport run_grid(const DatasetSplits& data, const std::string& name, const GridOptions& options);

// Tab-separated report with one row per dataset, published reference
// columns, and trailing '#' summary lines. Contains no timings.
void write_report(std::ostream& out, std::span<const DatasetReport> reports);

// Entry point of the command-line tool; returns the exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace treespn::bench
