#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace treespn {

// Cardinality marker for a real-valued variable.
inline constexpr int kContinuous = 0;

// Value stored for a marginalized (unobserved) variable.
inline constexpr double kMarginalized = std::numeric_limits<double>::quiet_NaN();

inline bool is_marginalized(double v) { return std::isnan(v); }

// Read-only view of one sample over all variables of a model.
//
// `nonzero` lists the variables whose value differs from 0, when the owner
// precomputed it; leaves use it to skip work on sparse binary rows. It is
// only meaningful when `has_nonzero` is set. `complete` promises that no
// entry is marginalized.
struct RowView {
    std::span<const double> values;
    std::span<const int> nonzero;
    bool has_nonzero = false;
    bool complete = false;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t v) const { return values[v]; }
};

// A single query: each variable is either observed (discrete state or real
// value) or marginalized.
class Assignment {
  public:
    Assignment() = default;
    explicit Assignment(std::size_t num_variables) : values_(num_variables, kMarginalized) {}
    explicit Assignment(std::vector<double> values) : values_(std::move(values)) {}

    static Assignment all_marginalized(std::size_t num_variables) { return Assignment(num_variables); }

    std::size_t size() const { return values_.size(); }
    bool observed(std::size_t v) const { return !is_marginalized(values_[v]); }
    double value(std::size_t v) const { return values_[v]; }
    void observe(std::size_t v, double value) { values_[v] = value; }
    void marginalize(std::size_t v) { values_[v] = kMarginalized; }
    std::span<const double> values() const { return values_; }

    RowView view() const;

  private:
    std::vector<double> values_;
};

enum class Split { kTrain, kValid, kTest, kNone };

const char* split_name(Split split);

// Row-major sample matrix. Discrete variables hold integer states in
// [0, cardinality); continuous variables have cardinality kContinuous.
class Dataset {
  public:
    Dataset() = default;
    Dataset(std::string name, std::size_t num_variables, std::vector<double> values,
            std::vector<int> cardinalities, Split split = Split::kNone);

    static Dataset from_rows(std::string name, const std::vector<std::vector<int>>& rows,
                             std::vector<int> cardinalities, Split split = Split::kNone);
    static Dataset from_real_rows(std::string name, const std::vector<std::vector<double>>& rows,
                                  Split split = Split::kNone);

    const std::string& name() const { return name_; }
    Split split() const { return split_; }
    std::size_t num_rows() const { return num_variables_ == 0 ? 0 : values_.size() / num_variables_; }
    std::size_t num_variables() const { return num_variables_; }
    bool empty() const { return num_rows() == 0; }
    const std::vector<int>& cardinalities() const { return cardinalities_; }
    int cardinality(std::size_t v) const { return cardinalities_[v]; }

    RowView row(std::size_t n) const;
    double at(std::size_t n, std::size_t v) const { return values_[n * num_variables_ + v]; }
    int state(std::size_t n, std::size_t v) const { return static_cast<int>(values_[n * num_variables_ + v]); }

    // Rows selected by index, same variables.
    Dataset subset(std::span<const std::size_t> rows) const;

    void set_cardinalities(std::vector<int> cardinalities);

  private:
    void index_nonzero();
    void check_states() const;

    std::string name_;
    Split split_ = Split::kNone;
    std::size_t num_variables_ = 0;
    std::vector<double> values_;
    std::vector<int> cardinalities_;
    std::vector<std::uint32_t> nonzero_offsets_;
    std::vector<int> nonzero_vars_;
    bool complete_ = true;
};

}  // namespace treespn
