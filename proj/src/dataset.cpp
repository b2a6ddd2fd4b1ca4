#include "treespn/dataset.hpp"

#include <stdexcept>

namespace treespn {

RowView Assignment::view() const {
    RowView view;
    view.values = values_;
    view.complete = true;
    for (double v : values_) {
        if (is_marginalized(v)) {
            view.complete = false;
            break;
        }
    }
    return view;
}

const char* split_name(Split split) {
    switch (split) {
        case Split::kTrain: return "train";
        case Split::kValid: return "valid";
        case Split::kTest: return "test";
        case Split::kNone: break;
    }
    return "none";
}

Dataset::Dataset(std::string name, std::size_t num_variables, std::vector<double> values,
                 std::vector<int> cardinalities, Split split)
    : name_(std::move(name)),
      split_(split),
      num_variables_(num_variables),
      values_(std::move(values)),
      cardinalities_(std::move(cardinalities)) {
    if (cardinalities_.size() != num_variables_) {
        throw std::invalid_argument("dataset: cardinality count does not match variable count");
    }
    if (num_variables_ == 0 ? !values_.empty() : values_.size() % num_variables_ != 0) {
        throw std::invalid_argument("dataset: value count is not a multiple of the row width");
    }
    check_states();
    index_nonzero();
}

Dataset Dataset::from_rows(std::string name, const std::vector<std::vector<int>>& rows,
                           std::vector<int> cardinalities, Split split) {
    const std::size_t width = cardinalities.size();
    std::vector<double> values;
    values.reserve(rows.size() * width);
    for (const auto& row : rows) {
        if (row.size() != width) throw std::invalid_argument("dataset: ragged row");
        for (int s : row) values.push_back(static_cast<double>(s));
    }
    return Dataset(std::move(name), width, std::move(values), std::move(cardinalities), split);
}

Dataset Dataset::from_real_rows(std::string name, const std::vector<std::vector<double>>& rows,
                                Split split) {
    if (rows.empty()) throw std::invalid_argument("dataset: no rows");
    const std::size_t width = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * width);
    for (const auto& row : rows) {
        if (row.size() != width) throw std::invalid_argument("dataset: ragged row");
        values.insert(values.end(), row.begin(), row.end());
    }
    return Dataset(std::move(name), width, std::move(values), std::vector<int>(width, kContinuous), split);
}

void Dataset::check_states() const {
    const std::size_t n = num_rows();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t v = 0; v < num_variables_; ++v) {
            const double x = values_[r * num_variables_ + v];
            if (is_marginalized(x) || cardinalities_[v] == kContinuous) continue;
            if (x < 0 || x >= cardinalities_[v] || x != std::floor(x)) {
                throw std::invalid_argument("dataset: state out of range at row " + std::to_string(r) +
                                            ", variable " + std::to_string(v));
            }
        }
    }
}

void Dataset::index_nonzero() {
    const std::size_t n = num_rows();
    nonzero_offsets_.assign(n + 1, 0);
    nonzero_vars_.clear();
    complete_ = true;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t v = 0; v < num_variables_; ++v) {
            const double x = values_[r * num_variables_ + v];
            if (is_marginalized(x)) complete_ = false;
            if (x != 0.0) nonzero_vars_.push_back(static_cast<int>(v));
        }
        nonzero_offsets_[r + 1] = static_cast<std::uint32_t>(nonzero_vars_.size());
    }
}

RowView Dataset::row(std::size_t n) const {
    RowView view;
    view.values = std::span<const double>(values_).subspan(n * num_variables_, num_variables_);
    view.nonzero = std::span<const int>(nonzero_vars_)
                       .subspan(nonzero_offsets_[n], nonzero_offsets_[n + 1] - nonzero_offsets_[n]);
    view.has_nonzero = true;
    view.complete = complete_;
    return view;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    std::vector<double> values;
    values.reserve(rows.size() * num_variables_);
    for (std::size_t r : rows) {
        const auto* begin = values_.data() + r * num_variables_;
        values.insert(values.end(), begin, begin + num_variables_);
    }
    return Dataset(name_, num_variables_, std::move(values), cardinalities_, split_);
}

void Dataset::set_cardinalities(std::vector<int> cardinalities) {
    if (cardinalities.size() != num_variables_) {
        throw std::invalid_argument("dataset: cardinality count does not match variable count");
    }
    cardinalities_ = std::move(cardinalities);
    check_states();
}

}  // namespace treespn
