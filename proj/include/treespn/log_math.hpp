#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace treespn {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)); log 0 is -inf.
inline double log_add(double a, double b) {
    if (a == kLogZero) return b;
    if (b == kLogZero) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> xs) {
    double m = kLogZero;
    for (double x : xs) m = std::max(m, x);
    if (m == kLogZero) return kLogZero;
    if (std::isinf(m)) return m;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - m);
    return m + std::log(acc);
}

// Streaming log-sum-exp accumulator with a running maximum.
class LogAccumulator {
  public:
    void add(double x) {
        if (x == kLogZero) return;
        if (x <= max_) {
            sum_ += std::exp(x - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - x) + 1.0;
            max_ = x;
        }
    }
    double value() const { return max_ == kLogZero ? kLogZero : max_ + std::log(sum_); }

  private:
    double max_ = kLogZero;
    double sum_ = 0.0;
};

inline double safe_log(double x) { return x > 0.0 ? std::log(x) : kLogZero; }

}  // namespace treespn
