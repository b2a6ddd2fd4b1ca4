#pragma once

#include <cstddef>
#include <vector>

#include "treespn/dataset.hpp"
#include "treespn/graph.hpp"

namespace treespn {

// Per-node results of one up-and-down pass for a single sample.
struct EvalTrace {
    std::vector<double> log_value;       // log S_q(x)
    std::vector<double> log_derivative;  // log dS(x)/dS_q
    bool forward_done = false;
    bool backward_done = false;
    // Edges touched by the passes, for cost accounting.
    std::size_t edge_visits = 0;

    double log_root(const SpnGraph& graph) const { return log_value[graph.root().index()]; }
};

// Upward pass: leaves give their log-marginals, products add, sums
// log-sum-exp the weighted children.
EvalTrace evaluate(const SpnGraph& graph, const Assignment& x);
EvalTrace evaluate(const SpnGraph& graph, const RowView& x);
// Reuses the trace buffers; the row must match the graph's variables.
void evaluate_into(const SpnGraph& graph, const RowView& x, EvalTrace& trace);

// Downward pass in reverse topological order. Throws std::logic_error when
// the trace has no completed upward pass.
void backward(const SpnGraph& graph, EvalTrace& trace);

// Mean of log S(x_n) over the rows.
double log_likelihood(const SpnGraph& graph, const Dataset& data);

// Throws when the dataset width or discrete states do not fit the graph.
void check_compatible(const SpnGraph& graph, const Dataset& data);

}  // namespace treespn
