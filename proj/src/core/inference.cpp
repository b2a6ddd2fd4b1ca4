#include "treespn/inference.hpp"

#include <stdexcept>
#include <string>

#include "treespn/log_math.hpp"

namespace treespn {

void check_compatible(const SpnGraph& graph, const Dataset& data) {
    if (data.num_variables() != graph.num_variables()) {
        throw std::invalid_argument("dataset has " + std::to_string(data.num_variables()) + " variables, model has " +
                                    std::to_string(graph.num_variables()));
    }
    for (std::size_t v = 0; v < graph.num_variables(); ++v) {
        const int model_card = graph.cardinalities()[v];
        const int data_card = data.cardinality(v);
        const bool ok = model_card == kContinuous ? data_card == kContinuous
                                                  : data_card != kContinuous && data_card <= model_card;
        if (!ok) throw std::invalid_argument("dataset variable " + std::to_string(v) + " does not fit the model");
    }
}

void evaluate_into(const SpnGraph& graph, const RowView& x, EvalTrace& trace) {
    if (x.size() != graph.num_variables()) throw std::invalid_argument("evaluate: assignment length differs from model");
    trace.log_value.assign(graph.size(), kLogZero);
    trace.log_derivative.clear();
    trace.forward_done = false;
    trace.backward_done = false;
    trace.edge_visits = 0;
    for (NodeId id : graph.topo_order()) {
        const Node& n = graph.node(id);
        double value = 0.0;
        switch (n.kind) {
            case NodeKind::kLeaf:
                value = n.leaf->log_value(x);
                break;
            case NodeKind::kProduct:
                for (NodeId c : n.children) value += trace.log_value[c.index()];
                break;
            case NodeKind::kSum: {
                LogAccumulator acc;
                for (std::size_t i = 0; i < n.children.size(); ++i) {
                    if (n.weights[i] > 0.0) acc.add(std::log(n.weights[i]) + trace.log_value[n.children[i].index()]);
                }
                value = acc.value();
                break;
            }
        }
        trace.edge_visits += n.children.size();
        trace.log_value[id.index()] = value;
    }
    trace.forward_done = true;
}

EvalTrace evaluate(const SpnGraph& graph, const RowView& x) {
    EvalTrace trace;
    evaluate_into(graph, x, trace);
    return trace;
}

EvalTrace evaluate(const SpnGraph& graph, const Assignment& x) {
    if (x.size() != graph.num_variables()) throw std::invalid_argument("evaluate: assignment length differs from model");
    for (std::size_t v = 0; v < x.size(); ++v) {
        const int card = graph.cardinalities()[v];
        if (!x.observed(v) || card == kContinuous) continue;
        const double s = x.value(v);
        if (s < 0 || s >= card || s != static_cast<double>(static_cast<int>(s))) {
            throw std::out_of_range("evaluate: state of variable " + std::to_string(v) + " out of range");
        }
    }
    return evaluate(graph, x.view());
}

void backward(const SpnGraph& graph, EvalTrace& trace) {
    if (!trace.forward_done || trace.log_value.size() != graph.size()) {
        throw std::logic_error("backward: trace has no completed upward pass");
    }
    auto& der = trace.log_derivative;
    der.assign(graph.size(), kLogZero);
    der[graph.root().index()] = 0.0;
    std::vector<double> prefix;
    const auto& order = graph.topo_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const Node& n = graph.node(*it);
        const double dq = der[it->index()];
        trace.edge_visits += n.children.size();
        if (n.kind == NodeKind::kLeaf || dq == kLogZero) continue;
        if (n.kind == NodeKind::kSum) {
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (n.weights[i] <= 0.0) continue;
                double& target = der[n.children[i].index()];
                target = log_add(target, std::log(n.weights[i]) + dq);
            }
            continue;
        }
        // Product: dS/dS_i = dS/dS_q * prod_{j != i} S_j via prefix and suffix
        // sums of child log-values, so zero-valued siblings never divide.
        const std::size_t k = n.children.size();
        prefix.assign(k + 1, 0.0);
        for (std::size_t i = 0; i < k; ++i) prefix[i + 1] = prefix[i] + trace.log_value[n.children[i].index()];
        double suffix = 0.0;
        for (std::size_t i = k; i-- > 0;) {
            const double siblings = prefix[i] + suffix;
            double& target = der[n.children[i].index()];
            if (siblings != kLogZero) target = log_add(target, dq + siblings);
            suffix += trace.log_value[n.children[i].index()];
        }
    }
    trace.backward_done = true;
}

double log_likelihood(const SpnGraph& graph, const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("log_likelihood: empty dataset");
    check_compatible(graph, data);
    EvalTrace trace;
    double total = 0.0;
    for (std::size_t n = 0; n < data.num_rows(); ++n) {
        evaluate_into(graph, data.row(n), trace);
        total += trace.log_root(graph);
    }
    return total / static_cast<double>(data.num_rows());
}

}  // namespace treespn
