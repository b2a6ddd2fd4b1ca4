#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "treespn/leaves.hpp"

namespace treespn {

namespace {

template <typename T>
T read_value(std::istream& in, const char* what) {
    T value{};
    if (!(in >> value)) throw std::runtime_error(std::string("leaf payload: expected ") + what);
    return value;
}

double read_real(std::istream& in) {
    std::string token;
    if (!(in >> token)) throw std::runtime_error("leaf payload: expected real value");
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != token.size()) throw std::runtime_error("leaf payload: bad real value '" + token + "'");
    return value;
}

}  // namespace

void write_leaf(std::ostream& out, const LeafModel& leaf) {
    out << family_tag(leaf.family()) << ' ' << leaf.scope().size();
    for (int v : leaf.scope()) out << ' ' << v;
    out << ' ';
    leaf.write_parameters(out);
}

LeafPtr read_leaf(std::istream& in) {
    const auto tag = read_value<std::string>(in, "family tag");
    const auto d = read_value<int>(in, "scope size");
    if (d < 1) throw std::runtime_error("leaf payload: scope size must be positive");
    std::vector<int> scope(d);
    for (int& v : scope) v = read_value<int>(in, "scope variable");

    if (tag == "categorical") {
        if (d != 1) throw std::runtime_error("leaf payload: categorical leaf needs a single variable");
        const auto k = read_value<int>(in, "cardinality");
        if (k < 1) throw std::runtime_error("leaf payload: bad cardinality");
        std::vector<double> probs(k);
        for (double& p : probs) p = read_real(in);
        return std::make_shared<CategoricalLeaf>(scope[0], std::move(probs));
    }
    if (tag == "gaussian") {
        Eigen::VectorXd mean(d);
        Eigen::MatrixXd cov(d, d);
        for (int i = 0; i < d; ++i) mean(i) = read_real(in);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) cov(i, j) = read_real(in);
        }
        return std::make_shared<GaussianLeaf>(std::move(scope), std::move(mean), std::move(cov));
    }
    if (tag == "tree") {
        std::vector<int> cards(d), parent(d);
        for (int& k : cards) k = read_value<int>(in, "cardinality");
        for (int& p : parent) p = read_value<int>(in, "parent index");
        std::vector<std::vector<double>> cpts(d);
        for (int v = 0; v < d; ++v) {
            if (cards[v] < 1 || parent[v] < -1 || parent[v] >= d) throw std::runtime_error("leaf payload: bad tree header");
            const int rows = parent[v] < 0 ? 1 : cards[parent[v]];
            if (rows < 1) throw std::runtime_error("leaf payload: bad tree header");
            cpts[v].resize(static_cast<std::size_t>(rows) * cards[v]);
            for (double& p : cpts[v]) p = read_real(in);
        }
        return std::make_shared<TreeLeaf>(std::move(scope), std::move(cards), std::move(parent), std::move(cpts));
    }
    throw std::runtime_error("leaf payload: unknown family '" + tag + "'");
}

}  // namespace treespn
