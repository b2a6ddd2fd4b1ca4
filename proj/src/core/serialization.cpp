#include "treespn/serialization.hpp"

#include <fstream>
#include <sstream>

#include "treespn/leaves.hpp"

namespace treespn {

namespace {

void expect_keyword(std::istream& in, const std::string& keyword) {
    std::string token;
    if (!(in >> token) || token != keyword) {
        throw ModelFormatError("model file: expected '" + keyword + "', found '" + token + "'");
    }
}

template <typename T>
T read_number(std::istream& in, const std::string& what) {
    T value{};
    if (!(in >> value)) throw ModelFormatError("model file: expected " + what);
    return value;
}

double read_real(std::istream& in) {
    std::string token;
    if (!(in >> token)) throw ModelFormatError("model file: expected real value");
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != token.size()) throw ModelFormatError("model file: bad real value '" + token + "'");
    return value;
}

}  // namespace

void write_model(std::ostream& out, const SpnGraph& graph) {
    out << "treespn-model " << kModelFormatVersion << '\n';
    out << "variables " << graph.num_variables() << '\n';
    out << "cardinalities";
    for (int k : graph.cardinalities()) out << ' ' << k;
    out << '\n';
    out << "nodes " << graph.size() << '\n';
    out << "root " << graph.root().value << '\n';
    for (NodeId id : graph.topo_order()) {
        const Node& n = graph.node(id);
        out << id.value << ' ' << kind_name(n.kind);
        switch (n.kind) {
            case NodeKind::kLeaf:
                out << ' ';
                write_leaf(out, *n.leaf);
                break;
            case NodeKind::kProduct:
                out << ' ' << n.children.size();
                for (NodeId c : n.children) out << ' ' << c.value;
                break;
            case NodeKind::kSum:
                out << ' ' << n.children.size();
                for (NodeId c : n.children) out << ' ' << c.value;
                for (double w : n.weights) out << ' ' << format_double(w);
                break;
        }
        out << '\n';
    }
    out << "end\n";
}

std::string model_to_string(const SpnGraph& graph) {
    std::ostringstream out;
    write_model(out, graph);
    return out.str();
}

GraphBuilder read_model_unvalidated(std::istream& in) {
    expect_keyword(in, "treespn-model");
    const int version = read_number<int>(in, "format version");
    if (version != kModelFormatVersion) {
        throw ModelFormatError("model file: unsupported format version " + std::to_string(version));
    }
    expect_keyword(in, "variables");
    const auto num_vars = read_number<long>(in, "variable count");
    if (num_vars < 0) throw ModelFormatError("model file: negative variable count");
    expect_keyword(in, "cardinalities");
    std::vector<int> cards(num_vars);
    for (int& k : cards) {
        k = read_number<int>(in, "cardinality");
        if (k < 0) throw ModelFormatError("model file: negative cardinality");
    }
    expect_keyword(in, "nodes");
    const auto count = read_number<long>(in, "node count");
    if (count <= 0) throw ModelFormatError("model file: node count must be positive");
    expect_keyword(in, "root");
    const auto root = read_number<long>(in, "root id");

    std::vector<Node> nodes(count);
    std::vector<bool> seen(count, false);
    for (long r = 0; r < count; ++r) {
        const auto id = read_number<long>(in, "node id");
        if (id < 0 || id >= count || seen[id]) throw ModelFormatError("model file: bad or repeated node id");
        seen[id] = true;
        const auto kind = read_number<std::string>(in, "node kind");
        Node& n = nodes[id];
        if (kind == "leaf") {
            n.kind = NodeKind::kLeaf;
            try {
                n.leaf = read_leaf(in);
            } catch (const std::invalid_argument& e) {
                throw ModelFormatError(std::string("model file: node ") + std::to_string(id) + ": " + e.what());
            } catch (const std::runtime_error& e) {
                throw ModelFormatError(std::string("model file: node ") + std::to_string(id) + ": " + e.what());
            }
            continue;
        }
        if (kind != "sum" && kind != "product") throw ModelFormatError("model file: unknown node kind '" + kind + "'");
        n.kind = kind == "sum" ? NodeKind::kSum : NodeKind::kProduct;
        const auto k = read_number<long>(in, "child count");
        if (k < 0 || k > count) throw ModelFormatError("model file: bad child count");
        for (long i = 0; i < k; ++i) {
            const auto c = read_number<long>(in, "child id");
            if (c < 0 || c >= count) throw ModelFormatError("model file: child id out of range");
            n.children.push_back(NodeId(static_cast<std::size_t>(c)));
        }
        if (n.kind == NodeKind::kSum) {
            for (long i = 0; i < k; ++i) n.weights.push_back(read_real(in));
        }
    }
    expect_keyword(in, "end");
    if (root < 0 || root >= count) throw ModelFormatError("model file: root id out of range");
    return GraphBuilder(std::move(cards), std::move(nodes), NodeId(static_cast<std::size_t>(root)));
}

SpnGraph read_model(std::istream& in) { return read_model_unvalidated(in).freeze(); }

SpnGraph model_from_string(const std::string& text) {
    std::istringstream in(text);
    return read_model(in);
}

void save_model(const std::string& path, const SpnGraph& graph) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_model(out, graph);
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

SpnGraph load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
    return read_model(in);
}

}  // namespace treespn
