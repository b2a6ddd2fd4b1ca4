#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "treespn/bench.hpp"

namespace treespn::bench {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<int> max_cardinalities(const std::vector<std::vector<int>>& rows, std::size_t width) {
    std::vector<int> cards(width, 1);
    for (const auto& row : rows) {
        for (std::size_t v = 0; v < width; ++v) cards[v] = std::max(cards[v], row[v] + 1);
    }
    return cards;
}

// Published test log-likelihoods and edge counts, as printed.
constexpr ReportedResult kReported[] = {
    {"nltcs", 16, 16181, -6.01, -6.03, -6.08, "2K", "14K"},
    {"msnbc", 17, 291326, -6.04, -6.05, -6.29, "13K", "55K"},
    {"kdd", 64, 180092, -2.14, -2.13, -2.14, "50K", "48K"},
    {"plants", 69, 17412, -12.30, -12.87, -12.86, "60K", "133K"},
    {"audio", 100, 15000, -39.76, -40.02, -40.6, "93K", "740K"},
    {"jester", 100, 9000, -52.59, -52.88, -53.84, "93K", "314K"},
    {"netflix", 100, 15000, -56.12, -56.78, -57.96, "94K", "162K"},
    {"accidents", 111, 12758, -29.86, -27.70, -29.55, "100K", "205K"},
    {"retail", 135, 22041, -10.95, -10.92, -10.91, "116K", "57K"},
    {"pumsb_star", 163, 12262, -23.71, -24.23, -25.93, "105K", "140K"},
    {"dna", 180, 1600, -79.90, -84.92, -86.73, "167K", "108K"},
    {"kosarek", 190, 33375, -10.75, -10.88, -10.70, "149K", "203K"},
    {"msweb", 294, 29441, -10.03, -9.97, -9.89, "186K", "69K"},
    {"book", 500, 8700, -34.68, -35.01, -34.44, "434K", "191K"},
    {"tmovie", 500, 4524, -55.42, -52.56, -52.63, "339K", "523K"},
    {"cwebkb", 839, 2803, -167.8, -157.5, -161.5, "713K", "1.44M"},
    {"cr52", 889, 6532, -91.69, -84.63, -85.45, "604K", "2.21M"},
    {"c20ng", 910, 11293, -156.8, -153.2, -155.6, "848K", "14.6M"},
    {"bbc", 1058, 1670, -266.3, -248.6, -251.2, "881K", "1.88M"},
    {"ad", 1556, 2461, -16.88, -27.20, -19.00, "364K", "4.13M"},
};

// Alternative spellings used for the same corpora.
constexpr std::pair<const char*, const char*> kAliases[] = {
    {"kddcup2k", "kdd"},      {"kdd2k", "kdd"},         {"pumsb-star", "pumsb_star"}, {"eachmovie", "tmovie"},
    {"webkb", "cwebkb"},      {"reuters-52", "cr52"},   {"20newsgrp", "c20ng"},       {"20ng", "c20ng"},
};

}  // namespace

const Dataset& DatasetSplits::get(Split split) const {
    switch (split) {
        case Split::kTrain:
            return train;
        case Split::kValid:
            return valid;
        case Split::kTest:
            return test;
        case Split::kNone:
            break;
    }
    throw InputError("no such split");
}

Split parse_split(const std::string& text) {
    const std::string s = lower(text);
    if (s == "train" || s == "ts") return Split::kTrain;
    if (s == "valid" || s == "validation") return Split::kValid;
    if (s == "test") return Split::kTest;
    throw InputError("unknown split '" + text + "' (expected train, valid or test)");
}

Dataset read_data(std::istream& in, const std::string& file_label, const std::string& name, Split split) {
    std::vector<std::vector<int>> rows;
    std::size_t width = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<int> row;
        const char* p = line.data();
        const char* end = p + line.size();
        for (;;) {
            int value = 0;
            auto [next, ec] = std::from_chars(p, end, value);
            if (ec != std::errc() || value < 0 || (next != end && *next != ',')) {
                throw InputError(file_label + ":" + std::to_string(line_no) + ": expected a nonnegative integer state");
            }
            row.push_back(value);
            if (next == end) break;
            p = next + 1;
        }
        if (rows.empty()) {
            width = row.size();
        } else if (row.size() != width) {
            throw InputError(file_label + ":" + std::to_string(line_no) + ": row has " + std::to_string(row.size()) +
                             " values, expected " + std::to_string(width));
        }
        rows.push_back(std::move(row));
    }
    if (in.bad()) throw InputError(file_label + ": read error");
    return Dataset::from_rows(name, rows, max_cardinalities(rows, width), split);
}

Dataset read_data_file(const std::filesystem::path& path, const std::string& name, Split split) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open data file '" + path.string() + "'");
    return read_data(in, path.string(), name, split);
}

void write_data(std::ostream& out, const Dataset& data) {
    for (std::size_t n = 0; n < data.num_rows(); ++n) {
        for (std::size_t v = 0; v < data.num_variables(); ++v) {
            if (v > 0) out << ',';
            out << data.state(n, v);
        }
        out << '\n';
    }
}

void write_data_file(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    write_data(out, data);
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

DatasetSplits load_dataset(const std::filesystem::path& dir, const std::string& name) {
    Dataset train = read_data_file(dir / (name + ".ts.data"), name, Split::kTrain);
    Dataset valid = read_data_file(dir / (name + ".valid.data"), name, Split::kValid);
    Dataset test = read_data_file(dir / (name + ".test.data"), name, Split::kTest);
    if (train.empty()) throw InputError("training file for '" + name + "' has no rows");

    const std::size_t width = train.num_variables();
    std::vector<int> cards = train.cardinalities();
    for (const Dataset* d : {&valid, &test}) {
        if (d->empty()) continue;
        if (d->num_variables() != width) {
            throw InputError(std::string(split_name(d->split())) + " file for '" + name + "' has " +
                             std::to_string(d->num_variables()) + " variables, training file has " +
                             std::to_string(width));
        }
        for (std::size_t v = 0; v < width; ++v) cards[v] = std::max(cards[v], d->cardinality(v));
    }
    auto widen = [&](Dataset& d, Split split) {
        if (d.empty()) {
            d = Dataset::from_rows(name, {}, cards, split);
        } else {
            d.set_cardinalities(cards);
        }
    };
    train.set_cardinalities(cards);
    widen(valid, Split::kValid);
    widen(test, Split::kTest);
    return {std::move(train), std::move(valid), std::move(test)};
}

std::span<const ReportedResult> reported_results() { return kReported; }

const ReportedResult* find_reported(const std::string& dataset) {
    std::string key = lower(dataset);
    for (const auto& [alias, canonical] : kAliases) {
        if (key == alias) key = canonical;
    }
    for (const auto& r : kReported) {
        if (key == r.dataset) return &r;
    }
    return nullptr;
}

}  // namespace treespn::bench
