#include "hfid/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace hfid {

Dataset::Dataset(std::vector<FeatureDescriptor> features, Matrix values, std::string target_name,
                 std::vector<double> target)
    : features_(std::move(features)),
      values_(std::move(values)),
      target_name_(std::move(target_name)),
      target_(std::move(target)) {
    if (values_.cols() != features_.size()) {
        throw std::invalid_argument("Dataset: column count does not match descriptor count");
    }
    if (values_.rows() != target_.size()) {
        throw std::invalid_argument("Dataset: feature and target row counts differ");
    }
    std::unordered_set<std::string> seen;
    for (const auto& f : features_) {
        if (!seen.insert(f.name).second) {
            throw std::invalid_argument("Dataset: duplicate feature name '" + f.name + "'");
        }
        if (f.is_interaction() && f.constituents.size() < 2) {
            throw std::invalid_argument("Dataset: interaction '" + f.name +
                                        "' needs at least 2 constituents");
        }
    }
    for (double v : values_.data()) {
        if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite feature value");
    }
    for (double v : target_) {
        if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite target value");
    }
}

std::vector<std::string> Dataset::feature_names() const {
    std::vector<std::string> names;
    names.reserve(features_.size());
    for (const auto& f : features_) names.push_back(f.name);
    return names;
}

std::optional<std::size_t> Dataset::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].name == name) return i;
    }
    return std::nullopt;
}

std::size_t Dataset::require_index(const std::string& name) const {
    auto idx = index_of(name);
    if (!idx) throw std::invalid_argument("unknown feature '" + name + "'");
    return *idx;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
    Matrix m(rows.size(), feature_count());
    std::vector<double> t(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= this->rows()) throw std::out_of_range("select_rows: row index out of range");
        auto src = values_.row(rows[i]);
        std::copy(src.begin(), src.end(), m.row(i).begin());
        t[i] = target_[rows[i]];
    }
    return Dataset(features_, std::move(m), target_name_, std::move(t));
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

std::string format_double(double v) {
    char buf[32];
    int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace

Dataset parse_csv(const std::string& text, const std::string& target_name) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) throw CsvError("CSV: missing header row");

    auto header_cells = split_line(line);
    std::vector<std::string> header(header_cells.begin(), header_cells.end());
    std::set<std::string> unique;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c].empty()) throw CsvError("CSV: empty header name", 1, c + 1);
        if (!unique.insert(header[c]).second) {
            throw CsvError("CSV: duplicate header name '" + header[c] + "'", 1, c + 1);
        }
    }
    auto target_it = std::find(header.begin(), header.end(), target_name);
    if (target_it == header.end()) {
        throw CsvError("CSV: target column '" + target_name + "' not found");
    }
    const auto target_col = static_cast<std::size_t>(target_it - header.begin());

    std::vector<FeatureDescriptor> features;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != target_col) features.push_back({header[c], std::nullopt, {}});
    }

    std::vector<double> values;
    std::vector<double> target;
    std::size_t row = 1;  // header is row 1
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw CsvError("CSV: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(header.size()),
                           row);
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            const char* first = cells[c].data();
            const char* last = first + cells[c].size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (cells[c].empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
                throw CsvError("CSV: invalid numeric cell '" + std::string(cells[c]) + "' at row " +
                                   std::to_string(row) + ", column " + std::to_string(c + 1) + " ('" +
                                   header[c] + "')",
                               row, c + 1);
            }
            if (c == target_col) {
                target.push_back(v);
            } else {
                values.push_back(v);
            }
        }
    }
    const std::size_t n = target.size();
    return Dataset(std::move(features), Matrix(n, header.size() - 1, std::move(values)), target_name,
                   std::move(target));
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("CSV: cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), target_name);
}

std::string to_csv(const Dataset& d) {
    std::string out;
    for (const auto& f : d.features()) {
        out += f.name;
        out += ',';
    }
    out += d.target_name();
    out += '\n';
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (double v : d.values().row(r)) {
            out += format_double(v);
            out += ',';
        }
        out += format_double(d.target()[r]);
        out += '\n';
    }
    return out;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << to_csv(d);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t rows,
                                                                            const SplitSpec& s) {
    if (s.train_count == 0) throw std::invalid_argument("split: train_count must be positive");
    if (s.train_count >= rows) {
        throw std::invalid_argument("split: train_count " + std::to_string(s.train_count) +
                                    " must be below row count " + std::to_string(rows));
    }
    std::vector<std::size_t> perm(rows);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(s.seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(s.train_count));
    std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(s.train_count), perm.end());
    return {std::move(train), std::move(test)};
}

TrainTest split(const Dataset& d, const SplitSpec& s) {
    auto [train, test] = split_indices(d.rows(), s);
    return {d.select_rows(train), d.select_rows(test)};
}

std::string interaction_name(const std::vector<std::string>& constituents) {
    std::string name;
    for (std::size_t i = 0; i < constituents.size(); ++i) {
        if (i) name += '*';
        name += constituents[i];
    }
    return name;
}

std::vector<double> interaction_column(const Dataset& source, const std::vector<std::string>& constituents,
                                       bool standardize) {
    if (constituents.size() < 2) {
        throw std::invalid_argument("interaction needs at least 2 constituents");
    }
    std::set<std::string> distinct(constituents.begin(), constituents.end());
    if (distinct.size() != constituents.size()) {
        throw std::invalid_argument("interaction constituents must be distinct");
    }
    std::vector<double> out(source.rows(), 1.0);
    for (const auto& name : constituents) {
        const std::size_t c = source.require_index(name);
        double mean = 0.0;
        double scale = 1.0;
        if (standardize && source.rows() > 0) {
            const auto col = source.values().column(c);
            mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
            double ss = 0.0;
            for (double v : col) ss += (v - mean) * (v - mean);
            const double sd = std::sqrt(ss / static_cast<double>(col.size()));
            scale = sd > 0.0 ? sd : 1.0;
        }
        for (std::size_t r = 0; r < source.rows(); ++r) {
            out[r] *= (source.values()(r, c) - mean) / scale;
        }
    }
    return out;
}

Dataset append_column(const Dataset& d, FeatureDescriptor descriptor, const std::vector<double>& column) {
    if (column.size() != d.rows()) throw std::invalid_argument("append_column: row count mismatch");
    const std::size_t cols = d.feature_count() + 1;
    Matrix m(d.rows(), cols);
    for (std::size_t r = 0; r < d.rows(); ++r) {
        auto src = d.values().row(r);
        std::copy(src.begin(), src.end(), m.row(r).begin());
        m(r, cols - 1) = column[r];
    }
    auto features = d.features();
    features.push_back(std::move(descriptor));
    return Dataset(std::move(features), std::move(m), d.target_name(), d.target());
}

Dataset encode_interaction(const Dataset& d, const std::vector<std::string>& constituents, bool standardize) {
    auto column = interaction_column(d, constituents, standardize);
    return append_column(d, {interaction_name(constituents), std::nullopt, constituents}, column);
}

Dataset remove_features(const Dataset& d, const std::vector<std::string>& names) {
    std::set<std::size_t> drop;
    for (const auto& name : names) drop.insert(d.require_index(name));
    if (drop.size() >= d.feature_count()) {
        throw std::invalid_argument("remove_features: removal would leave no features");
    }
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < d.feature_count(); ++c) {
        if (!drop.count(c)) keep.push_back(c);
    }
    Matrix m(d.rows(), keep.size());
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t k = 0; k < keep.size(); ++k) m(r, k) = d.values()(r, keep[k]);
    }
    std::vector<FeatureDescriptor> features;
    for (auto c : keep) features.push_back(d.features()[c]);
    return Dataset(std::move(features), std::move(m), d.target_name(), d.target());
}

}  // namespace hfid
