#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hfid/matrix.hpp"

namespace hfid {

struct FeatureDescriptor {
    std::string name;
    std::optional<std::string> unit;
    /// Empty for raw columns; otherwise the names of the multiplied columns (>= 2).
    std::vector<std::string> constituents;

    bool is_interaction() const { return !constituents.empty(); }
    bool operator==(const FeatureDescriptor&) const = default;
};

/// Immutable numeric table: feature columns plus one target column.
class Dataset {
public:
    Dataset() = default;
    /// Validates shape agreement, finiteness and unique feature names.
    Dataset(std::vector<FeatureDescriptor> features, Matrix values,
            std::string target_name, std::vector<double> target);

    const std::vector<FeatureDescriptor>& features() const { return features_; }
    const Matrix& values() const { return values_; }
    const std::string& target_name() const { return target_name_; }
    const std::vector<double>& target() const { return target_; }

    std::size_t rows() const { return values_.rows(); }
    std::size_t feature_count() const { return features_.size(); }

    std::vector<std::string> feature_names() const;
    std::optional<std::size_t> index_of(const std::string& name) const;
    /// Throws std::invalid_argument naming the feature when absent.
    std::size_t require_index(const std::string& name) const;

    /// Subset of rows in the given order; descriptors are shared.
    Dataset select_rows(const std::vector<std::size_t>& rows) const;

    bool operator==(const Dataset&) const = default;

private:
    std::vector<FeatureDescriptor> features_;
    Matrix values_;
    std::string target_name_;
    std::vector<double> target_;
};

struct SplitSpec {
    std::size_t train_count = 0;
    std::uint64_t seed = 0;
};

struct TrainTest {
    Dataset train;
    Dataset test;
};

/// Error raised for malformed CSV input; carries 1-based row/column when known.
class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& message, std::size_t row = 0, std::size_t column = 0)
        : std::runtime_error(message), row_(row), column_(column) {}
    std::size_t row() const { return row_; }
    std::size_t column() const { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

Dataset load_csv(const std::filesystem::path& path, const std::string& target_name);
Dataset parse_csv(const std::string& text, const std::string& target_name);

/// Writes features then target, 17 significant digits.
void write_csv(const Dataset& d, const std::filesystem::path& path);
std::string to_csv(const Dataset& d);

/// Row indices of a uniform random permutation split: first train_count go to train.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t rows,
                                                                            const SplitSpec& s);
TrainTest split(const Dataset& d, const SplitSpec& s);

/// Element-wise product of the named columns of `source`.
std::vector<double> interaction_column(const Dataset& source,
                                       const std::vector<std::string>& constituents,
                                       bool standardize = false);

/// Canonical name of an interaction column, constituents joined with '*'.
std::string interaction_name(const std::vector<std::string>& constituents);

Dataset append_column(const Dataset& d, FeatureDescriptor descriptor,
                      const std::vector<double>& column);

Dataset encode_interaction(const Dataset& d, const std::vector<std::string>& constituents,
                           bool standardize = false);

Dataset remove_features(const Dataset& d, const std::vector<std::string>& names);

}  // namespace hfid
