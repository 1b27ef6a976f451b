#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fvnn/types.hpp"

namespace fvnn {

/// Samples (x_i, y_i, z_i). Group labels run 1..num_groups; classification
/// targets are stored as 0-based class indices.
struct Dataset {
    Matrix X;
    Vector y;
    std::vector<int> z;
    Task task = Task::regression;
    int num_groups = 0;

    Index size() const { return X.rows(); }
    Index dim() const { return X.cols(); }
    int num_classes() const;
    std::vector<Index> group_sizes() const;

    /// Throws on inconsistent lengths or labels outside 1..num_groups.
    void validate() const;
    /// Additionally requires every group to be populated.
    void require_all_groups() const;

    Dataset subset(const std::vector<Index>& rows) const;
};

/// Binary T x G membership matrix.
struct GroupIndicator {
    Matrix Z;
    std::vector<Index> group_sizes;

    static GroupIndicator from_labels(const std::vector<int>& z, int num_groups);
};

struct SyntheticConfig {
    Index N = 10;
    Index T1 = 500;
    Index T2 = 500;
    double eigengap_ratio = 0.1;
    double noise_std = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticData {
    Dataset data;
    Matrix C1;
    Matrix C2;
};

/// Log-spaced spectrum on [0.5, 5], optionally compressed toward its mean.
Vector synthetic_spectrum(Index n, double compression);

/// Group 1 (rows 0..T1-1) ~ N(0, C1), group 2 ~ N(0, C2); C1's spectrum is the
/// C2 spectrum compressed toward its mean by `eigengap_ratio`.
SyntheticData generate_two_group_gaussian(const SyntheticConfig& cfg);

/// Friedman #1 on the per-column min-max rescaling of X.
Vector friedman_target(const Matrix& X, double noise_std, std::uint64_t seed);

/// Friedman #1 evaluated on rows already in [0,1]^N, no noise.
Vector friedman_unit(const Matrix& U);

struct CsvSchema {
    char delimiter = ',';
    Task task = Task::regression;
    std::string target;
    std::string sensitive;
    std::vector<std::string> numeric;
    std::vector<std::string> categorical;
    bool one_hot_drop_first = false;
    bool sensitive_as_feature = false;
    /// Raw sensitive value -> group id. Unmapped values take `group_default`
    /// when set; without a map, distinct values are numbered in sorted order.
    std::map<std::string, int> group_map;
    std::optional<int> group_default;
    /// Raw target -> class index (classification only).
    std::map<std::string, int> label_map;
    std::vector<std::string> missing_tokens{"", "NA", "?", "nan", "NaN"};
    /// Column names for a file without a header row.
    std::vector<std::string> columns;
};

struct LoadSummary {
    Index rows_read = 0;
    Index rows_dropped = 0;
    Index T = 0;
    Index N = 0;
    int G = 0;
    std::vector<Index> group_sizes;
    std::vector<std::string> feature_names;

    std::string describe() const;
};

Dataset load_csv_dataset(const std::filesystem::path& path, const CsvSchema& schema,
                         LoadSummary* summary = nullptr);

/// Dataset export: columns x_1..x_N, y, z.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);

struct StandardScaler {
    Vector mean;
    Vector scale;  // 1 where the training column had zero spread

    static StandardScaler fit(const Matrix& X);
    Matrix transform(const Matrix& X) const;
    Matrix inverse_transform(const Matrix& X) const;
};

struct Standardized {
    Dataset train;
    std::vector<Dataset> others;
    StandardScaler scaler;
};

Standardized standardize(const Dataset& train, const std::vector<Dataset>& others = {});

struct SplitResult {
    Dataset train;
    Dataset test;
    std::vector<Index> train_rows;
    std::vector<Index> test_rows;
};

SplitResult split(const Dataset& ds, double test_fraction, std::uint64_t seed, bool stratify_by_group);

struct GroupPart {
    int group = 0;
    Matrix X;
    Vector y;
    std::vector<Index> rows;

    Index size() const { return X.rows(); }
};

/// One entry per group id 1..G, in order; empty groups yield empty parts.
std::vector<GroupPart> partition_by_group(const Dataset& ds);

}  // namespace fvnn
