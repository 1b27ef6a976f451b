#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fvnn/baselines.hpp"
#include "fvnn/covariance.hpp"
#include "fvnn/data.hpp"
#include "fvnn/metrics.hpp"
#include "fvnn/model.hpp"
#include "fvnn/training.hpp"

namespace fvnn {

enum class ExperimentKind { synth_sweep, gamma_sweep, classification, stability };

std::string_view to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(std::string_view name);

struct DatasetConfig {
    std::string source = "synthetic";  // synthetic | csv
    SyntheticConfig synthetic{10, 1000, 1000, 0.1, 1.0, 0};
    /// Synthetic classification: label 1 when the Friedman target exceeds its median.
    bool synthetic_classification = false;
    std::filesystem::path path;
    /// Environment variable that, when set, overrides `path`.
    std::string path_env;
    CsvSchema schema;
    std::string split = "per_group";  // per_group | random
    Index train_per_group = 500;      // per_group: the first rows of each group train
    double test_fraction = 0.2;       // random
    bool stratify = true;
    bool standardize_target = true;
    ErrorMetric error_metric = ErrorMetric::smape;
};

struct CovarianceConfig {
    std::vector<CovarianceKind> kinds{CovarianceKind::sample, CovarianceKind::balanced};
    std::vector<double> alpha{0.5};
    std::vector<double> beta{1.0};
    int disadvantaged_group = 1;
    bool clip_negative = false;

    /// One recipe per (kind, parameter) arm, in declaration order.
    std::vector<CovarianceRecipe> recipes() const;
};

struct LayerConfig {
    Index features = 4;
    int order = 2;
};

struct ModelConfig {
    std::vector<LayerConfig> layers{{4, 2}, {4, 2}};
    Activation activation = Activation::relu;
    bool activate_last = true;

    Architecture architecture(Task task, int num_classes) const;
};

struct TrainingConfig {
    TrainConfig train;
    std::vector<double> gammas{1.0};
};

struct BaselinesConfig {
    std::vector<DownstreamKind> kinds{DownstreamKind::linear, DownstreamKind::rbf};
    std::vector<Index> m{5};
    double ridge = 1e-3;
    std::optional<double> bandwidth;
    Index max_support = 2000;
};

struct SweepConfig {
    Index t1_start = 1;
    Index t1_stop = 500;
    Index t1_step = 1;

    std::vector<Index> t1_values() const;
};

struct StabilityConfig {
    std::vector<std::string> cases{"balanced", "debiased"};
    std::vector<Index> t_grid{100, 178, 316, 562, 1000, 1778, 3162, 5623, 10000};
    int trials = 20;
    std::vector<std::vector<double>> filters{{0.5, 0.3, 0.1}, {0.0, 1.0}};
    double alpha = 0.5;
    double beta = 1.0;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::synth_sweep;
    std::string name = "experiment";
    std::uint64_t seed = 0;
    int trials = 5;
    std::vector<std::string> methods{"fvnn", "pca"};
    DatasetConfig dataset;
    CovarianceConfig covariance;
    ModelConfig model;
    TrainingConfig training;
    BaselinesConfig baselines;
    SweepConfig sweep;
    StabilityConfig stability;
    std::filesystem::path output = "results";

    bool has_method(const std::string& m) const;
    /// Per-trial seed derived from the base seed.
    std::uint64_t trial_seed(int trial) const;
    /// Resolved dataset path after the environment override.
    std::filesystem::path dataset_path() const;
};

/// Parses JSON text; unknown keys and bad values are collected rather than
/// thrown. `base_dir` resolves relative dataset paths.
struct ConfigParse {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;
};

ConfigParse parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// Throws a config error listing every problem.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_string(const std::string& text, const std::filesystem::path& base_dir = {});

/// Full JSON form with every default filled in.
std::string to_json(const ExperimentConfig& cfg);

/// normalize(text) = to_json(parse(text)); throws a config error on problems.
std::string normalize_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// Semantic checks beyond parsing (grids nonempty, files exist, ranges).
std::vector<std::string> check_config(const ExperimentConfig& cfg);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& text);

}  // namespace fvnn
