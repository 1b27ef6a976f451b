#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fvnn/config.hpp"
#include "fvnn/metrics.hpp"
#include "fvnn/spectral.hpp"

namespace fvnn {

inline constexpr std::string_view library_version = "0.1.0";

struct OutputFile {
    std::string name;
    std::string content;
    int result_groups = 0;  // > 0 marks a results CSV checked against the schema
};

struct ExperimentOutput {
    std::vector<OutputFile> files;
    std::vector<ResultRow> rows;
    std::vector<std::string> extra_columns;
    int num_groups = 0;
    bool ok = true;
    std::string message;
};

/// One train/test draw, standardized on the training part.
struct TrialData {
    Dataset train;
    Dataset test;         // features standardized, targets on the original scale
    double target_mean = 0.0;
    double target_scale = 1.0;
    std::uint64_t seed = 0;
};

/// Loads or generates the full dataset for a trial (synthetic data is drawn per trial).
Dataset experiment_dataset(const ExperimentConfig& cfg, int trial, LoadSummary* summary = nullptr);

TrialData make_trial(const ExperimentConfig& cfg, const Dataset& full, int trial);

/// Sum of absolute successive differences.
double total_variation(const std::vector<double>& curve);

ExperimentOutput run_synth_sweep(const ExperimentConfig& cfg, int jobs = 1);
ExperimentOutput run_gamma_sweep(const ExperimentConfig& cfg, int jobs = 1);
ExperimentOutput run_classification(const ExperimentConfig& cfg, int jobs = 1);

struct StabilityCase {
    std::string name;  // balanced | debiased
    Matrix C_true;
    CovarianceSampler sampler;
};

/// Truth and sampler for one estimator case on the synthetic covariances.
StabilityCase make_stability_case(const ExperimentConfig& cfg, const std::string& name);

struct StabilityResult {
    std::string case_name;
    std::size_t filter_index = 0;
    FilterCoefficients filter;
    StabilitySweep sweep;
    Index violations = 0;  // rows with distance > bound + slack
};

ExperimentOutput run_stability(const ExperimentConfig& cfg, int jobs = 1,
                               std::vector<StabilityResult>* results = nullptr);

/// Finite-difference checks on `cfg.trials` random small models and datasets.
ExperimentOutput run_gradcheck(const ExperimentConfig& cfg, int jobs = 1, double tolerance = 1e-4);

ExperimentOutput run_experiment(const ExperimentConfig& cfg, int jobs = 1);

/// Writes every file plus manifest.json; results CSVs are schema-checked first.
void write_outputs(const std::filesystem::path& dir, const ExperimentOutput& out, const ExperimentConfig& cfg,
                   double wall_seconds);

}  // namespace fvnn
