#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "fvnn/data.hpp"
#include "fvnn/model.hpp"

namespace fvnn {

enum class LossKind { mse, cross_entropy };
enum class OptimizerKind { sgd, adam };

std::string_view to_string(LossKind k);
LossKind loss_kind_from_string(std::string_view name);
std::string_view to_string(OptimizerKind k);
OptimizerKind optimizer_kind_from_string(std::string_view name);

struct LossValue {
    double value = 0.0;
    Matrix gradient;  // d value / d outputs, same shape as outputs
};

/// mse: mean of (yhat - y)^2 over a B x 1 output. cross_entropy: mean softmax
/// cross-entropy over B x classes scores with 0-based integer targets.
LossValue task_loss(const Matrix& outputs, const Vector& targets, LossKind kind);

struct PenaltyValue {
    double value = 0.0;
    Vector subgradient;  // d value / d group loss; sign(0) = 0
};

/// sum over pairs g < h of |L_g - L_h|.
PenaltyValue fairness_penalty(const Vector& group_losses);

struct EarlyStop {
    int patience = 50;
    double validation_fraction = 0.2;
};

struct TrainConfig {
    double gamma = 1.0;
    LossKind loss = LossKind::mse;
    int epochs = 500;
    Index batch_size = 0;  // 0 = full batch
    double learning_rate = 1e-2;
    OptimizerKind optimizer = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    std::optional<EarlyStop> early_stop;

    void validate() const;
};

struct ObjectiveValue {
    double value = 0.0;
    double task_loss = 0.0;
    double penalty = 0.0;  // NaN if not evaluated (gamma = 1 with a group absent)
    Vector group_losses;
    Parameters gradient;
};

/// gamma * L(all) + (1 - gamma) * DeltaL(per-group L), with its parameter
/// gradient. At gamma = 1 the penalty never enters the gradient.
ObjectiveValue composite_objective(const Dataset& batch, const VnnModel& model, const Matrix& C,
                                   const TrainConfig& cfg, bool with_gradient = true);

struct EpochRecord {
    int epoch = 0;
    double task_loss = 0.0;
    double penalty = 0.0;
    double objective = 0.0;
    Vector group_losses;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;  // set when early stopping restored parameters

    std::string to_csv(int num_groups) const;
};

struct TrainResult {
    VnnModel model;
    TrainHistory history;
};

TrainResult train(VnnModel model, const Dataset& ds_train, const Matrix& C, const TrainConfig& cfg);

struct GradientCheckReport {
    Index parameter_count = 0;
    double max_relative_error = 0.0;
    Index worst_parameter = -1;
    double tolerance = 0.0;
    bool passed = false;
};

/// Central differences of composite_objective against its analytic gradient.
/// `tamper` may modify the analytic gradient before comparison.
GradientCheckReport gradient_check(const VnnModel& model, const Dataset& ds, const Matrix& C, const TrainConfig& cfg,
                                   double tolerance, double step = 1e-5,
                                   const std::function<void(Parameters&)>& tamper = {});

}  // namespace fvnn
