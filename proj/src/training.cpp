#include "fvnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fvnn/csv.hpp"
#include "fvnn/error.hpp"
#include "fvnn/rng.hpp"

namespace fvnn {

std::string_view to_string(LossKind k) { return k == LossKind::mse ? "mse" : "cross_entropy"; }

LossKind loss_kind_from_string(std::string_view name) {
    if (name == "mse") return LossKind::mse;
    if (name == "cross_entropy") return LossKind::cross_entropy;
    fail(ErrorCode::config, "unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_kind_from_string(std::string_view name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adam") return OptimizerKind::adam;
    fail(ErrorCode::config, "unknown optimizer '" + std::string(name) + "'");
}

LossValue task_loss(const Matrix& outputs, const Vector& targets, LossKind kind) {
    require(outputs.rows() == targets.size(), ErrorCode::shape, "outputs and targets differ in length");
    require(outputs.rows() > 0, ErrorCode::empty_data, "loss on an empty batch");
    const double n = static_cast<double>(outputs.rows());
    LossValue out;
    if (kind == LossKind::mse) {
        require(outputs.cols() == 1, ErrorCode::shape, "mse expects a single output column");
        const Vector residual = outputs.col(0) - targets;
        out.value = residual.squaredNorm() / n;
        out.gradient = 2.0 * residual / n;
        return out;
    }
    out.gradient.resize(outputs.rows(), outputs.cols());
    for (Index i = 0; i < outputs.rows(); ++i) {
        const auto label = static_cast<Index>(targets[i]);
        require(label >= 0 && label < outputs.cols(), ErrorCode::parameter, "class label outside the score range");
        const double top = outputs.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (outputs.row(i).array() - top).exp().matrix();
        const double z = e.sum();
        out.value += -(outputs(i, label) - top - std::log(z));
        out.gradient.row(i) = e / z;
        out.gradient(i, label) -= 1.0;
    }
    out.value /= n;
    out.gradient /= n;
    return out;
}

PenaltyValue fairness_penalty(const Vector& group_losses) {
    require(group_losses.size() >= 2, ErrorCode::group, "fairness penalty needs at least two groups");
    PenaltyValue p;
    p.subgradient = Vector::Zero(group_losses.size());
    for (Index g = 0; g < group_losses.size(); ++g)
        for (Index h = g + 1; h < group_losses.size(); ++h) {
            const double d = group_losses[g] - group_losses[h];
            p.value += std::abs(d);
            const double s = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
            p.subgradient[g] += s;
            p.subgradient[h] -= s;
        }
    return p;
}

void TrainConfig::validate() const {
    require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::config, "gamma must lie in [0, 1]");
    require(epochs >= 1, ErrorCode::config, "epochs must be positive");
    require(learning_rate >= 0.0, ErrorCode::config, "learning_rate must be nonnegative");
    require(batch_size >= 0, ErrorCode::config, "batch_size must be nonnegative");
    if (early_stop) {
        require(early_stop->patience >= 1, ErrorCode::config, "early_stop.patience must be positive");
        require(early_stop->validation_fraction > 0 && early_stop->validation_fraction < 1, ErrorCode::config,
                "early_stop.validation_fraction must lie in (0, 1)");
    }
}

namespace {
Matrix select_rows(const Matrix& m, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
    return out;
}

Vector select(const Vector& v, const std::vector<Index>& rows) {
    Vector out(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Index>(i)] = v[rows[i]];
    return out;
}
}  // namespace

ObjectiveValue composite_objective(const Dataset& batch, const VnnModel& model, const Matrix& C,
                                   const TrainConfig& cfg, bool with_gradient) {
    require(batch.size() > 0, ErrorCode::empty_data, "objective on an empty batch");
    const ForwardResult fr = forward(model, C, batch.X, with_gradient);
    const LossValue overall = task_loss(fr.outputs, batch.y, cfg.loss);

    ObjectiveValue out;
    out.task_loss = overall.value;

    std::vector<std::vector<Index>> members(static_cast<std::size_t>(batch.num_groups));
    for (std::size_t i = 0; i < batch.z.size(); ++i) members[batch.z[i] - 1].push_back(static_cast<Index>(i));
    const bool all_present =
        std::all_of(members.begin(), members.end(), [](const auto& m) { return !m.empty(); });
    if (cfg.gamma < 1.0 && !all_present)
        fail(ErrorCode::batch_composition, "a group is absent from the batch while the fairness penalty is active");

    std::vector<LossValue> group_loss;
    out.group_losses = Vector::Constant(batch.num_groups, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t g = 0; g < members.size(); ++g) {
        if (members[g].empty()) {
            group_loss.emplace_back();
            continue;
        }
        group_loss.push_back(task_loss(select_rows(fr.outputs, members[g]), select(batch.y, members[g]), cfg.loss));
        out.group_losses[static_cast<Index>(g)] = group_loss.back().value;
    }

    Matrix upstream;
    if (cfg.gamma == 1.0) {
        out.value = overall.value;
        out.penalty = all_present && batch.num_groups >= 2 ? fairness_penalty(out.group_losses).value
                                                           : std::numeric_limits<double>::quiet_NaN();
        upstream = overall.gradient;
    } else {
        const PenaltyValue pen = fairness_penalty(out.group_losses);
        out.penalty = pen.value;
        out.value = cfg.gamma * overall.value + (1.0 - cfg.gamma) * pen.value;
        if (with_gradient) {
            upstream = cfg.gamma * overall.gradient;
            for (std::size_t g = 0; g < members.size(); ++g) {
                const double w = (1.0 - cfg.gamma) * pen.subgradient[static_cast<Index>(g)];
                if (w == 0.0) continue;
                for (std::size_t i = 0; i < members[g].size(); ++i)
                    upstream.row(members[g][i]) += w * group_loss[g].gradient.row(static_cast<Index>(i));
            }
        }
    }
    if (with_gradient) out.gradient = backward(model, fr.cache, upstream);
    return out;
}

std::string TrainHistory::to_csv(int num_groups) const {
    std::ostringstream out;
    out << "epoch,task_loss,penalty,objective";
    for (int g = 1; g <= num_groups; ++g) out << ",loss_g" << g;
    out << '\n';
    for (const auto& e : epochs) {
        out << e.epoch << ',' << csv::format(e.task_loss) << ',' << csv::format(e.penalty) << ','
            << csv::format(e.objective);
        for (Index g = 0; g < e.group_losses.size(); ++g) out << ',' << csv::format(e.group_losses[g]);
        out << '\n';
    }
    return out.str();
}

TrainResult train(VnnModel model, const Dataset& ds_train, const Matrix& C, const TrainConfig& cfg) {
    cfg.validate();
    ds_train.validate();
    require(ds_train.dim() == C.rows(), ErrorCode::shape, "training data and covariance differ in dimension");

    Dataset fit_set = ds_train;
    std::optional<Dataset> validation;
    if (cfg.early_stop) {
        auto parts = split(ds_train, cfg.early_stop->validation_fraction, derive_seed(cfg.seed, {17}), true);
        fit_set = std::move(parts.train);
        validation = std::move(parts.test);
    }

    Vector theta = model.params.flatten();
    Vector m = Vector::Zero(theta.size()), v = Vector::Zero(theta.size());
    std::int64_t step = 0;
    Rng rng(derive_seed(cfg.seed, {29}));
    std::vector<Index> order(static_cast<std::size_t>(fit_set.size()));
    std::iota(order.begin(), order.end(), Index{0});

    TrainResult result;
    Vector best_theta = theta;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<std::vector<Index>> batches;
        if (cfg.batch_size == 0 || cfg.batch_size >= fit_set.size()) {
            batches.push_back(order);
        } else {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t s = 0; s < order.size(); s += static_cast<std::size_t>(cfg.batch_size)) {
                const auto e = std::min(order.size(), s + static_cast<std::size_t>(cfg.batch_size));
                batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(s),
                                     order.begin() + static_cast<std::ptrdiff_t>(e));
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        try {
            for (const auto& rows : batches) {
                const bool full = rows.size() == static_cast<std::size_t>(fit_set.size());
                const ObjectiveValue obj =
                    composite_objective(full ? fit_set : fit_set.subset(rows), model, C, cfg, true);
                if (!std::isfinite(obj.value))
                    fail(ErrorCode::training, "objective became non-finite at epoch " + std::to_string(epoch));
                const Vector g = obj.gradient.flatten();
                ++step;
                if (cfg.optimizer == OptimizerKind::sgd) {
                    theta -= cfg.learning_rate * g;
                } else {
                    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
                    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
                    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
                    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
                    theta.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
                }
                model.params.assign(theta);
                if (!model.params.all_finite())
                    fail(ErrorCode::training, "parameters became non-finite at epoch " + std::to_string(epoch));
                if (full) {
                    rec.task_loss = obj.task_loss;
                    rec.penalty = obj.penalty;
                    rec.objective = obj.value;
                    rec.group_losses = obj.group_losses;
                }
            }
            if (batches.size() > 1) {
                // Record the epoch on the whole fitting set with the updated parameters.
                const ObjectiveValue obj = composite_objective(fit_set, model, C, cfg, false);
                rec.task_loss = obj.task_loss;
                rec.penalty = obj.penalty;
                rec.objective = obj.value;
                rec.group_losses = obj.group_losses;
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::numeric) throw;
            fail(ErrorCode::training, std::string(e.what()) + " at epoch " + std::to_string(epoch));
        }
        result.history.epochs.push_back(rec);

        if (validation) {
            const double val = composite_objective(*validation, model, C, cfg, false).value;
            if (!std::isfinite(val))
                fail(ErrorCode::training, "validation objective became non-finite at epoch " + std::to_string(epoch));
            if (val < best_val) {
                best_val = val;
                best_theta = theta;
                result.history.best_epoch = epoch;
                since_best = 0;
            } else if (++since_best >= cfg.early_stop->patience) {
                break;
            }
        }
    }
    if (validation) model.params.assign(best_theta);
    result.model = std::move(model);
    return result;
}

GradientCheckReport gradient_check(const VnnModel& model, const Dataset& ds, const Matrix& C, const TrainConfig& cfg,
                                   double tolerance, double step, const std::function<void(Parameters&)>& tamper) {
    ObjectiveValue base = composite_objective(ds, model, C, cfg, true);
    if (tamper) tamper(base.gradient);
    const Vector analytic = base.gradient.flatten();
    const Vector theta = model.params.flatten();

    GradientCheckReport report;
    report.parameter_count = theta.size();
    report.tolerance = tolerance;
    VnnModel probe = model;
    for (Index i = 0; i < theta.size(); ++i) {
        Vector t = theta;
        t[i] = theta[i] + step;
        probe.params.assign(t);
        const double up = composite_objective(ds, probe, C, cfg, false).value;
        t[i] = theta[i] - step;
        probe.params.assign(t);
        const double down = composite_objective(ds, probe, C, cfg, false).value;
        const double numeric = (up - down) / (2.0 * step);
        const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
        const double rel = std::abs(numeric - analytic[i]) / scale;
        if (rel > report.max_relative_error || report.worst_parameter < 0) {
            report.max_relative_error = std::max(report.max_relative_error, rel);
            report.worst_parameter = i;
        }
    }
    report.passed = report.max_relative_error < tolerance;
    return report;
}

}  // namespace fvnn
