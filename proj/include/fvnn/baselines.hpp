#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "fvnn/covariance.hpp"
#include "fvnn/data.hpp"
#include "fvnn/metrics.hpp"

namespace fvnn {

struct PcaProjector {
    Matrix components;  // N x m, columns by descending eigenvalue
    Index m = 0;
    CovarianceKind source = CovarianceKind::sample;

    /// X (T x N) -> T x m.
    Matrix project(const Matrix& X) const;
};

PcaProjector fit_pca(const CovarianceEstimate& C, Index m);

/// ||P1 P1^T - P2 P2^T||_F between the spanned subspaces.
double subspace_distance(const PcaProjector& a, const PcaProjector& b);

enum class DownstreamKind { linear, rbf };

std::string_view to_string(DownstreamKind k);
DownstreamKind downstream_kind_from_string(std::string_view name);

struct DownstreamConfig {
    DownstreamKind kind = DownstreamKind::linear;
    double ridge = 1e-3;
    /// RBF width; the median pairwise training distance when unset.
    std::optional<double> bandwidth;
    /// Cap on RBF support points; larger training sets are subsampled.
    Index max_support = 2000;
    std::uint64_t seed = 0;
};

/// Ridge regression on bias-augmented features, or kernel ridge with a
/// Gaussian kernel on centred targets. Classification regresses class
/// indicators and predicts the class with the largest response; with two
/// classes this is thresholding the label regression at the midpoint.
class DownstreamPredictor {
public:
    explicit DownstreamPredictor(DownstreamConfig cfg = {}) : cfg_(cfg) {}

    void fit(const Matrix& features, const Vector& y, Task task, int num_classes = 0);
    Vector predict(const Matrix& features) const;

    bool fitted() const { return fitted_; }
    double bandwidth() const { return bandwidth_; }
    const DownstreamConfig& config() const { return cfg_; }

private:
    Matrix fit_responses(const Matrix& features, const Matrix& targets);
    Matrix responses(const Matrix& features) const;

    DownstreamConfig cfg_;
    Task task_ = Task::regression;
    int num_classes_ = 0;
    bool fitted_ = false;
    double bandwidth_ = 0.0;
    Matrix coef_;     // linear: (m+1) x outputs; rbf: support x outputs
    Matrix support_;  // rbf support points
    Eigen::RowVectorXd offset_;  // rbf target means
};

/// Median of pairwise Euclidean distances between rows.
double median_pairwise_distance(const Matrix& X);

Vector fit_predict_downstream(const Matrix& train_proj, const Vector& y_train, const Matrix& test_proj,
                              const DownstreamConfig& cfg, Task task, int num_classes = 0);

/// PCA on C, downstream fit on train, report on test.
EvalReport evaluate_baseline(const Dataset& train, const Dataset& test, const CovarianceEstimate& C, Index m,
                             const DownstreamConfig& cfg, ErrorMetric metric);

}  // namespace fvnn
