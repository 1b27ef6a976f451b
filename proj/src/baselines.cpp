#include "fvnn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fvnn/error.hpp"
#include "fvnn/rng.hpp"
#include "fvnn/spectral.hpp"

namespace fvnn {

Matrix PcaProjector::project(const Matrix& X) const {
    require(X.cols() == components.rows(), ErrorCode::shape,
            "projection input has dimension " + std::to_string(X.cols()) + ", projector expects " +
                std::to_string(components.rows()));
    return X * components;
}

PcaProjector fit_pca(const CovarianceEstimate& C, Index m) {
    require(m >= 1 && m <= C.dim(), ErrorCode::parameter,
            "number of components " + std::to_string(m) + " outside 1.." + std::to_string(C.dim()));
    const SpectralDecomposition sd = eigendecompose(C.C);
    PcaProjector p;
    p.m = m;
    p.source = C.kind;
    p.components.resize(C.dim(), m);
    for (Index i = 0; i < m; ++i) p.components.col(i) = sd.eigenvectors.col(C.dim() - 1 - i);
    return p;
}

double subspace_distance(const PcaProjector& a, const PcaProjector& b) {
    require(a.components.rows() == b.components.rows(), ErrorCode::shape, "projectors differ in dimension");
    return (a.components * a.components.transpose() - b.components * b.components.transpose()).norm();
}

std::string_view to_string(DownstreamKind k) { return k == DownstreamKind::linear ? "linear" : "rbf"; }

DownstreamKind downstream_kind_from_string(std::string_view name) {
    if (name == "linear") return DownstreamKind::linear;
    if (name == "rbf") return DownstreamKind::rbf;
    fail(ErrorCode::config, "unknown downstream kind '" + std::string(name) + "'");
}

double median_pairwise_distance(const Matrix& X) {
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(X.rows() * (X.rows() - 1) / 2));
    for (Index i = 0; i < X.rows(); ++i)
        for (Index j = i + 1; j < X.rows(); ++j) d.push_back((X.row(i) - X.row(j)).norm());
    if (d.empty()) return 1.0;
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    if (d.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(d.begin(), mid);
    return 0.5 * (lower + upper);
}

namespace {
Matrix rbf_kernel(const Matrix& A, const Matrix& B, double bandwidth) {
    const Vector a2 = A.rowwise().squaredNorm();
    const Vector b2 = B.rowwise().squaredNorm();
    Matrix sq = (-2.0 * A * B.transpose()).colwise() + a2;
    sq.rowwise() += b2.transpose();
    return (-sq.cwiseMax(0.0) / (2.0 * bandwidth * bandwidth)).array().exp().matrix();
}

Matrix with_bias(const Matrix& F) {
    Matrix A(F.rows(), F.cols() + 1);
    A.leftCols(F.cols()) = F;
    A.col(F.cols()).setOnes();
    return A;
}
}  // namespace

Matrix DownstreamPredictor::fit_responses(const Matrix& features, const Matrix& targets) {
    if (cfg_.kind == DownstreamKind::linear) {
        const Matrix A = with_bias(features);
        Matrix gram = A.transpose() * A;
        gram.diagonal().array() += cfg_.ridge;
        Eigen::LDLT<Matrix> solver(gram);
        if (solver.info() != Eigen::Success) fail(ErrorCode::numeric, "ridge system is singular");
        coef_ = solver.solve(A.transpose() * targets);
    } else {
        std::vector<Index> rows(static_cast<std::size_t>(features.rows()));
        std::iota(rows.begin(), rows.end(), Index{0});
        if (features.rows() > cfg_.max_support) {
            Rng rng(derive_seed(cfg_.seed, {41}));
            std::shuffle(rows.begin(), rows.end(), rng);
            rows.resize(static_cast<std::size_t>(cfg_.max_support));
            std::sort(rows.begin(), rows.end());
        }
        support_.resize(static_cast<Index>(rows.size()), features.cols());
        Matrix t(static_cast<Index>(rows.size()), targets.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            support_.row(static_cast<Index>(i)) = features.row(rows[i]);
            t.row(static_cast<Index>(i)) = targets.row(rows[i]);
        }
        bandwidth_ = cfg_.bandwidth ? *cfg_.bandwidth : median_pairwise_distance(support_);
        if (!(bandwidth_ > 0.0)) bandwidth_ = 1.0;
        offset_ = t.colwise().mean();
        Matrix K = rbf_kernel(support_, support_, bandwidth_);
        K.diagonal().array() += cfg_.ridge;
        Eigen::LLT<Matrix> solver(K);
        if (solver.info() != Eigen::Success) fail(ErrorCode::numeric, "kernel ridge system is not positive definite");
        coef_ = solver.solve(t.rowwise() - offset_);
    }
    if (!coef_.allFinite()) fail(ErrorCode::numeric, "downstream solve produced non-finite coefficients");
    return coef_;
}

Matrix DownstreamPredictor::responses(const Matrix& features) const {
    if (cfg_.kind == DownstreamKind::linear) {
        require(features.cols() + 1 == coef_.rows(), ErrorCode::shape, "feature dimension differs from fit");
        return with_bias(features) * coef_;
    }
    require(features.cols() == support_.cols(), ErrorCode::shape, "feature dimension differs from fit");
    Matrix out(features.rows(), coef_.cols());
    constexpr Index block = 128;
    for (Index start = 0; start < features.rows(); start += block) {
        const Index n = std::min(block, features.rows() - start);
        out.middleRows(start, n) =
            (rbf_kernel(features.middleRows(start, n), support_, bandwidth_) * coef_).rowwise() + offset_;
    }
    return out;
}

void DownstreamPredictor::fit(const Matrix& features, const Vector& y, Task task, int num_classes) {
    require(cfg_.ridge > 0.0, ErrorCode::parameter, "ridge must be positive");
    require(!cfg_.bandwidth || *cfg_.bandwidth > 0.0, ErrorCode::parameter, "bandwidth must be positive");
    require(features.rows() == y.size() && y.size() > 0, ErrorCode::shape, "training features and targets differ");
    task_ = task;
    if (task == Task::regression) {
        fit_responses(features, y);
    } else {
        num_classes_ = std::max(num_classes, static_cast<int>(y.maxCoeff()) + 1);
        require(num_classes_ >= 2, ErrorCode::parameter, "classification needs at least two classes");
        if (num_classes_ == 2) {
            fit_responses(features, y);
        } else {
            Matrix indicators = Matrix::Zero(y.size(), num_classes_);
            for (Index i = 0; i < y.size(); ++i) indicators(i, static_cast<Index>(y[i])) = 1.0;
            fit_responses(features, indicators);
        }
    }
    fitted_ = true;
}

Vector DownstreamPredictor::predict(const Matrix& features) const {
    if (!fitted_) fail(ErrorCode::state, "downstream predictor used before fit");
    const Matrix r = responses(features);
    if (task_ == Task::regression) return r.col(0);
    Vector labels(r.rows());
    if (num_classes_ == 2) {
        for (Index i = 0; i < r.rows(); ++i) labels[i] = r(i, 0) >= 0.5 ? 1.0 : 0.0;
        return labels;
    }
    for (Index i = 0; i < r.rows(); ++i) {
        Index best = 0;
        for (Index c = 1; c < r.cols(); ++c)
            if (r(i, c) > r(i, best)) best = c;
        labels[i] = static_cast<double>(best);
    }
    return labels;
}

Vector fit_predict_downstream(const Matrix& train_proj, const Vector& y_train, const Matrix& test_proj,
                              const DownstreamConfig& cfg, Task task, int num_classes) {
    DownstreamPredictor p(cfg);
    p.fit(train_proj, y_train, task, num_classes);
    return p.predict(test_proj);
}

EvalReport evaluate_baseline(const Dataset& train, const Dataset& test, const CovarianceEstimate& C, Index m,
                             const DownstreamConfig& cfg, ErrorMetric metric) {
    const PcaProjector p = fit_pca(C, m);
    const Vector pred = fit_predict_downstream(p.project(train.X), train.y, p.project(test.X), cfg, train.task,
                                               train.num_classes());
    return group_bias_report(test, pred, metric);
}

}  // namespace fvnn
