#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fvnn/baselines.hpp"
#include "fvnn/error.hpp"
#include "oracles.hpp"

using namespace fvnn;

namespace {
CovarianceEstimate estimate_of(const Matrix& C) {
    CovarianceEstimate e;
    e.C = C;
    return e;
}
}  // namespace

TEST_CASE("pca on a diagonal covariance") {
    Matrix C = Matrix::Zero(3, 3);
    C.diagonal() << 3, 1, 2;
    const PcaProjector p = fit_pca(estimate_of(C), 2);
    REQUIRE(p.components.rows() == 3);
    REQUIRE(p.components.cols() == 2);
    Matrix expected = Matrix::Zero(3, 2);
    expected(0, 0) = 1;
    expected(2, 1) = 1;
    CHECK((p.components - expected).cwiseAbs().maxCoeff() < 1e-12);
    Matrix x(1, 3);
    x << 4, 5, 6;
    const Matrix proj = p.project(x);
    CHECK(proj(0, 0) == doctest::Approx(4));
    CHECK(proj(0, 1) == doctest::Approx(6));
    CHECK_THROWS_AS(fit_pca(estimate_of(C), 0), Error);
    CHECK_THROWS_AS(fit_pca(estimate_of(C), 4), Error);
}

TEST_CASE("pca projection preserves norms at full rank and matches a loop") {
    Rng rng(1);
    for (int rep = 0; rep < 10; ++rep) {
        const Index N = 6;
        const Matrix C = oracle::random_spd(rng, N);
        const Matrix X = oracle::random_matrix(rng, 7, N);
        const PcaProjector full = fit_pca(estimate_of(C), N);
        CHECK((full.project(X).rowwise().norm() - X.rowwise().norm()).cwiseAbs().maxCoeff() < 1e-10);
        const PcaProjector part = fit_pca(estimate_of(C), 3);
        const Matrix proj = part.project(X);
        for (Index i = 0; i < X.rows(); ++i)
            for (Index j = 0; j < 3; ++j) {
                double acc = 0;
                for (Index k = 0; k < N; ++k) acc += X(i, k) * part.components(k, j);
                CHECK(proj(i, j) == doctest::Approx(acc).epsilon(1e-12));
            }
        const Vector values = (part.components.transpose() * C * part.components).diagonal();
        for (Index j = 1; j < 3; ++j) CHECK(values[j] <= values[j - 1] + 1e-12);
        for (Index j = 0; j < 3; ++j) {
            Index arg;
            part.components.col(j).cwiseAbs().maxCoeff(&arg);
            CHECK(part.components(arg, j) > 0);
        }
    }
}

TEST_CASE("first principal component captures the largest sample variance") {
    Rng rng(2);
    const Index N = 5, T = 20000;
    Vector spectrum(N);
    spectrum << 6, 3, 1, 0.5, 0.2;
    const Matrix Q = random_orthogonal(rng, N);
    const Matrix Z = oracle::random_matrix(rng, T, N);
    const Matrix X = Z * spectrum.cwiseSqrt().asDiagonal() * Q.transpose();
    const PcaProjector p = fit_pca(sample_covariance(X).estimate, 1);
    const Vector scores = p.project(X).col(0);
    const double var = (scores.array() - scores.mean()).square().sum() / T;
    CHECK(std::abs(var - 6.0) / 6.0 < 0.05);
}

TEST_CASE("subspace distance") {
    Matrix C = Matrix::Zero(3, 3);
    C.diagonal() << 3, 1, 2;
    Matrix D = C;
    D.diagonal() << 1, 3, 2;
    const auto a = fit_pca(estimate_of(C), 1), b = fit_pca(estimate_of(D), 1);
    CHECK(subspace_distance(a, a) == doctest::Approx(0.0));
    CHECK(subspace_distance(a, b) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("pca subspace is unstable under a tiny eigengap while a filter is not") {
    Matrix C = Matrix::Zero(3, 3);
    C.diagonal() << 2.0 + 1e-6, 2.0, 0.5;
    Matrix E = Matrix::Zero(3, 3);
    E(0, 0) = -1e-5;
    E(1, 1) = 1e-5;
    const auto before = fit_pca(estimate_of(C), 1), after = fit_pca(estimate_of(C + E), 1);
    CHECK(subspace_distance(before, after) == doctest::Approx(std::sqrt(2.0)));
    FilterCoefficients h{0.2, 0.5, 0.1};
    CHECK(filter_distance(h, C, C + E) < 1e-4);
}

TEST_CASE("linear downstream reproduces an exact linear relation") {
    Rng rng(3);
    const Matrix F = oracle::random_matrix(rng, 50, 3);
    Vector w(3);
    w << 1.5, -2.0, 0.25;
    const Vector y = (F * w).array() + 0.7;
    DownstreamConfig cfg;
    cfg.ridge = 1e-12;
    DownstreamPredictor p(cfg);
    CHECK_FALSE(p.fitted());
    CHECK_THROWS_AS(p.predict(F), Error);
    p.fit(F, y, Task::regression);
    CHECK((p.predict(F) - y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("rbf with a huge bandwidth predicts the target mean") {
    Rng rng(4);
    const Matrix F = oracle::random_matrix(rng, 40, 2);
    const Vector y = (oracle::random_matrix(rng, 40, 1).col(0).array() + 3.0).matrix();
    DownstreamConfig cfg;
    cfg.kind = DownstreamKind::rbf;
    cfg.bandwidth = 1e6;
    cfg.ridge = 1.0;
    const Vector pred = fit_predict_downstream(F, y, oracle::random_matrix(rng, 10, 2), cfg, Task::regression);
    for (Index i = 0; i < pred.size(); ++i) CHECK(std::abs(pred[i] - y.mean()) <= 0.01 * std::abs(y.mean()));
}

TEST_CASE("rbf matches a dense kernel ridge solve") {
    Rng rng(5);
    const Index n = 30;
    const Matrix F = oracle::random_matrix(rng, n, 3);
    const Vector y = oracle::random_matrix(rng, n, 1).col(0);
    const Matrix Ft = oracle::random_matrix(rng, 8, 3);
    DownstreamConfig cfg;
    cfg.kind = DownstreamKind::rbf;
    cfg.ridge = 0.1;
    DownstreamPredictor p(cfg);
    p.fit(F, y, Task::regression);
    const double sigma = p.bandwidth();

    std::vector<double> dists;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) dists.push_back((F.row(i) - F.row(j)).norm());
    std::sort(dists.begin(), dists.end());
    const std::size_t M = dists.size();
    const double median = M % 2 ? dists[M / 2] : 0.5 * (dists[M / 2 - 1] + dists[M / 2]);
    CHECK(sigma == doctest::Approx(median).epsilon(1e-12));

    auto kern = [&](const Matrix& A, const Matrix& B) {
        Matrix K(A.rows(), B.rows());
        for (Index i = 0; i < A.rows(); ++i)
            for (Index j = 0; j < B.rows(); ++j)
                K(i, j) = std::exp(-(A.row(i) - B.row(j)).squaredNorm() / (2 * sigma * sigma));
        return K;
    };
    const Matrix K = kern(F, F) + 0.1 * Matrix::Identity(n, n);
    const Vector a = K.inverse() * (y.array() - y.mean()).matrix();
    const Vector expected = (kern(Ft, F) * a).array() + y.mean();
    CHECK((p.predict(Ft) - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("full-rank projections make downstream predictions rotation invariant") {
    Rng rng(6);
    const Index N = 4;
    const Matrix X = oracle::random_matrix(rng, 40, N);
    const Vector y = X.col(0) - X.col(2);
    const Matrix Xt = oracle::random_matrix(rng, 10, N);
    const Matrix C = sample_covariance(X).estimate.C;
    const PcaProjector p = fit_pca(estimate_of(C), N);
    for (auto kind : {DownstreamKind::linear, DownstreamKind::rbf}) {
        DownstreamConfig cfg;
        cfg.kind = kind;
        const Vector via_pca = fit_predict_downstream(p.project(X), y, p.project(Xt), cfg, Task::regression);
        const Vector direct = fit_predict_downstream(X, y, Xt, cfg, Task::regression);
        CHECK((via_pca - direct).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("classification downstream") {
    Rng rng(7);
    const Matrix F = oracle::random_matrix(rng, 60, 2);
    Vector y2(60), y3(60);
    for (Index i = 0; i < 60; ++i) {
        y2[i] = F(i, 0) > 0 ? 1 : 0;
        y3[i] = F(i, 0) > 0.5 ? 2 : (F(i, 0) > -0.5 ? 1 : 0);
    }
    for (auto kind : {DownstreamKind::linear, DownstreamKind::rbf}) {
        DownstreamConfig cfg;
        cfg.kind = kind;
        const Vector p2 = fit_predict_downstream(F, y2, F, cfg, Task::classification, 2);
        CHECK(classification_error(y2, p2) < 0.1);
        for (Index i = 0; i < 60; ++i) CHECK((p2[i] == 0.0 || p2[i] == 1.0));
        const Vector p3 = fit_predict_downstream(F, y3, F, cfg, Task::classification, 3);
        CHECK(classification_error(y3, p3) < 0.35);
    }
}

TEST_CASE("rbf support subsampling is seeded") {
    Rng rng(8);
    const Matrix F = oracle::random_matrix(rng, 120, 2);
    const Vector y = F.col(0);
    DownstreamConfig cfg;
    cfg.kind = DownstreamKind::rbf;
    cfg.max_support = 50;
    cfg.seed = 4;
    const Vector a = fit_predict_downstream(F, y, F, cfg, Task::regression);
    const Vector b = fit_predict_downstream(F, y, F, cfg, Task::regression);
    CHECK(a == b);
    CHECK(mse(y, a) < 0.1 * mse(y, Vector::Constant(120, y.mean())));
}

TEST_CASE("evaluate_baseline end to end") {
    Rng rng(9);
    Dataset train, test;
    for (Dataset* ds : {&train, &test}) {
        ds->X = oracle::random_matrix(rng, 40, 4);
        ds->y = ds->X.col(0) + ds->X.col(1);
        ds->num_groups = 2;
        for (Index i = 0; i < 40; ++i) ds->z.push_back(i % 2 + 1);
    }
    const CovarianceEstimate C = sample_covariance(train.X).estimate;
    DownstreamConfig cfg;
    const EvalReport r = evaluate_baseline(train, test, C, 4, cfg, ErrorMetric::mse);
    CHECK(r.overall_error < 1e-4);
    CHECK(r.per_group_error.size() == 2);
    CHECK(r.bias == doctest::Approx(std::abs(r.per_group_error[0] - r.per_group_error[1])));
}
