#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

#include "fvnn/covariance.hpp"
#include "fvnn/error.hpp"
#include "oracles.hpp"

using namespace fvnn;

namespace {
Dataset random_two_group(Rng& rng, Index Tg1, Index Tg2, Index N) {
    Dataset ds;
    ds.X = oracle::random_matrix(rng, Tg1 + Tg2, N);
    ds.y = Vector::Zero(Tg1 + Tg2);
    ds.num_groups = 2;
    for (Index i = 0; i < Tg1 + Tg2; ++i) ds.z.push_back(i < Tg1 ? 1 : 2);
    return ds;
}

double min_eig(const Matrix& C) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(C, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}
}  // namespace

TEST_CASE("sample covariance hand examples") {
    Matrix X(2, 2);
    X << 1, 0, -1, 0;
    const auto sc = sample_covariance(X);
    CHECK(sc.mean.isZero());
    Matrix expected(2, 2);
    expected << 1, 0, 0, 0;
    CHECK(sc.estimate.C == expected);

    const auto single = sample_covariance(Matrix::Constant(1, 3, 2.5));
    CHECK(single.estimate.C.isZero());
    CHECK_THROWS_AS(sample_covariance(Matrix(0, 3)), Error);
}

TEST_CASE("sample covariance matches the loop oracle") {
    Rng rng(1);
    const Matrix X = oracle::random_matrix(rng, 50, 4);
    const auto sc = sample_covariance(X);
    CHECK((sc.estimate.C - oracle::loop_covariance(X)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sc.estimate.C - sc.estimate.C.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(min_eig(sc.estimate.C) >= -1e-8);
}

TEST_CASE("balanced covariance coefficients") {
    Rng rng(2);
    const Matrix Cg = oracle::random_spd(rng, 4), Ch = oracle::random_spd(rng, 4);
    CovarianceEstimate g{Cg}, h{Ch};

    const auto one = balanced_covariance(g, h, 30, 10, 1.0);
    CHECK((one.C - (0.75 * Cg + 0.25 * Ch)).cwiseAbs().maxCoeff() < 1e-14);

    const auto zero = balanced_covariance(g, h, 30, 10, 0.0);
    CHECK((zero.C - (Ch - Cg)).cwiseAbs().maxCoeff() < 1e-14);

    // Scalar re-evaluation of the coefficient formula for alpha = 0.5, T_g = T_h.
    const double a = 0.5, Tg = 20, Th = 20, T = 40;
    const double ag = a * Tg / T + a - 1.0;  // -0.25
    const double ah = a * Th / T + 1.0 - a;  // 0.75
    CHECK(ag == -0.25);
    CHECK(ah == 0.75);
    const auto half = balanced_covariance(g, h, 20, 20, 0.5);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) CHECK(half.C(i, j) == doctest::Approx(ag * Cg(i, j) + ah * Ch(i, j)).epsilon(1e-14));
    CHECK(half.kind == CovarianceKind::balanced);
    CHECK(half.param == 0.5);

    CHECK_THROWS_AS(balanced_covariance(g, h, 1, 1, -0.1), Error);
    CHECK_THROWS_AS(balanced_covariance(g, h, 1, 1, 1.1), Error);
}

TEST_CASE("balanced covariance: both forms agree under the pooled decomposition") {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        Dataset ds = random_two_group(rng, 30 + rep, 70, 5);
        // Equal group means: centre each group, then C_hat about the shared mean is pooled.
        for (const auto& part : partition_by_group(ds)) {
            const Vector mu = part.X.colwise().mean();
            for (auto r : part.rows) ds.X.row(r) -= mu.transpose();
        }
        const auto groups = group_covariances(ds);
        const auto& g = groups[1];
        const auto& h = groups[0];  // group 1 disadvantaged
        const Matrix C = sample_covariance(ds.X).estimate.C;
        for (double alpha : {0.0, 0.3, 0.5, 1.0}) {
            const Matrix first = alpha * C + (1 - alpha) * (h.estimate.C - g.estimate.C);
            const Matrix second = balanced_covariance(g.estimate, h.estimate, g.size, h.size, alpha).C;
            CHECK((first - second).norm() < 1e-8);
        }
    }
}

TEST_CASE("balanced covariance flags indefinite estimates") {
    CovarianceEstimate g{Matrix::Identity(2, 2) * 2.0}, h{Matrix::Identity(2, 2)};
    const auto est = balanced_covariance(g, h, 50, 50, 0.0);  // h - g = -I
    CHECK(est.indefinite);
    const auto clipped = clip_negative_eigenvalues(est);
    CHECK(!clipped.indefinite);
    CHECK(clipped.C.isZero(1e-14));
}

TEST_CASE("debiased covariance: beta = 0 is the plain covariance") {
    Rng rng(4);
    Dataset ds = random_two_group(rng, 20, 30, 4);
    const auto Z = GroupIndicator::from_labels(ds.z, 2);
    const Matrix Xc = ds.X.rowwise() - ds.X.colwise().mean();
    const auto est = debiased_covariance(ds.X, Z, 0.0);
    CHECK((est.C - Xc.transpose() * Xc / 50.0).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(debiased_covariance(ds.X, Z, -1.0), Error);
}

TEST_CASE("debiased covariance: low-rank path matches dense inverse") {
    Rng rng(5);
    for (int rep = 0; rep < 25; ++rep) {
        const Index T1 = 5 + rep * 3, T2 = 10 + rep * 4;
        const int G = rep % 3 == 0 ? 3 : 2;
        Dataset ds = random_two_group(rng, T1, T2, 6);
        ds.num_groups = G;
        if (G == 3)
            for (std::size_t i = 0; i < ds.z.size(); i += 3) ds.z[i] = 3;
        ds.X.col(0).array() += 2.0;  // nonzero mean exercises internal recentring
        const double beta = 0.1 * rep;
        const auto Z = GroupIndicator::from_labels(ds.z, G);
        const Matrix fast = debiased_covariance(ds.X, Z, beta).C;
        const Matrix dense = oracle::dense_debiased(ds.X, ds.z, G, beta);
        CHECK((fast - dense).norm() < 1e-10);
        CHECK(min_eig(fast) >= -1e-8);
    }
}

TEST_CASE("debiased covariance: large beta approaches group-mean centring") {
    Rng rng(6);
    Dataset ds = random_two_group(rng, 40, 60, 4);
    ds.X.topRows(40).array() += 1.5;
    const auto Z = GroupIndicator::from_labels(ds.z, 2);
    const Matrix fast = debiased_covariance(ds.X, Z, 1e6).C;
    const Matrix dense = oracle::dense_debiased(ds.X, ds.z, 2, 1e6);
    // Limit I - Z diag(1/T_g) Z^T: covariance of group-mean-centred data.
    Matrix centred = ds.X;
    for (const auto& part : partition_by_group(ds)) {
        const Vector mu = part.X.colwise().mean();
        for (auto r : part.rows) centred.row(r) -= mu.transpose();
    }
    const Matrix limit = centred.transpose() * centred / 100.0;
    CHECK((fast - dense).norm() < 1e-4);
    CHECK((fast - limit).norm() < 1e-4);
}

TEST_CASE("group covariances use per-group means") {
    Rng rng(7);
    Dataset ds = random_two_group(rng, 12, 9, 3);
    const auto groups = group_covariances(ds);
    REQUIRE(groups.size() == 2);
    CHECK((groups[0].estimate.C - oracle::loop_covariance(ds.X.topRows(12))).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((groups[1].estimate.C - oracle::loop_covariance(ds.X.bottomRows(9))).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(groups[0].size == 12);

    Dataset single = ds.subset({0, 13});
    const auto g1 = group_covariances(single);
    CHECK(g1[0].estimate.C.isZero());

    ds.num_groups = 3;
    CHECK_THROWS_AS(group_covariances(ds), Error);
}

TEST_CASE("estimators are invariant to joint row permutation") {
    Rng rng(8);
    Dataset ds = random_two_group(rng, 25, 35, 5);
    std::vector<Index> perm(60);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const Dataset shuffled = ds.subset(perm);
    for (auto kind : {CovarianceKind::sample, CovarianceKind::balanced, CovarianceKind::debiased}) {
        CovarianceRecipe recipe{.kind = kind, .alpha = 0.4, .beta = 2.0};
        const Matrix a = estimate_covariance(ds, recipe).C, b = estimate_covariance(shuffled, recipe).C;
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("covariance CSV round trip") {
    Rng rng(9);
    CovarianceEstimate est{oracle::random_spd(rng, 4)};
    const auto path = std::filesystem::temp_directory_path() / "fvnn_cov.csv";
    write_covariance_csv(path, est);
    CHECK(read_covariance_csv(path).C == est.C);
}
