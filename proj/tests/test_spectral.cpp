#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "fvnn/error.hpp"
#include "fvnn/spectral.hpp"
#include "oracles.hpp"

using namespace fvnn;

TEST_CASE("eigendecompose diagonal and identity") {
    Matrix C = Vector(Eigen::Vector3d(3, 1, 2)).asDiagonal();
    const auto sd = eigendecompose(C);
    CHECK(sd.eigenvalues == Vector(Eigen::Vector3d(1, 2, 3)));
    Matrix expected(3, 3);
    expected << 0, 0, 1, 1, 0, 0, 0, 1, 0;
    CHECK((sd.eigenvectors - expected).cwiseAbs().maxCoeff() < 1e-12);

    const auto id = eigendecompose(Matrix::Identity(4, 4));
    CHECK((id.eigenvalues.array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("eigendecompose reconstruction, orthonormality and sign convention") {
    Rng rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix C = oracle::random_spd(rng, 8);
        const auto sd = eigendecompose(C);
        const Matrix& V = sd.eigenvectors;
        CHECK((V.transpose() * V - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((V * sd.eigenvalues.asDiagonal() * V.transpose() - C).norm() < 1e-8 * std::max(1.0, C.norm()));
        for (Index i = 1; i < 8; ++i) CHECK(sd.eigenvalues[i] >= sd.eigenvalues[i - 1]);
        for (Index j = 0; j < 8; ++j) {
            Index arg;
            V.col(j).cwiseAbs().maxCoeff(&arg);
            CHECK(V(arg, j) > 0);
        }
    }
}

TEST_CASE("eigendecompose rejects non-symmetric input") {
    Matrix C(2, 2);
    C << 1, 2, 0, 1;
    try {
        eigendecompose(C);
        FAIL("expected symmetry error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::symmetry);
    }
}

TEST_CASE("frequency response") {
    const Vector lambda = Vector(Eigen::Vector3d(0.5, 2.0, -1.0));
    CHECK(frequency_response(FilterCoefficients{4.0}, lambda) == Vector::Constant(3, 4.0));
    CHECK(frequency_response(FilterCoefficients{0.0, 1.0}, lambda) == lambda);
    CHECK(frequency_response(FilterCoefficients{1.0, 2.0, 3.0}, 2.0) == 17.0);
}

TEST_CASE("apply filter") {
    Rng rng(2);
    const Matrix C = oracle::random_spd(rng, 5);
    const Matrix X = oracle::random_matrix(rng, 5, 3);
    CHECK(apply_filter(FilterCoefficients{1.0}, C, X) == X);
    CHECK((apply_filter(FilterCoefficients{1.0, 1.0, 1.0}, Matrix::Identity(5, 5), X) - 3 * X).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(apply_filter(FilterCoefficients{1.0}, C, Matrix::Zero(4, 1)), Error);

    const FilterCoefficients h{0.3, -1.2, 0.5, 0.1};
    Matrix dense = Matrix::Zero(5, 5), power = Matrix::Identity(5, 5);
    for (int k = 0; k < 4; ++k) {
        dense += h.h[k] * power;
        power = power * C;
    }
    CHECK((apply_filter(h, C, X) - dense * X).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((filter_matrix(h, C) - dense).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spectral consistency of filters on eigenvectors") {
    Rng rng(3);
    std::uniform_int_distribution<int> dim(2, 16), order(0, 5);
    for (int rep = 0; rep < 100; ++rep) {
        const Index N = dim(rng);
        const int K = order(rng);
        const Matrix C = oracle::random_spd(rng, N);
        const FilterCoefficients h(oracle::random_matrix(rng, K + 1, 1).col(0));
        const auto sd = eigendecompose(C);
        for (Index i = 0; i < N; ++i) {
            const Vector v = sd.eigenvectors.col(i);
            const Vector lhs = apply_filter(h, C, v);
            CHECK((lhs - frequency_response(h, sd.eigenvalues[i]) * v).norm() < 1e-8);
        }
    }
}

TEST_CASE("Lipschitz constant") {
    const Vector lambda = Vector(Eigen::Vector3d(1, 2, 3));
    CHECK(lipschitz_constant(FilterCoefficients{0.0, -2.5}, lambda) == doctest::Approx(2.5));
    CHECK(lipschitz_constant(FilterCoefficients{7.0}, lambda) == 0.0);
    CHECK(lipschitz_constant(FilterCoefficients{0.0, 0.0, 1.0}, lambda) == doctest::Approx(5.0));
    CHECK_THROWS_AS(lipschitz_constant(FilterCoefficients{0.0, 1.0}, Vector::Constant(3, 2.0)), Error);

    Rng rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        const Vector l = oracle::random_matrix(rng, 7, 1).col(0);
        const FilterCoefficients h(oracle::random_matrix(rng, 4, 1).col(0));
        const double P = lipschitz_constant(h, l);
        const Vector r = frequency_response(h, l);
        for (Index i = 0; i < 7; ++i)
            for (Index j = 0; j < 7; ++j)
                if (i != j) CHECK(std::abs(r[i] - r[j]) <= P * std::abs(l[i] - l[j]) + 1e-12);
    }
}

TEST_CASE("filter distance") {
    Rng rng(5);
    const Matrix C1 = oracle::random_spd(rng, 5), C2 = oracle::random_spd(rng, 5), C3 = oracle::random_spd(rng, 5);
    const FilterCoefficients h{0.2, 0.7, -0.3};
    CHECK(filter_distance(h, C1, C1) == 0.0);

    Eigen::JacobiSVD<Matrix> svd(C1 - C2);
    CHECK(filter_distance(FilterCoefficients{0.0, 1.0}, C1, C2) ==
          doctest::Approx(svd.singularValues()[0]).epsilon(1e-6));

    for (int rep = 0; rep < 20; ++rep) {
        const Matrix A = oracle::random_symmetric(rng, 5), B = oracle::random_symmetric(rng, 5);
        const Matrix D = filter_matrix(h, A) - filter_matrix(h, B);
        Eigen::JacobiSVD<Matrix> s(D);
        CHECK(filter_distance(h, A, B) == doctest::Approx(s.singularValues()[0]).epsilon(1e-6));
    }

    // Pseudometric.
    const double d12 = filter_distance(h, C1, C2), d21 = filter_distance(h, C2, C1);
    CHECK(d12 == doctest::Approx(d21).epsilon(1e-9));
    CHECK(filter_distance(h, C1, C3) <= d12 + filter_distance(h, C2, C3) + 1e-9);
    CHECK_THROWS_AS(filter_distance(h, C1, Matrix::Identity(4, 4)), Error);
}

TEST_CASE("stability bound arithmetic") {
    CHECK(stability_bound(0.0, 10, 3.0) == 0.0);
    CHECK(stability_bound(1.0, 1, 1.0) == doctest::Approx(std::sqrt(3.0)));
    CHECK(stability_bound(2.0, 10, 0.5) == doctest::Approx(14.491376746));
}

TEST_CASE("stability sweep") {
    Rng rng(6);
    const Index N = 6;
    const Matrix C = oracle::random_spd(rng, N);
    const Eigen::LLT<Matrix> llt(C);
    const Matrix L = llt.matrixL();
    CovarianceSampler sampler = [&](Rng& r, Index T) {
        const Matrix X = oracle::random_matrix(r, T, N) * L.transpose();
        const Matrix Xc = X.rowwise() - X.colwise().mean();
        return Matrix(Xc.transpose() * Xc / static_cast<double>(T));
    };
    const std::vector<Index> grid{50, 200, 800};

    const auto linear = stability_sweep(FilterCoefficients{0.0, 1.0}, C, sampler, grid, 4, 11);
    REQUIRE(linear.rows.size() == 12);
    for (const auto& row : linear.rows) CHECK(row.filter_distance == row.error_norm);

    const FilterCoefficients h{0.1, 0.8, -0.2};
    const auto sweep = stability_sweep(h, C, sampler, grid, 4, 11);
    for (const auto& row : sweep.rows) CHECK(row.filter_distance <= row.bound + row.slack);
    CHECK(sweep.slope < 0.0);

    const auto parallel = stability_sweep(h, C, sampler, grid, 4, 11, 3);
    for (std::size_t i = 0; i < sweep.rows.size(); ++i)
        CHECK(parallel.rows[i].filter_distance == sweep.rows[i].filter_distance);

    CHECK_THROWS_AS(stability_sweep(h, C, sampler, {100, 50}, 2, 1), Error);
    CHECK_THROWS_AS(stability_sweep(h, C, sampler, grid, 0, 1), Error);
}

TEST_CASE("log-log slope") {
    std::vector<double> x{1, 10, 100}, y{1, 0.1, 0.01};
    CHECK(loglog_slope(x, y) == doctest::Approx(-1.0));
}
