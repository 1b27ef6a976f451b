#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fvnn/rng.hpp"
#include "fvnn/types.hpp"

namespace fvnn {

/// Eigenvalues ascending, eigenvectors as orthonormal columns. Each
/// eigenvector's largest-magnitude entry is positive.
struct SpectralDecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;
};

SpectralDecomposition eigendecompose(const Matrix& C);

/// Polynomial filter taps h_0..h_K.
struct FilterCoefficients {
    Vector h;

    FilterCoefficients() : h(Vector::Zero(1)) {}
    explicit FilterCoefficients(Vector taps);
    FilterCoefficients(std::initializer_list<double> taps);

    int order() const { return static_cast<int>(h.size()) - 1; }
};

double frequency_response(const FilterCoefficients& h, double lambda);
Vector frequency_response(const FilterCoefficients& h, const Vector& lambda);

/// sum_k h_k C^k X through repeated products with C.
Matrix apply_filter(const FilterCoefficients& h, const Matrix& C, const Matrix& X);

/// Dense H(C).
Matrix filter_matrix(const FilterCoefficients& h, const Matrix& C);

/// Smallest P with |h(l_i) - h(l_j)| <= P |l_i - l_j| over all distinct pairs.
double lipschitz_constant(const FilterCoefficients& h, const Vector& lambda);

/// Largest singular value by power iteration on A^T A.
double spectral_norm(const Matrix& A, double rel_tol = 1e-6, int max_iter = 10000, std::uint64_t seed = 0x5eed);

/// ||H(C1) - H(C2)||_2.
double filter_distance(const FilterCoefficients& h, const Matrix& C1, const Matrix& C2);

/// First-order stability bound P * sqrt(N + 2N^2) * ||E||.
double stability_bound(double P, Index N, double error_norm);

/// Second-order allowance 2 ||E||^2 sum_k |h_k| k lambda_max^k.
double quadratic_slack(const FilterCoefficients& h, double lambda_max, double error_norm);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Draws one covariance estimate from T samples.
using CovarianceSampler = std::function<Matrix(Rng& rng, Index T)>;

struct StabilityRow {
    Index T = 0;
    int trial = 0;
    double filter_distance = 0.0;
    double error_norm = 0.0;
    double bound = 0.0;
    double slack = 0.0;
};

struct StabilitySummary {
    Index T = 0;
    double mean_distance = 0.0;
    double mean_error_norm = 0.0;
    double mean_bound = 0.0;
};

struct StabilitySweep {
    std::vector<StabilityRow> rows;  // ordered by (T, trial)
    std::vector<StabilitySummary> summary;
    double lipschitz = 0.0;
    double slope = 0.0;
};

/// Monte-Carlo measurement of ||H(C) - H(C_hat)|| against sample count.
/// Trials run on up to `jobs` threads with per-(T, trial) seeds.
StabilitySweep stability_sweep(const FilterCoefficients& h, const Matrix& C_true, const CovarianceSampler& sampler,
                               const std::vector<Index>& T_grid, int trials, std::uint64_t seed, int jobs = 1);

}  // namespace fvnn
