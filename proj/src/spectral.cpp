#include "fvnn/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "fvnn/error.hpp"
#include "fvnn/parallel.hpp"

namespace fvnn {

SpectralDecomposition eigendecompose(const Matrix& C) {
    require(C.rows() == C.cols(), ErrorCode::shape, "eigendecompose needs a square matrix");
    const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
    require((C - C.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale, ErrorCode::symmetry,
            "matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(C);
    require(es.info() == Eigen::Success, ErrorCode::numeric, "eigendecomposition did not converge");
    SpectralDecomposition out{es.eigenvalues(), es.eigenvectors()};
    for (Index j = 0; j < out.eigenvectors.cols(); ++j) {
        Index arg = 0;
        out.eigenvectors.col(j).cwiseAbs().maxCoeff(&arg);
        if (out.eigenvectors(arg, j) < 0) out.eigenvectors.col(j) *= -1.0;
    }
    return out;
}

FilterCoefficients::FilterCoefficients(Vector taps) : h(std::move(taps)) {
    require(h.size() >= 1, ErrorCode::parameter, "filter needs at least one tap");
    require(h.allFinite(), ErrorCode::parameter, "filter taps must be finite");
}

FilterCoefficients::FilterCoefficients(std::initializer_list<double> taps) {
    h.resize(static_cast<Index>(taps.size()));
    Index i = 0;
    for (double t : taps) h[i++] = t;
    require(h.size() >= 1, ErrorCode::parameter, "filter needs at least one tap");
    require(h.allFinite(), ErrorCode::parameter, "filter taps must be finite");
}

double frequency_response(const FilterCoefficients& h, double lambda) {
    double acc = h.h[h.h.size() - 1];
    for (Index k = h.h.size() - 2; k >= 0; --k) acc = acc * lambda + h.h[k];
    return acc;
}

Vector frequency_response(const FilterCoefficients& h, const Vector& lambda) {
    Vector out(lambda.size());
    for (Index i = 0; i < lambda.size(); ++i) out[i] = frequency_response(h, lambda[i]);
    return out;
}

Matrix apply_filter(const FilterCoefficients& h, const Matrix& C, const Matrix& X) {
    require(C.rows() == C.cols(), ErrorCode::shape, "filter shift operator must be square");
    require(X.rows() == C.rows(), ErrorCode::shape,
            "signal has " + std::to_string(X.rows()) + " rows, operator is " + std::to_string(C.rows()));
    Matrix power = X;
    Matrix out = h.h[0] * X;
    for (Index k = 1; k < h.h.size(); ++k) {
        power = C * power;
        out.noalias() += h.h[k] * power;
    }
    return out;
}

Matrix filter_matrix(const FilterCoefficients& h, const Matrix& C) {
    require(C.rows() == C.cols(), ErrorCode::shape, "filter shift operator must be square");
    const Index n = C.rows();
    Matrix out = h.h[h.h.size() - 1] * Matrix::Identity(n, n);
    for (Index k = h.h.size() - 2; k >= 0; --k) {
        out = out * C;
        out.diagonal().array() += h.h[k];
    }
    return out;
}

double lipschitz_constant(const FilterCoefficients& h, const Vector& lambda) {
    const Vector response = frequency_response(h, lambda);
    double best = -1.0;
    for (Index i = 0; i < lambda.size(); ++i)
        for (Index j = i + 1; j < lambda.size(); ++j) {
            const double gap = std::abs(lambda[i] - lambda[j]);
            if (gap == 0.0) continue;
            best = std::max(best, std::abs(response[i] - response[j]) / gap);
        }
    require(best >= 0.0, ErrorCode::undefined_constant,
            "Lipschitz constant needs at least two distinct eigenvalues");
    return best;
}

double spectral_norm(const Matrix& A, double rel_tol, int max_iter, std::uint64_t seed) {
    if (A.size() == 0) return 0.0;
    Rng rng(seed);
    Vector v = standard_normal(rng, A.cols(), 1);
    v.normalize();
    double mu = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const Vector Av = A * v;
        mu = Av.squaredNorm();
        if (mu == 0.0) return 0.0;
        const Vector w = A.transpose() * Av;
        // Stop on the eigen-residual of A^T A rather than on the change of the estimate.
        if ((w - mu * v).norm() <= rel_tol * mu) return std::sqrt(mu);
        v = w / w.norm();
    }
    return std::sqrt(mu);
}

double filter_distance(const FilterCoefficients& h, const Matrix& C1, const Matrix& C2) {
    require(C1.rows() == C2.rows() && C1.cols() == C2.cols(), ErrorCode::shape,
            "filter_distance operands differ in dimension");
    return spectral_norm(filter_matrix(h, C1) - filter_matrix(h, C2));
}

double stability_bound(double P, Index N, double error_norm) {
    const double n = static_cast<double>(N);
    return P * std::sqrt(n + 2.0 * n * n) * error_norm;
}

double quadratic_slack(const FilterCoefficients& h, double lambda_max, double error_norm) {
    double sum = 0.0;
    for (Index k = 1; k < h.h.size(); ++k)
        sum += std::abs(h.h[k]) * static_cast<double>(k) * std::pow(std::abs(lambda_max), static_cast<double>(k));
    return 2.0 * error_norm * error_norm * sum;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::parameter, "slope needs at least two points");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

StabilitySweep stability_sweep(const FilterCoefficients& h, const Matrix& C_true, const CovarianceSampler& sampler,
                               const std::vector<Index>& T_grid, int trials, std::uint64_t seed, int jobs) {
    require(trials >= 1, ErrorCode::parameter, "stability sweep needs at least one trial");
    require(!T_grid.empty(), ErrorCode::parameter, "stability sweep needs a sample-count grid");
    for (std::size_t i = 1; i < T_grid.size(); ++i)
        require(T_grid[i] > T_grid[i - 1], ErrorCode::parameter, "sample-count grid must be ascending");

    const SpectralDecomposition truth = eigendecompose(C_true);
    const double P = lipschitz_constant(h, truth.eigenvalues);
    const double lambda_max = truth.eigenvalues.cwiseAbs().maxCoeff();
    const Matrix H_true = filter_matrix(h, C_true);

    StabilitySweep out;
    out.lipschitz = P;
    out.rows.resize(T_grid.size() * static_cast<std::size_t>(trials));
    parallel_for(out.rows.size(), jobs, [&](std::size_t job) {
        const std::size_t ti = job / static_cast<std::size_t>(trials);
        const int trial = static_cast<int>(job % static_cast<std::size_t>(trials));
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(T_grid[ti]), static_cast<std::uint64_t>(trial)}));
        const Matrix C_hat = sampler(rng, T_grid[ti]);
        require(C_hat.rows() == C_true.rows() && C_hat.cols() == C_true.cols(), ErrorCode::shape,
                "sampler returned a covariance of the wrong size");
        StabilityRow row;
        row.T = T_grid[ti];
        row.trial = trial;
        row.filter_distance = spectral_norm(H_true - filter_matrix(h, C_hat));
        row.error_norm = spectral_norm(C_true - C_hat);
        row.bound = stability_bound(P, C_true.rows(), row.error_norm);
        row.slack = quadratic_slack(h, lambda_max, row.error_norm);
        out.rows[job] = row;
    });

    std::vector<double> xs, ys;
    for (std::size_t ti = 0; ti < T_grid.size(); ++ti) {
        StabilitySummary s;
        s.T = T_grid[ti];
        for (int t = 0; t < trials; ++t) {
            const auto& row = out.rows[ti * static_cast<std::size_t>(trials) + static_cast<std::size_t>(t)];
            s.mean_distance += row.filter_distance / trials;
            s.mean_error_norm += row.error_norm / trials;
            s.mean_bound += row.bound / trials;
        }
        out.summary.push_back(s);
        xs.push_back(static_cast<double>(s.T));
        ys.push_back(s.mean_distance);
    }
    out.slope = xs.size() >= 2 && std::all_of(ys.begin(), ys.end(), [](double v) { return v > 0; })
                    ? loglog_slope(xs, ys)
                    : 0.0;
    return out;
}

}  // namespace fvnn
