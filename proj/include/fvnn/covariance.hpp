#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "fvnn/data.hpp"
#include "fvnn/types.hpp"

namespace fvnn {

enum class CovarianceKind { sample, balanced, debiased };

std::string_view to_string(CovarianceKind kind);
CovarianceKind covariance_kind_from_string(std::string_view name);

struct CovarianceEstimate {
    Matrix C;
    CovarianceKind kind = CovarianceKind::sample;
    /// alpha for balanced estimates, beta for debiased ones, 0 otherwise.
    double param = 0.0;
    Index sample_count = 0;
    /// Set when the estimate has an eigenvalue below -1e-8 (balanced only).
    bool indefinite = false;

    Index dim() const { return C.rows(); }
};

struct SampleCovariance {
    Vector mean;
    CovarianceEstimate estimate;
};

/// Mean and 1/T-normalised covariance about that mean.
SampleCovariance sample_covariance(const Matrix& X);

struct BalanceWeights {
    double g = 0.0;  // weight on the advantaged group
    double h = 0.0;  // weight on the disadvantaged group
};

/// alpha_g = alpha*T_g/T + alpha - 1, alpha_h = alpha*T_h/T + 1 - alpha.
BalanceWeights balance_weights(Index Tg, Index Th, double alpha);

/// alpha_g * Cg + alpha_h * Ch, where `Ch` belongs to the disadvantaged group.
CovarianceEstimate balanced_covariance(const CovarianceEstimate& Cg, const CovarianceEstimate& Ch, Index Tg, Index Th,
                                       double alpha);

/// X^T (I + beta Z Z^T)^{-1} X / T on globally recentred X, without forming a
/// T x T matrix: the inverse equals I - Z diag(beta / (1 + beta T_g)) Z^T.
CovarianceEstimate debiased_covariance(const Matrix& X, const GroupIndicator& Z, double beta);

struct GroupCovariance {
    Vector mean;
    CovarianceEstimate estimate;
    Index size = 0;
};

/// Per-group sample covariances, each about its own group mean.
std::vector<GroupCovariance> group_covariances(const Dataset& ds);

/// Projects negative eigenvalues to zero.
CovarianceEstimate clip_negative_eigenvalues(const CovarianceEstimate& est);

/// Recipe for estimating one covariance from a two-or-more-group dataset.
struct CovarianceRecipe {
    CovarianceKind kind = CovarianceKind::sample;
    double alpha = 0.5;
    double beta = 1.0;
    int disadvantaged_group = 1;
    bool clip_negative = false;
};

CovarianceEstimate estimate_covariance(const Dataset& ds, const CovarianceRecipe& recipe);

void write_covariance_csv(const std::filesystem::path& path, const CovarianceEstimate& est);
CovarianceEstimate read_covariance_csv(const std::filesystem::path& path, CovarianceKind kind = CovarianceKind::sample);

}  // namespace fvnn
