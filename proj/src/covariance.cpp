#include "fvnn/covariance.hpp"

#include <Eigen/Eigenvalues>
#include <string>

#include "fvnn/csv.hpp"
#include "fvnn/error.hpp"

namespace fvnn {

std::string_view to_string(CovarianceKind kind) {
    switch (kind) {
        case CovarianceKind::sample: return "sample";
        case CovarianceKind::balanced: return "balanced";
        case CovarianceKind::debiased: return "debiased";
    }
    return "sample";
}

CovarianceKind covariance_kind_from_string(std::string_view name) {
    if (name == "sample") return CovarianceKind::sample;
    if (name == "balanced") return CovarianceKind::balanced;
    if (name == "debiased") return CovarianceKind::debiased;
    fail(ErrorCode::config, "unknown covariance kind '" + std::string(name) + "'");
}

namespace {
Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Matrix& C) {
    if (C.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(C, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}
}  // namespace

SampleCovariance sample_covariance(const Matrix& X) {
    require(X.rows() >= 1, ErrorCode::empty_data, "sample covariance needs at least one row");
    SampleCovariance out;
    out.mean = X.colwise().mean().transpose();
    const Matrix centered = X.rowwise() - out.mean.transpose();
    out.estimate.C = symmetrized(centered.transpose() * centered / static_cast<double>(X.rows()));
    out.estimate.kind = CovarianceKind::sample;
    out.estimate.sample_count = X.rows();
    return out;
}

BalanceWeights balance_weights(Index Tg, Index Th, double alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::parameter,
            "alpha must lie in [0, 1], got " + std::to_string(alpha));
    require(Tg >= 0 && Th >= 0 && Tg + Th > 0, ErrorCode::parameter, "group sizes must be nonnegative and not both 0");
    const double T = static_cast<double>(Tg + Th);
    return {alpha * static_cast<double>(Tg) / T + alpha - 1.0, alpha * static_cast<double>(Th) / T + 1.0 - alpha};
}

CovarianceEstimate balanced_covariance(const CovarianceEstimate& Cg, const CovarianceEstimate& Ch, Index Tg, Index Th,
                                       double alpha) {
    require(Cg.C.rows() == Ch.C.rows() && Cg.C.cols() == Ch.C.cols(), ErrorCode::shape,
            "group covariances differ in dimension");
    const BalanceWeights w = balance_weights(Tg, Th, alpha);
    CovarianceEstimate out;
    out.C = symmetrized(w.g * Cg.C + w.h * Ch.C);
    out.kind = CovarianceKind::balanced;
    out.param = alpha;
    out.sample_count = Tg + Th;
    out.indefinite = min_eigenvalue(out.C) < -1e-8;
    return out;
}

CovarianceEstimate debiased_covariance(const Matrix& X, const GroupIndicator& Z, double beta) {
    require(beta >= 0.0, ErrorCode::parameter, "beta must be >= 0, got " + std::to_string(beta));
    require(X.rows() >= 1, ErrorCode::empty_data, "debiased covariance needs at least one row");
    require(Z.Z.rows() == X.rows(), ErrorCode::shape, "group indicator rows differ from data rows");
    const double T = static_cast<double>(X.rows());
    const Matrix centered = X.rowwise() - X.colwise().mean();

    Matrix C = centered.transpose() * centered;
    if (beta > 0.0) {
        const Matrix sums = Z.Z.transpose() * centered;  // G x N per-group sums
        Vector d(Z.Z.cols());
        for (Index g = 0; g < d.size(); ++g)
            d[g] = beta / (1.0 + beta * static_cast<double>(Z.group_sizes[static_cast<std::size_t>(g)]));
        C -= sums.transpose() * d.asDiagonal() * sums;
    }
    CovarianceEstimate out;
    out.C = symmetrized(C / T);
    out.kind = CovarianceKind::debiased;
    out.param = beta;
    out.sample_count = X.rows();
    return out;
}

std::vector<GroupCovariance> group_covariances(const Dataset& ds) {
    ds.require_all_groups();
    std::vector<GroupCovariance> out;
    for (const auto& part : partition_by_group(ds)) {
        auto sc = sample_covariance(part.X);
        out.push_back({std::move(sc.mean), std::move(sc.estimate), part.size()});
    }
    return out;
}

CovarianceEstimate clip_negative_eigenvalues(const CovarianceEstimate& est) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(est.C);
    const Vector clipped = es.eigenvalues().cwiseMax(0.0);
    CovarianceEstimate out = est;
    out.C = symmetrized(es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose());
    out.indefinite = false;
    return out;
}

CovarianceEstimate estimate_covariance(const Dataset& ds, const CovarianceRecipe& recipe) {
    CovarianceEstimate est;
    switch (recipe.kind) {
        case CovarianceKind::sample:
            est = sample_covariance(ds.X).estimate;
            break;
        case CovarianceKind::balanced: {
            require(ds.num_groups == 2, ErrorCode::group, "balanced covariance is defined for exactly two groups");
            require(recipe.disadvantaged_group == 1 || recipe.disadvantaged_group == 2, ErrorCode::config,
                    "disadvantaged_group must be 1 or 2");
            const auto groups = group_covariances(ds);
            const auto& h = groups[static_cast<std::size_t>(recipe.disadvantaged_group - 1)];
            const auto& g = groups[static_cast<std::size_t>(2 - recipe.disadvantaged_group)];
            est = balanced_covariance(g.estimate, h.estimate, g.size, h.size, recipe.alpha);
            break;
        }
        case CovarianceKind::debiased:
            est = debiased_covariance(ds.X, GroupIndicator::from_labels(ds.z, ds.num_groups), recipe.beta);
            break;
    }
    if (recipe.clip_negative) est = clip_negative_eigenvalues(est);
    return est;
}

void write_covariance_csv(const std::filesystem::path& path, const CovarianceEstimate& est) {
    csv::write_matrix(path, est.C);
}

CovarianceEstimate read_covariance_csv(const std::filesystem::path& path, CovarianceKind kind) {
    CovarianceEstimate est;
    est.C = csv::read_matrix(path);
    require(est.C.rows() == est.C.cols(), ErrorCode::shape, "covariance file is not square");
    est.kind = kind;
    return est;
}

}  // namespace fvnn
