#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fvnn/data.hpp"
#include "fvnn/types.hpp"

namespace fvnn {

enum class ErrorMetric { smape, mse, classification_error };

std::string_view to_string(ErrorMetric m);
ErrorMetric error_metric_from_string(std::string_view name);

/// mean of 2|yhat - y| / (|y| + |yhat|); a term with y = yhat = 0 counts 0.
double smape(const Vector& y_true, const Vector& y_pred);
double mse(const Vector& y_true, const Vector& y_pred);
/// Fraction of mismatched labels.
double classification_error(const Vector& y_true, const Vector& y_pred);
double error_value(ErrorMetric metric, const Vector& y_true, const Vector& y_pred);

/// sum over pairs g < h of |values_g - values_h|.
double group_imbalance(const Vector& per_group);

struct EvalReport {
    double overall_error = 0.0;
    Vector per_group_error;
    double bias = 0.0;
    std::vector<Index> counts;

    /// Throws numeric error if bias is not recomputable from per_group_error.
    void check_consistency() const;
};

EvalReport group_bias_report(const Dataset& test, const Vector& predictions, ErrorMetric metric);

/// One line of the results schema: method, covariance_kind, alpha, beta,
/// gamma, m_pcs, seed, overall_error, error_g1..gG, bias, then any
/// experiment-specific key columns.
struct ResultRow {
    std::string method;
    std::string covariance_kind;
    double alpha = 0.0;  // NaN when not applicable
    double beta = 0.0;
    double gamma = 0.0;
    Index m_pcs = 0;     // 0 when not applicable
    std::uint64_t seed = 0;
    EvalReport report;
    std::vector<std::string> extra;
};

std::vector<std::string> result_header(int num_groups, const std::vector<std::string>& extra_columns = {});
std::string result_csv(const std::vector<ResultRow>& rows, int num_groups,
                       const std::vector<std::string>& extra_columns = {});
/// Checks a results CSV text against the schema; throws schema error.
void check_result_csv(const std::string& text, int num_groups);

}  // namespace fvnn
