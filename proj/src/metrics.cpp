#include "fvnn/metrics.hpp"

#include <cmath>
#include <sstream>

#include "fvnn/csv.hpp"
#include "fvnn/error.hpp"

namespace fvnn {

std::string_view to_string(ErrorMetric m) {
    switch (m) {
        case ErrorMetric::smape: return "smape";
        case ErrorMetric::mse: return "mse";
        case ErrorMetric::classification_error: return "classification_error";
    }
    return "mse";
}

ErrorMetric error_metric_from_string(std::string_view name) {
    if (name == "smape") return ErrorMetric::smape;
    if (name == "mse") return ErrorMetric::mse;
    if (name == "classification_error") return ErrorMetric::classification_error;
    fail(ErrorCode::config, "unknown error metric '" + std::string(name) + "'");
}

namespace {
void check_pair(const Vector& a, const Vector& b) {
    require(a.size() == b.size(), ErrorCode::shape, "prediction and target lengths differ");
    require(a.size() > 0, ErrorCode::empty_data, "metric on empty input");
}
}  // namespace

double smape(const Vector& y_true, const Vector& y_pred) {
    check_pair(y_true, y_pred);
    double sum = 0.0;
    for (Index i = 0; i < y_true.size(); ++i) {
        const double denom = std::abs(y_true[i]) + std::abs(y_pred[i]);
        if (denom > 0.0) sum += 2.0 * std::abs(y_pred[i] - y_true[i]) / denom;
    }
    return sum / static_cast<double>(y_true.size());
}

double mse(const Vector& y_true, const Vector& y_pred) {
    check_pair(y_true, y_pred);
    return (y_pred - y_true).squaredNorm() / static_cast<double>(y_true.size());
}

double classification_error(const Vector& y_true, const Vector& y_pred) {
    check_pair(y_true, y_pred);
    Index wrong = 0;
    for (Index i = 0; i < y_true.size(); ++i) wrong += y_true[i] != y_pred[i];
    return static_cast<double>(wrong) / static_cast<double>(y_true.size());
}

double error_value(ErrorMetric metric, const Vector& y_true, const Vector& y_pred) {
    switch (metric) {
        case ErrorMetric::smape: return smape(y_true, y_pred);
        case ErrorMetric::mse: return mse(y_true, y_pred);
        case ErrorMetric::classification_error: return classification_error(y_true, y_pred);
    }
    return 0.0;
}

double group_imbalance(const Vector& per_group) {
    double sum = 0.0;
    for (Index g = 0; g < per_group.size(); ++g)
        for (Index h = g + 1; h < per_group.size(); ++h) sum += std::abs(per_group[g] - per_group[h]);
    return sum;
}

void EvalReport::check_consistency() const {
    const double expected = group_imbalance(per_group_error);
    require(std::abs(expected - bias) <= 1e-12 * std::max(1.0, std::abs(expected)) && bias >= 0.0,
            ErrorCode::numeric, "report bias is inconsistent with its per-group errors");
}

EvalReport group_bias_report(const Dataset& test, const Vector& predictions, ErrorMetric metric) {
    require(predictions.size() == test.size(), ErrorCode::shape, "prediction count differs from test size");
    test.require_all_groups();
    EvalReport r;
    r.overall_error = error_value(metric, test.y, predictions);
    r.per_group_error.resize(test.num_groups);
    for (const auto& part : partition_by_group(test)) {
        Vector pred(part.size());
        for (Index i = 0; i < part.size(); ++i) pred[i] = predictions[part.rows[static_cast<std::size_t>(i)]];
        r.per_group_error[part.group - 1] = error_value(metric, part.y, pred);
        r.counts.push_back(part.size());
    }
    r.bias = group_imbalance(r.per_group_error);
    r.check_consistency();
    return r;
}

std::vector<std::string> result_header(int num_groups, const std::vector<std::string>& extra_columns) {
    std::vector<std::string> h{"method", "covariance_kind", "alpha", "beta", "gamma", "m_pcs", "seed", "overall_error"};
    for (int g = 1; g <= num_groups; ++g) h.push_back("error_g" + std::to_string(g));
    h.push_back("bias");
    h.insert(h.end(), extra_columns.begin(), extra_columns.end());
    return h;
}

std::string result_csv(const std::vector<ResultRow>& rows, int num_groups, const std::vector<std::string>& extra_columns) {
    std::ostringstream out;
    out << csv::join(result_header(num_groups, extra_columns)) << '\n';
    for (const auto& row : rows) {
        row.report.check_consistency();
        require(row.report.per_group_error.size() == num_groups, ErrorCode::schema, "row has wrong group count");
        require(row.extra.size() == extra_columns.size(), ErrorCode::schema, "row has wrong extra column count");
        std::vector<std::string> f{row.method,
                                   row.covariance_kind,
                                   csv::format(row.alpha),
                                   csv::format(row.beta),
                                   csv::format(row.gamma),
                                   std::to_string(row.m_pcs),
                                   std::to_string(row.seed),
                                   csv::format(row.report.overall_error)};
        for (Index g = 0; g < row.report.per_group_error.size(); ++g) f.push_back(csv::format(row.report.per_group_error[g]));
        f.push_back(csv::format(row.report.bias));
        f.insert(f.end(), row.extra.begin(), row.extra.end());
        out << csv::join(f) << '\n';
    }
    return out.str();
}

void check_result_csv(const std::string& text, int num_groups) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::schema, "results CSV is empty");
    const auto header = csv::split_record(line, ',');
    const auto expected = result_header(num_groups);
    require(header.size() >= expected.size(), ErrorCode::schema, "results header is too short");
    for (std::size_t i = 0; i < expected.size(); ++i)
        require(header[i] == expected[i], ErrorCode::schema,
                "results column " + std::to_string(i + 1) + " is '" + header[i] + "', expected '" + expected[i] + "'");
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto fields = csv::split_record(line, ',');
        require(fields.size() == header.size(), ErrorCode::schema, "results row " + std::to_string(row) + " is ragged");
        Vector per_group(num_groups);
        for (int g = 0; g < num_groups; ++g) per_group[g] = std::stod(fields[8 + static_cast<std::size_t>(g)]);
        const double bias = std::stod(fields[8 + static_cast<std::size_t>(num_groups)]);
        require(std::abs(group_imbalance(per_group) - bias) <= 1e-9 * std::max(1.0, bias), ErrorCode::schema,
                "results row " + std::to_string(row) + " bias does not match its group errors");
    }
}

}  // namespace fvnn
