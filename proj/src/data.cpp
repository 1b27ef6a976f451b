#include "fvnn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "fvnn/csv.hpp"
#include "fvnn/error.hpp"
#include "fvnn/rng.hpp"

namespace fvnn {

int Dataset::num_classes() const {
    if (task != Task::classification || y.size() == 0) return 0;
    return static_cast<int>(y.maxCoeff()) + 1;
}

std::vector<Index> Dataset::group_sizes() const {
    std::vector<Index> sizes(static_cast<std::size_t>(std::max(num_groups, 0)), 0);
    for (int g : z)
        if (g >= 1 && g <= num_groups) ++sizes[g - 1];
    return sizes;
}

void Dataset::validate() const {
    require(y.size() == X.rows(), ErrorCode::shape,
            "target length " + std::to_string(y.size()) + " != rows " + std::to_string(X.rows()));
    require(static_cast<Index>(z.size()) == X.rows(), ErrorCode::shape,
            "group label length " + std::to_string(z.size()) + " != rows " + std::to_string(X.rows()));
    require(num_groups >= 1, ErrorCode::group, "dataset declares no groups");
    for (std::size_t i = 0; i < z.size(); ++i)
        require(z[i] >= 1 && z[i] <= num_groups, ErrorCode::group,
                "row " + std::to_string(i) + " has group " + std::to_string(z[i]) + " outside 1.." +
                    std::to_string(num_groups));
    if (task == Task::classification)
        for (Index i = 0; i < y.size(); ++i)
            require(y[i] >= 0 && y[i] == std::floor(y[i]), ErrorCode::parameter,
                    "row " + std::to_string(i) + " has non-integer class label");
}

void Dataset::require_all_groups() const {
    validate();
    auto sizes = group_sizes();
    for (std::size_t g = 0; g < sizes.size(); ++g)
        require(sizes[g] > 0, ErrorCode::group, "group " + std::to_string(g + 1) + " has no samples");
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
    Dataset out;
    out.task = task;
    out.num_groups = num_groups;
    out.X.resize(static_cast<Index>(rows.size()), X.cols());
    out.y.resize(static_cast<Index>(rows.size()));
    out.z.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(static_cast<Index>(i)) = X.row(rows[i]);
        out.y[static_cast<Index>(i)] = y[rows[i]];
        out.z[i] = z[static_cast<std::size_t>(rows[i])];
    }
    return out;
}

GroupIndicator GroupIndicator::from_labels(const std::vector<int>& z, int num_groups) {
    GroupIndicator gi;
    gi.Z = Matrix::Zero(static_cast<Index>(z.size()), num_groups);
    gi.group_sizes.assign(static_cast<std::size_t>(num_groups), 0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        require(z[i] >= 1 && z[i] <= num_groups, ErrorCode::group, "group label outside 1..G");
        gi.Z(static_cast<Index>(i), z[i] - 1) = 1.0;
        ++gi.group_sizes[z[i] - 1];
    }
    return gi;
}

void SyntheticConfig::validate() const {
    require(N >= 5, ErrorCode::config, "synthetic N must be >= 5, got " + std::to_string(N));
    require(eigengap_ratio > 0 && eigengap_ratio <= 1, ErrorCode::config, "eigengap_ratio must lie in (0, 1]");
    require(T1 >= 1 && T2 >= 1, ErrorCode::config, "T1 and T2 must be >= 1");
    require(noise_std >= 0, ErrorCode::config, "noise_std must be >= 0");
}

Vector synthetic_spectrum(Index n, double compression) {
    Vector lambda(n);
    const double lo = std::log(0.5), hi = std::log(5.0);
    for (Index i = 0; i < n; ++i)
        lambda[i] = std::exp(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    if (compression != 1.0) {
        const double mean = lambda.mean();
        lambda = (mean + compression * (lambda.array() - mean)).matrix();
    }
    return lambda;
}

namespace {
Matrix sample_gaussian(Rng& rng, Index rows, const Matrix& Q, const Vector& lambda) {
    Matrix g = standard_normal(rng, rows, Q.rows());
    return g * lambda.cwiseSqrt().asDiagonal() * Q.transpose();
}
}  // namespace

SyntheticData generate_two_group_gaussian(const SyntheticConfig& cfg) {
    cfg.validate();
    Rng rot1(derive_seed(cfg.seed, {1})), rot2(derive_seed(cfg.seed, {2}));
    const Matrix Q1 = random_orthogonal(rot1, cfg.N);
    const Matrix Q2 = random_orthogonal(rot2, cfg.N);
    const Vector lambda2 = synthetic_spectrum(cfg.N, 1.0);
    const Vector lambda1 = synthetic_spectrum(cfg.N, cfg.eigengap_ratio);

    SyntheticData out;
    out.C1 = Q1 * lambda1.asDiagonal() * Q1.transpose();
    out.C2 = Q2 * lambda2.asDiagonal() * Q2.transpose();
    out.C1 = 0.5 * (out.C1 + out.C1.transpose()).eval();
    out.C2 = 0.5 * (out.C2 + out.C2.transpose()).eval();
    require(lambda1.minCoeff() > 0 && lambda2.minCoeff() > 0, ErrorCode::numeric,
            "synthetic covariance is not positive definite");

    Rng s1(derive_seed(cfg.seed, {3})), s2(derive_seed(cfg.seed, {4}));
    Dataset& ds = out.data;
    ds.task = Task::regression;
    ds.num_groups = 2;
    ds.X.resize(cfg.T1 + cfg.T2, cfg.N);
    ds.X.topRows(cfg.T1) = sample_gaussian(s1, cfg.T1, Q1, lambda1);
    ds.X.bottomRows(cfg.T2) = sample_gaussian(s2, cfg.T2, Q2, lambda2);
    ds.z.assign(static_cast<std::size_t>(cfg.T1), 1);
    ds.z.insert(ds.z.end(), static_cast<std::size_t>(cfg.T2), 2);
    ds.y = friedman_target(ds.X, cfg.noise_std, derive_seed(cfg.seed, {5}));
    return out;
}

Vector friedman_unit(const Matrix& U) {
    require(U.cols() >= 5, ErrorCode::dimension,
            "Friedman target needs at least 5 features, got " + std::to_string(U.cols()));
    Vector y(U.rows());
    for (Index i = 0; i < U.rows(); ++i) {
        const double u3 = U(i, 2) - 0.5;
        y[i] = 10.0 * std::sin(M_PI * U(i, 0) * U(i, 1)) + 20.0 * u3 * u3 + 10.0 * U(i, 3) + 5.0 * U(i, 4);
    }
    return y;
}

Vector friedman_target(const Matrix& X, double noise_std, std::uint64_t seed) {
    require(X.cols() >= 5, ErrorCode::dimension,
            "Friedman target needs at least 5 features, got " + std::to_string(X.cols()));
    Matrix U(X.rows(), X.cols());
    for (Index j = 0; j < X.cols(); ++j) {
        const double lo = X.col(j).minCoeff(), hi = X.col(j).maxCoeff();
        if (hi > lo)
            U.col(j) = ((X.col(j).array() - lo) / (hi - lo)).matrix();
        else
            U.col(j).setZero();
    }
    Vector y = friedman_unit(U);
    if (noise_std > 0) {
        Rng rng(seed);
        std::normal_distribution<double> noise(0.0, noise_std);
        for (Index i = 0; i < y.size(); ++i) y[i] += noise(rng);
    }
    return y;
}

std::string LoadSummary::describe() const {
    std::ostringstream out;
    out << "T=" << T << " N=" << N << " G=" << G << " dropped=" << rows_dropped << " group_sizes=";
    for (std::size_t g = 0; g < group_sizes.size(); ++g) out << (g ? "/" : "") << group_sizes[g];
    return out.str();
}

namespace {
bool parse_double(const std::string& text, double& value) {
    auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos) return false;
    auto last = text.find_last_not_of(" \t");
    const char* b = text.data() + first;
    const char* e = text.data() + last + 1;
    if (*b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, value);
    return ec == std::errc() && p == e && std::isfinite(value);
}

std::string trim(const std::string& s) {
    auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}
}  // namespace

Dataset load_csv_dataset(const std::filesystem::path& path, const CsvSchema& schema, LoadSummary* summary) {
    if (!std::filesystem::exists(path)) fail(ErrorCode::io, "dataset file '" + path.string() + "' not found");
    const csv::Table table = csv::read(path, schema.delimiter, schema.columns);
    require(!schema.target.empty(), ErrorCode::schema, "schema has no target column");
    require(!schema.sensitive.empty(), ErrorCode::schema, "schema has no sensitive column");

    const std::size_t target_col = table.column(schema.target);
    const std::size_t sensitive_col = table.column(schema.sensitive);
    std::vector<std::size_t> numeric_cols, categorical_cols;
    for (const auto& name : schema.numeric) numeric_cols.push_back(table.column(name));
    for (const auto& name : schema.categorical) categorical_cols.push_back(table.column(name));

    const std::set<std::string> missing(schema.missing_tokens.begin(), schema.missing_tokens.end());
    auto is_missing = [&](const std::string& field) { return missing.count(trim(field)) > 0; };

    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        bool drop = is_missing(row[target_col]) || is_missing(row[sensitive_col]);
        for (auto c : numeric_cols) drop = drop || is_missing(row[c]);
        for (auto c : categorical_cols) drop = drop || is_missing(row[c]);
        if (!drop) kept.push_back(r);
    }
    require(!kept.empty(), ErrorCode::empty_data, "no complete rows in '" + path.string() + "'");

    // Group assignment.
    std::map<std::string, int> group_of = schema.group_map;
    if (group_of.empty()) {
        std::set<std::string> values;
        for (auto r : kept) values.insert(trim(table.rows[r][sensitive_col]));
        int next = 1;
        for (const auto& v : values) group_of[v] = next++;
    }
    int num_groups = 0;
    for (const auto& [k, g] : group_of) num_groups = std::max(num_groups, g);
    if (schema.group_default) num_groups = std::max(num_groups, *schema.group_default);

    // Category levels, sorted for determinism.
    std::vector<std::vector<std::string>> levels;
    for (auto c : categorical_cols) {
        std::set<std::string> values;
        for (auto r : kept) values.insert(trim(table.rows[r][c]));
        levels.emplace_back(values.begin(), values.end());
    }

    std::vector<std::string> names(schema.numeric.begin(), schema.numeric.end());
    for (std::size_t i = 0; i < categorical_cols.size(); ++i)
        for (std::size_t l = schema.one_hot_drop_first ? 1 : 0; l < levels[i].size(); ++l)
            names.push_back(schema.categorical[i] + "=" + levels[i][l]);
    if (schema.sensitive_as_feature)
        for (int g = 2; g <= num_groups; ++g) names.push_back(schema.sensitive + "=group" + std::to_string(g));

    Dataset ds;
    ds.task = schema.task;
    ds.num_groups = num_groups;
    ds.X = Matrix::Zero(static_cast<Index>(kept.size()), static_cast<Index>(names.size()));
    ds.y.resize(static_cast<Index>(kept.size()));
    ds.z.resize(kept.size());

    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto& row = table.rows[kept[i]];
        const Index ii = static_cast<Index>(i);
        const std::string where = " at data row " + std::to_string(kept[i] + 1);
        Index col = 0;
        for (std::size_t k = 0; k < numeric_cols.size(); ++k) {
            double v;
            if (!parse_double(row[numeric_cols[k]], v))
                fail(ErrorCode::parse, "non-numeric value '" + row[numeric_cols[k]] + "' in column '" +
                                           schema.numeric[k] + "'" + where);
            ds.X(ii, col++) = v;
        }
        for (std::size_t k = 0; k < categorical_cols.size(); ++k) {
            const std::string value = trim(row[categorical_cols[k]]);
            const auto pos = static_cast<std::size_t>(
                std::lower_bound(levels[k].begin(), levels[k].end(), value) - levels[k].begin());
            const std::size_t first = schema.one_hot_drop_first ? 1 : 0;
            if (pos >= first) ds.X(ii, col + static_cast<Index>(pos - first)) = 1.0;
            col += static_cast<Index>(levels[k].size() - first);
        }

        const std::string sval = trim(row[sensitive_col]);
        auto it = group_of.find(sval);
        int g = 0;
        if (it != group_of.end())
            g = it->second;
        else if (schema.group_default)
            g = *schema.group_default;
        else
            fail(ErrorCode::schema, "sensitive value '" + sval + "' has no group mapping" + where);
        ds.z[i] = g;
        if (schema.sensitive_as_feature && g >= 2) ds.X(ii, col + g - 2) = 1.0;

        const std::string tval = trim(row[target_col]);
        if (schema.task == Task::classification && !schema.label_map.empty()) {
            auto lt = schema.label_map.find(tval);
            if (lt == schema.label_map.end())
                fail(ErrorCode::parse, "target value '" + tval + "' has no label mapping" + where);
            ds.y[ii] = lt->second;
        } else {
            double v;
            if (!parse_double(tval, v))
                fail(ErrorCode::parse, "non-numeric target '" + tval + "'" + where);
            ds.y[ii] = v;
        }
    }
    ds.validate();

    if (summary) {
        summary->rows_read = static_cast<Index>(table.rows.size());
        summary->rows_dropped = static_cast<Index>(table.rows.size() - kept.size());
        summary->T = ds.size();
        summary->N = ds.dim();
        summary->G = ds.num_groups;
        summary->group_sizes = ds.group_sizes();
        summary->feature_names = names;
    }
    return ds;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
    std::ostringstream out;
    for (Index j = 0; j < ds.dim(); ++j) out << "x_" << (j + 1) << ',';
    out << "y,z\n";
    for (Index i = 0; i < ds.size(); ++i) {
        for (Index j = 0; j < ds.dim(); ++j) out << csv::format(ds.X(i, j)) << ',';
        out << csv::format(ds.y[i]) << ',' << ds.z[static_cast<std::size_t>(i)] << '\n';
    }
    csv::write_text(path, out.str());
}

StandardScaler StandardScaler::fit(const Matrix& X) {
    require(X.rows() > 0, ErrorCode::empty_data, "cannot fit a scaler on an empty matrix");
    StandardScaler s;
    s.mean = X.colwise().mean().transpose();
    s.scale = Vector::Ones(X.cols());
    if (X.rows() > 1) {
        for (Index j = 0; j < X.cols(); ++j) {
            const double sd = std::sqrt((X.col(j).array() - s.mean[j]).square().sum() /
                                        static_cast<double>(X.rows() - 1));
            if (sd > 1e-12 * std::max(1.0, std::abs(s.mean[j]))) s.scale[j] = sd;
        }
    }
    return s;
}

Matrix StandardScaler::transform(const Matrix& X) const {
    require(X.cols() == mean.size(), ErrorCode::shape, "scaler dimension mismatch");
    return ((X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

Matrix StandardScaler::inverse_transform(const Matrix& X) const {
    require(X.cols() == mean.size(), ErrorCode::shape, "scaler dimension mismatch");
    return ((X.array().rowwise() * scale.transpose().array()).matrix().rowwise() + mean.transpose());
}

Standardized standardize(const Dataset& train, const std::vector<Dataset>& others) {
    require(train.size() > 0, ErrorCode::empty_data, "cannot standardize an empty training set");
    Standardized out;
    out.scaler = StandardScaler::fit(train.X);
    out.train = train;
    out.train.X = out.scaler.transform(train.X);
    for (const auto& ds : others) {
        Dataset t = ds;
        t.X = out.scaler.transform(ds.X);
        out.others.push_back(std::move(t));
    }
    return out;
}

SplitResult split(const Dataset& ds, double test_fraction, std::uint64_t seed, bool stratify_by_group) {
    require(test_fraction > 0 && test_fraction < 1, ErrorCode::parameter, "test_fraction must lie in (0, 1)");
    ds.validate();
    Rng rng(seed);
    std::vector<Index> train_rows, test_rows;
    auto take = [&](std::vector<Index> idx) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
        test_rows.insert(test_rows.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_rows.insert(train_rows.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    };
    if (stratify_by_group) {
        for (const auto& part : partition_by_group(ds)) {
            if (part.size() == 0) continue;
            require(part.size() >= 2, ErrorCode::stratification,
                    "group " + std::to_string(part.group) + " has fewer than 2 samples");
            take(part.rows);
        }
    } else {
        std::vector<Index> all(static_cast<std::size_t>(ds.size()));
        std::iota(all.begin(), all.end(), Index{0});
        take(std::move(all));
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    SplitResult out;
    out.train = ds.subset(train_rows);
    out.test = ds.subset(test_rows);
    out.train_rows = std::move(train_rows);
    out.test_rows = std::move(test_rows);
    return out;
}

std::vector<GroupPart> partition_by_group(const Dataset& ds) {
    ds.validate();
    std::vector<GroupPart> parts(static_cast<std::size_t>(ds.num_groups));
    for (int g = 1; g <= ds.num_groups; ++g) parts[g - 1].group = g;
    for (std::size_t i = 0; i < ds.z.size(); ++i) parts[ds.z[i] - 1].rows.push_back(static_cast<Index>(i));
    for (auto& part : parts) {
        part.X.resize(static_cast<Index>(part.rows.size()), ds.dim());
        part.y.resize(static_cast<Index>(part.rows.size()));
        for (std::size_t i = 0; i < part.rows.size(); ++i) {
            part.X.row(static_cast<Index>(i)) = ds.X.row(part.rows[i]);
            part.y[static_cast<Index>(i)] = ds.y[part.rows[i]];
        }
    }
    return parts;
}

}  // namespace fvnn
