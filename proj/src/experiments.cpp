#include "fvnn/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fvnn/baselines.hpp"
#include "fvnn/csv.hpp"
#include "fvnn/error.hpp"
#include "fvnn/parallel.hpp"
#include "fvnn/rng.hpp"

namespace fvnn {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

std::string method_name(DownstreamKind k) { return k == DownstreamKind::linear ? "lin_pca" : "rbf_pca"; }

ResultRow make_row(const std::string& method, const CovarianceRecipe& r, double gamma, Index m, std::uint64_t seed) {
    ResultRow row;
    row.method = method;
    row.covariance_kind = std::string(to_string(r.kind));
    row.alpha = r.kind == CovarianceKind::balanced ? r.alpha : nan_value;
    row.beta = r.kind == CovarianceKind::debiased ? r.beta : nan_value;
    row.gamma = gamma;
    row.m_pcs = m;
    row.seed = seed;
    return row;
}

Vector to_original_scale(const Vector& pred, const TrialData& td) {
    if (td.train.task == Task::classification) return pred;
    return (pred.array() * td.target_scale + td.target_mean).matrix();
}

VnnModel train_fvnn(const ExperimentConfig& cfg, const TrialData& td, const Matrix& C, double gamma) {
    const Task task = td.train.task;
    const Architecture arch = cfg.model.architecture(task, task == Task::classification ? td.train.num_classes() : 0);
    VnnModel model = init_model(arch, derive_seed(td.seed, {101}));
    TrainConfig tc = cfg.training.train;
    tc.gamma = gamma;
    tc.seed = td.seed;
    tc.loss = task == Task::classification ? LossKind::cross_entropy : LossKind::mse;
    return train(std::move(model), td.train, C, tc).model;
}

DownstreamConfig downstream_config(const ExperimentConfig& cfg, DownstreamKind kind, std::uint64_t seed) {
    DownstreamConfig d;
    d.kind = kind;
    d.ridge = cfg.baselines.ridge;
    d.bandwidth = cfg.baselines.bandwidth;
    d.max_support = cfg.baselines.max_support;
    d.seed = derive_seed(seed, {202});
    return d;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? nan_value : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Rows grouped by arm, in first-seen order.
struct ArmSeries {
    ResultRow key;
    std::vector<std::vector<const ResultRow*>> by_trial;
};

std::vector<ArmSeries> group_arms(const std::vector<ResultRow>& rows, std::size_t trial_column) {
    std::vector<ArmSeries> arms;
    std::map<std::string, std::size_t> index;
    for (const auto& r : rows) {
        const std::string key = csv::join({r.method, r.covariance_kind, csv::format(r.alpha), csv::format(r.beta),
                                           csv::format(r.gamma), std::to_string(r.m_pcs)});
        auto [it, inserted] = index.emplace(key, arms.size());
        if (inserted) arms.push_back({r, {}});
        auto& series = arms[it->second];
        const auto trial = static_cast<std::size_t>(std::stoul(r.extra[trial_column]));
        if (series.by_trial.size() <= trial) series.by_trial.resize(trial + 1);
        series.by_trial[trial].push_back(&r);
    }
    return arms;
}

std::vector<std::string> arm_fields(const ResultRow& r) {
    return {r.method, r.covariance_kind, csv::format(r.alpha), csv::format(r.beta), csv::format(r.gamma),
            std::to_string(r.m_pcs)};
}

std::string grid_summary(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "method,covariance_kind,alpha,beta,gamma,m_pcs,trials,error_mean,error_std,bias_mean,bias_std\n";
    for (const auto& arm : group_arms(rows, 0)) {
        std::vector<double> err, bias;
        for (const auto& t : arm.by_trial)
            for (const ResultRow* r : t) {
                err.push_back(r->report.overall_error);
                bias.push_back(r->report.bias);
            }
        auto f = arm_fields(arm.key);
        f.insert(f.end(), {std::to_string(err.size()), csv::format(mean_of(err)), csv::format(std_of(err)),
                           csv::format(mean_of(bias)), csv::format(std_of(bias))});
        out << csv::join(f) << '\n';
    }
    return out.str();
}

std::string sweep_summary(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "method,covariance_kind,alpha,beta,gamma,m_pcs,trials,tv_error_mean,tv_error_std,tv_bias_mean,"
           "tv_bias_std,error_mean,bias_mean\n";
    for (const auto& arm : group_arms(rows, 0)) {
        std::vector<double> tv_err, tv_bias, err, bias;
        for (const auto& t : arm.by_trial) {
            std::vector<double> e, b;
            for (const ResultRow* r : t) {
                e.push_back(r->report.overall_error);
                b.push_back(r->report.bias);
            }
            tv_err.push_back(total_variation(e));
            tv_bias.push_back(total_variation(b));
            err.insert(err.end(), e.begin(), e.end());
            bias.insert(bias.end(), b.begin(), b.end());
        }
        auto f = arm_fields(arm.key);
        f.insert(f.end(), {std::to_string(tv_err.size()), csv::format(mean_of(tv_err)), csv::format(std_of(tv_err)),
                           csv::format(mean_of(tv_bias)), csv::format(std_of(tv_bias)), csv::format(mean_of(err)),
                           csv::format(mean_of(bias))});
        out << csv::join(f) << '\n';
    }
    return out.str();
}

std::vector<TrialData> prepare_trials(const ExperimentConfig& cfg) {
    std::vector<TrialData> trials;
    Dataset shared;
    if (cfg.dataset.source == "csv") shared = experiment_dataset(cfg, 0);
    for (int t = 0; t < cfg.trials; ++t) {
        if (cfg.dataset.source == "csv")
            trials.push_back(make_trial(cfg, shared, t));
        else
            trials.push_back(make_trial(cfg, experiment_dataset(cfg, t), t));
    }
    return trials;
}

void require_valid(const ExperimentConfig& cfg) {
    const auto errors = check_config(cfg);
    if (errors.empty()) return;
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
    fail(ErrorCode::config, msg);
}

using Job = std::function<std::vector<ResultRow>()>;

std::vector<ResultRow> run_jobs(const std::vector<Job>& jobs, int threads) {
    std::vector<std::vector<ResultRow>> slots(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t i) { slots[i] = jobs[i](); });
    std::vector<ResultRow> rows;
    for (auto& s : slots) rows.insert(rows.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    return rows;
}

ExperimentOutput run_grid(const ExperimentConfig& cfg, int jobs, const std::string& trial_label) {
    require_valid(cfg);
    const auto trials = prepare_trials(cfg);
    const auto recipes = cfg.covariance.recipes();
    const ErrorMetric metric = cfg.dataset.error_metric;

    std::vector<Job> work;
    for (int t = 0; t < cfg.trials; ++t) {
        const TrialData& td = trials[static_cast<std::size_t>(t)];
        const std::vector<std::string> extra{std::to_string(t)};
        for (const auto& recipe : recipes) {
            if (cfg.has_method("fvnn"))
                for (double gamma : cfg.training.gammas)
                    work.push_back([&, &td = td, recipe, gamma, extra] {
                        const CovarianceEstimate C = estimate_covariance(td.train, recipe);
                        const VnnModel model = train_fvnn(cfg, td, C.C, gamma);
                        const Vector pred = to_original_scale(predict(model, C.C, td.test.X), td);
                        ResultRow row = make_row("fvnn", recipe, gamma, 0, td.seed);
                        row.report = group_bias_report(td.test, pred, metric);
                        row.extra = extra;
                        return std::vector<ResultRow>{row};
                    });
            if (cfg.has_method("pca"))
                work.push_back([&, &td = td, recipe, extra] {
                    const CovarianceEstimate C = estimate_covariance(td.train, recipe);
                    std::vector<ResultRow> rows;
                    for (auto kind : cfg.baselines.kinds)
                        for (Index m : cfg.baselines.m) {
                            const PcaProjector p = fit_pca(C, std::min(m, td.train.dim()));
                            const Vector pred = to_original_scale(
                                fit_predict_downstream(p.project(td.train.X), td.train.y, p.project(td.test.X),
                                                       downstream_config(cfg, kind, td.seed), td.train.task,
                                                       td.train.num_classes()),
                                td);
                            ResultRow row = make_row(method_name(kind), recipe, nan_value, m, td.seed);
                            row.report = group_bias_report(td.test, pred, metric);
                            row.extra = extra;
                            rows.push_back(row);
                        }
                    return rows;
                });
        }
    }

    ExperimentOutput out;
    out.rows = run_jobs(work, jobs);
    out.extra_columns = {trial_label};
    out.num_groups = trials.front().test.num_groups;
    out.files.push_back({"results.csv", result_csv(out.rows, out.num_groups, out.extra_columns), out.num_groups});
    out.files.push_back({"summary.csv", grid_summary(out.rows)});
    return out;
}

Matrix gaussian_rows(Rng& rng, Index T, const Matrix& L) { return standard_normal(rng, T, L.rows()) * L.transpose(); }

}  // namespace

Dataset experiment_dataset(const ExperimentConfig& cfg, int trial, LoadSummary* summary) {
    if (cfg.dataset.source == "csv") return load_csv_dataset(cfg.dataset_path(), cfg.dataset.schema, summary);
    SyntheticConfig sc = cfg.dataset.synthetic;
    sc.seed = cfg.trial_seed(trial);
    Dataset ds = generate_two_group_gaussian(sc).data;
    if (cfg.dataset.synthetic_classification) {
        std::vector<double> sorted(ds.y.data(), ds.y.data() + ds.y.size());
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
        ds.y = (ds.y.array() > median).cast<double>();
        ds.task = Task::classification;
    }
    return ds;
}

TrialData make_trial(const ExperimentConfig& cfg, const Dataset& full, int trial) {
    full.validate();
    TrialData td;
    td.seed = cfg.trial_seed(trial);
    Dataset train, test;
    if (cfg.dataset.split == "per_group") {
        std::vector<Index> train_rows, test_rows;
        std::vector<Index> seen(static_cast<std::size_t>(full.num_groups), 0);
        for (std::size_t i = 0; i < full.z.size(); ++i) {
            auto& count = seen[static_cast<std::size_t>(full.z[i] - 1)];
            (count++ < cfg.dataset.train_per_group ? train_rows : test_rows).push_back(static_cast<Index>(i));
        }
        for (int g = 0; g < full.num_groups; ++g)
            require(seen[static_cast<std::size_t>(g)] > cfg.dataset.train_per_group, ErrorCode::group,
                    "group " + std::to_string(g + 1) + " has no rows left for testing");
        train = full.subset(train_rows);
        test = full.subset(test_rows);
    } else {
        SplitResult s = split(full, cfg.dataset.test_fraction, derive_seed(td.seed, {303}), cfg.dataset.stratify);
        train = std::move(s.train);
        test = std::move(s.test);
    }
    Standardized st = standardize(train, {test});
    td.train = std::move(st.train);
    td.test = std::move(st.others.front());
    if (td.train.task == Task::regression && cfg.dataset.standardize_target) {
        const Index n = td.train.y.size();
        td.target_mean = td.train.y.mean();
        const double var = n > 1 ? (td.train.y.array() - td.target_mean).square().sum() / static_cast<double>(n - 1) : 0.0;
        td.target_scale = var > 0 ? std::sqrt(var) : 1.0;
        td.train.y = ((td.train.y.array() - td.target_mean) / td.target_scale).matrix();
    }
    return td;
}

double total_variation(const std::vector<double>& curve) {
    double tv = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) tv += std::abs(curve[i] - curve[i - 1]);
    return tv;
}

ExperimentOutput run_synth_sweep(const ExperimentConfig& cfg, int jobs) {
    require_valid(cfg);
    const auto trials = prepare_trials(cfg);
    const auto recipes = cfg.covariance.recipes();
    const auto t1_grid = cfg.sweep.t1_values();
    const ErrorMetric metric = cfg.dataset.error_metric;
    const double gamma = cfg.training.gammas.front();

    std::vector<Job> work;
    for (int t = 0; t < cfg.trials; ++t) {
        const TrialData& td = trials[static_cast<std::size_t>(t)];
        for (const auto& recipe : recipes) {
            work.push_back([&, &td = td, t, recipe] {
                const CovarianceEstimate C = estimate_covariance(td.train, recipe);
                std::optional<VnnModel> model;
                if (cfg.has_method("fvnn")) model = train_fvnn(cfg, td, C.C, gamma);

                struct Frozen {
                    DownstreamKind kind;
                    Index m;
                    DownstreamPredictor predictor;
                };
                std::vector<Frozen> frozen;
                if (cfg.has_method("pca"))
                    for (auto kind : cfg.baselines.kinds)
                        for (Index m : cfg.baselines.m) {
                            DownstreamPredictor p(downstream_config(cfg, kind, td.seed));
                            p.fit(fit_pca(C, m).project(td.train.X), td.train.y, td.train.task,
                                  td.train.num_classes());
                            frozen.push_back({kind, m, std::move(p)});
                        }

                std::vector<Index> g1, rest;
                for (std::size_t i = 0; i < td.test.z.size(); ++i)
                    (td.test.z[i] == 1 ? g1 : rest).push_back(static_cast<Index>(i));

                std::vector<ResultRow> rows;
                for (Index t1 : t1_grid) {
                    std::vector<Index> sub(g1.begin(), g1.begin() + t1);
                    sub.insert(sub.end(), rest.begin(), rest.end());
                    std::sort(sub.begin(), sub.end());
                    const CovarianceEstimate Ct = estimate_covariance(td.test.subset(sub), recipe);
                    const std::vector<std::string> extra{std::to_string(t), std::to_string(t1)};
                    if (model) {
                        ResultRow row = make_row("fvnn", recipe, gamma, 0, td.seed);
                        row.report =
                            group_bias_report(td.test, to_original_scale(predict(*model, Ct.C, td.test.X), td), metric);
                        row.extra = extra;
                        rows.push_back(row);
                    }
                    for (const auto& f : frozen) {
                        const Vector pred = to_original_scale(f.predictor.predict(fit_pca(Ct, f.m).project(td.test.X)), td);
                        ResultRow row = make_row(method_name(f.kind), recipe, nan_value, f.m, td.seed);
                        row.report = group_bias_report(td.test, pred, metric);
                        row.extra = extra;
                        rows.push_back(row);
                    }
                }
                return rows;
            });
        }
    }

    ExperimentOutput out;
    out.rows = run_jobs(work, jobs);
    out.extra_columns = {"trial", "t1"};
    out.num_groups = trials.front().test.num_groups;
    out.files.push_back({"results.csv", result_csv(out.rows, out.num_groups, out.extra_columns), out.num_groups});
    out.files.push_back({"summary.csv", sweep_summary(out.rows)});
    return out;
}

ExperimentOutput run_gamma_sweep(const ExperimentConfig& cfg, int jobs) { return run_grid(cfg, jobs, "trial"); }

ExperimentOutput run_classification(const ExperimentConfig& cfg, int jobs) { return run_grid(cfg, jobs, "split"); }

StabilityCase make_stability_case(const ExperimentConfig& cfg, const std::string& name) {
    SyntheticConfig sc = cfg.dataset.synthetic;
    sc.seed = cfg.seed;
    sc.T1 = sc.T2 = 1;
    const SyntheticData truth = generate_two_group_gaussian(sc);
    const int h = cfg.covariance.disadvantaged_group;
    const Matrix& Ch = h == 1 ? truth.C1 : truth.C2;
    const Matrix& Cg = h == 1 ? truth.C2 : truth.C1;
    const double alpha = cfg.stability.alpha, beta = cfg.stability.beta;

    StabilityCase out;
    out.name = name;
    if (name == "balanced") {
        const BalanceWeights w = balance_weights(1, 1, alpha);
        out.C_true = w.g * Cg + w.h * Ch;
        const Matrix Lg = Cg.llt().matrixL(), Lh = Ch.llt().matrixL();
        out.sampler = [Lg, Lh, alpha](Rng& rng, Index T) {
            const Index half = T / 2;
            const Matrix Xg = gaussian_rows(rng, half, Lg);
            const Matrix Xh = gaussian_rows(rng, half, Lh);
            return balanced_covariance(sample_covariance(Xg).estimate, sample_covariance(Xh).estimate, half, half,
                                       alpha)
                .C;
        };
    } else if (name == "debiased") {
        out.C_true = 0.5 * (truth.C1 + truth.C2);
        const Matrix L = out.C_true.llt().matrixL();
        out.sampler = [L, beta](Rng& rng, Index T) {
            Matrix X = gaussian_rows(rng, T, L);
            const Index half = T / 2;
            std::vector<int> z(static_cast<std::size_t>(T), 2);
            std::fill(z.begin(), z.begin() + half, 1);
            // X <- (I + beta Z Z^T)^{1/2} X, block by block.
            for (auto [start, len] : {std::pair<Index, Index>{0, half}, {half, T - half}}) {
                const double c = (std::sqrt(1.0 + beta * static_cast<double>(len)) - 1.0) / static_cast<double>(len);
                const Eigen::RowVectorXd sum = X.middleRows(start, len).colwise().sum();
                X.middleRows(start, len).rowwise() += c * sum;
            }
            return debiased_covariance(X, GroupIndicator::from_labels(z, 2), beta).C;
        };
    } else {
        fail(ErrorCode::config, "unknown stability case '" + name + "'");
    }
    return out;
}

ExperimentOutput run_stability(const ExperimentConfig& cfg, int jobs, std::vector<StabilityResult>* results) {
    require_valid(cfg);
    const auto& st = cfg.stability;
    std::vector<StabilityResult> all;
    std::ostringstream summary, slopes;
    summary << "case,filter,T,mean_distance,mean_error_norm,mean_bound\n";
    slopes << "case,filter,coefficients,lipschitz,slope,violations\n";
    ExperimentOutput out;
    for (std::size_t c = 0; c < st.cases.size(); ++c) {
        const StabilityCase sc = make_stability_case(cfg, st.cases[c]);
        for (std::size_t f = 0; f < st.filters.size(); ++f) {
            StabilityResult r;
            r.case_name = sc.name;
            r.filter_index = f;
            r.filter = FilterCoefficients(Eigen::Map<const Vector>(st.filters[f].data(),
                                                                   static_cast<Index>(st.filters[f].size())));
            r.sweep = stability_sweep(r.filter, sc.C_true, sc.sampler, st.t_grid, st.trials,
                                      derive_seed(cfg.seed, {c, f}), jobs);
            std::ostringstream rows;
            rows << "T,trial,filter_distance,error_norm,bound,slack\n";
            for (const auto& row : r.sweep.rows) {
                rows << csv::join({std::to_string(row.T), std::to_string(row.trial), csv::format(row.filter_distance),
                                   csv::format(row.error_norm), csv::format(row.bound), csv::format(row.slack)})
                     << '\n';
                r.violations += row.filter_distance > row.bound + row.slack;
            }
            out.files.push_back({"stability_" + sc.name + "_filter" + std::to_string(f) + ".csv", rows.str()});
            for (const auto& s : r.sweep.summary)
                summary << csv::join({sc.name, std::to_string(f), std::to_string(s.T), csv::format(s.mean_distance),
                                      csv::format(s.mean_error_norm), csv::format(s.mean_bound)})
                        << '\n';
            std::vector<std::string> coef;
            for (double h : st.filters[f]) coef.push_back(csv::format(h));
            slopes << csv::join({sc.name, std::to_string(f), csv::join(coef, ';'), csv::format(r.sweep.lipschitz),
                                 csv::format(r.sweep.slope), std::to_string(r.violations)})
                   << '\n';
            all.push_back(std::move(r));
        }
    }
    out.files.push_back({"stability_summary.csv", summary.str()});
    out.files.push_back({"stability_slopes.csv", slopes.str()});
    if (results) *results = std::move(all);
    return out;
}

ExperimentOutput run_gradcheck(const ExperimentConfig& cfg, int jobs, double tolerance) {
    require(cfg.trials >= 1, ErrorCode::config, "'trials' must be at least 1");
    const int n = cfg.trials;
    std::vector<std::string> lines(static_cast<std::size_t>(n));
    std::vector<char> passed(static_cast<std::size_t>(n), 0);
    parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
        const std::uint64_t seed = cfg.trial_seed(static_cast<int>(i));
        Rng rng(seed);
        auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
        const Index N = pick(3, 8);
        const int L = pick(1, 2), K = pick(1, 3);
        const Index F = pick(1, 3);
        const double gamma = std::array<double, 3>{0.0, 0.5, 1.0}[i % 3];
        const bool classify = i % 4 == 3;

        Dataset ds;
        ds.X = standard_normal(rng, 24, N);
        ds.num_groups = 2;
        ds.task = classify ? Task::classification : Task::regression;
        ds.y.resize(24);
        for (Index r = 0; r < 24; ++r) {
            ds.z.push_back(static_cast<int>(r % 2) + 1);
            ds.y[r] = classify ? static_cast<double>(r % 3) : std::normal_distribution<double>()(rng);
        }
        Architecture arch;
        Index in = 1;
        for (int l = 0; l < L; ++l) {
            arch.layers.push_back({in, F, K});
            in = F;
        }
        arch.activation = cfg.model.activation;
        arch.activate_last = cfg.model.activate_last;
        arch.task = ds.task;
        arch.out_dim = classify ? 3 : 1;
        const VnnModel model = init_model(arch, derive_seed(seed, {1}));
        TrainConfig tc;
        tc.gamma = gamma;
        tc.loss = classify ? LossKind::cross_entropy : LossKind::mse;
        const Matrix C = sample_covariance(ds.X).estimate.C;
        const GradientCheckReport rep = gradient_check(model, ds, C, tc, tolerance);
        passed[i] = rep.passed;
        lines[i] = csv::join({std::to_string(i), std::to_string(seed), std::to_string(N), std::to_string(L),
                              std::to_string(K), std::to_string(F), csv::format(gamma),
                              std::string(to_string(arch.activation)), classify ? "classification" : "regression",
                              std::to_string(rep.parameter_count), csv::format(rep.max_relative_error),
                              std::to_string(rep.worst_parameter), rep.passed ? "1" : "0"});
    });
    std::ostringstream text;
    text << "instance,seed,N,layers,order,features,gamma,activation,task,parameters,max_relative_error,"
            "worst_parameter,passed\n";
    for (const auto& l : lines) text << l << '\n';
    ExperimentOutput out;
    out.files.push_back({"gradcheck.csv", text.str()});
    const auto failures = std::count(passed.begin(), passed.end(), 0);
    out.ok = failures == 0;
    if (!out.ok) out.message = std::to_string(failures) + " of " + std::to_string(n) + " gradient checks failed";
    return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg, int jobs) {
    switch (cfg.experiment) {
        case ExperimentKind::synth_sweep: return run_synth_sweep(cfg, jobs);
        case ExperimentKind::gamma_sweep: return run_gamma_sweep(cfg, jobs);
        case ExperimentKind::classification: return run_classification(cfg, jobs);
        case ExperimentKind::stability: return run_stability(cfg, jobs);
    }
    fail(ErrorCode::config, "unknown experiment");
}

void write_outputs(const std::filesystem::path& dir, const ExperimentOutput& out, const ExperimentConfig& cfg,
                   double wall_seconds) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& f : out.files) {
        if (f.result_groups > 0) check_result_csv(f.content, f.result_groups);
        csv::write_text(dir / f.name, f.content);
        files.push_back(f.name);
    }
    nlohmann::ordered_json manifest;
    manifest["experiment"] = std::string(to_string(cfg.experiment));
    manifest["name"] = cfg.name;
    manifest["config_hash"] = fnv1a_hex(to_json(cfg));
    manifest["version"] = std::string(library_version);
    manifest["wall_time_seconds"] = wall_seconds;
    manifest["files"] = files;
    csv::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace fvnn
