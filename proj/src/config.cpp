#include "fvnn/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "fvnn/error.hpp"
#include "fvnn/rng.hpp"

namespace fvnn {

using json = nlohmann::ordered_json;

std::string_view to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::synth_sweep: return "synth_sweep";
        case ExperimentKind::gamma_sweep: return "gamma_sweep";
        case ExperimentKind::classification: return "classification";
        case ExperimentKind::stability: return "stability";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
    for (auto k : {ExperimentKind::synth_sweep, ExperimentKind::gamma_sweep, ExperimentKind::classification,
                   ExperimentKind::stability})
        if (to_string(k) == name) return k;
    fail(ErrorCode::config, "unknown experiment '" + std::string(name) + "'");
}

std::vector<CovarianceRecipe> CovarianceConfig::recipes() const {
    std::vector<CovarianceRecipe> out;
    for (auto kind : kinds) {
        CovarianceRecipe r;
        r.kind = kind;
        r.disadvantaged_group = disadvantaged_group;
        r.clip_negative = clip_negative;
        if (kind == CovarianceKind::balanced) {
            for (double a : alpha) {
                r.alpha = a;
                out.push_back(r);
            }
        } else if (kind == CovarianceKind::debiased) {
            for (double b : beta) {
                r.beta = b;
                out.push_back(r);
            }
        } else {
            out.push_back(r);
        }
    }
    return out;
}

Architecture ModelConfig::architecture(Task task, int num_classes) const {
    Architecture a;
    Index in = 1;
    for (const auto& l : layers) {
        a.layers.push_back({in, l.features, l.order});
        in = l.features;
    }
    a.activation = activation;
    a.activate_last = activate_last;
    a.task = task;
    a.out_dim = task == Task::classification ? num_classes : 1;
    return a;
}

std::vector<Index> SweepConfig::t1_values() const {
    std::vector<Index> out;
    if (t1_step <= 0) return out;
    for (Index t = t1_start; t <= t1_stop; t += t1_step) out.push_back(t);
    return out;
}

bool ExperimentConfig::has_method(const std::string& m) const {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
}

std::uint64_t ExperimentConfig::trial_seed(int trial) const {
    return derive_seed(seed, {static_cast<std::uint64_t>(trial)});
}

std::filesystem::path ExperimentConfig::dataset_path() const {
    if (!dataset.path_env.empty())
        if (const char* v = std::getenv(dataset.path_env.c_str()); v && *v) return v;
    return dataset.path;
}

namespace {

// Reads fields from one JSON object and reports keys nobody asked for.
template <class T>
struct is_vector : std::false_type {};
template <class U>
struct is_vector<std::vector<U>> : std::true_type {};

/// Strict JSON kind match; no silent float/int or sign conversion.
template <class T>
bool fits(const json& j) {
    if constexpr (std::is_same_v<T, bool>) {
        return j.is_boolean();
    } else if constexpr (std::is_integral_v<T>) {
        if (!j.is_number_integer()) return false;
        if (j.is_number_unsigned()) return j.get<std::uint64_t>() <= static_cast<std::uint64_t>(std::numeric_limits<T>::max());
        const auto v = j.get<std::int64_t>();
        if constexpr (std::is_unsigned_v<T>) return v >= 0;
        else return v >= std::numeric_limits<T>::min() && v <= std::numeric_limits<T>::max();
    } else if constexpr (std::is_floating_point_v<T>) {
        return j.is_number();
    } else if constexpr (std::is_same_v<T, std::string>) {
        return j.is_string();
    } else if constexpr (is_vector<T>::value) {
        return j.is_array() &&
               std::all_of(j.begin(), j.end(), [](const json& e) { return fits<typename T::value_type>(e); });
    } else {
        return true;
    }
}

class Reader {
public:
    Reader(const json* node, std::string prefix, std::vector<std::string>& errors)
        : node_(node), prefix_(std::move(prefix)), errors_(errors) {
        if (node_ && !node_->is_object()) {
            error("", "must be an object");
            node_ = nullptr;
        }
    }

    ~Reader() {
        if (!node_) return;
        for (auto it = node_->begin(); it != node_->end(); ++it)
            if (!seen_.count(it.key())) errors_.push_back("unknown key '" + path(it.key()) + "'");
    }

    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    Reader child(const std::string& key) {
        seen_.insert(key);
        const json* c = node_ && node_->contains(key) ? &(*node_)[key] : nullptr;
        return Reader(c, path(key), errors_);
    }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!node_ || !node_->contains(key)) return;
        if (!fits<T>((*node_)[key])) {
            error(key, "has the wrong type");
            return;
        }
        try {
            out = (*node_)[key].get<T>();
        } catch (const std::exception&) {
            error(key, "has the wrong type");
        }
    }

    template <class T, class Parse>
    void get_enum(const std::string& key, T& out, Parse parse) {
        std::string s;
        if (!present(key)) return;
        get(key, s);
        try {
            out = parse(s);
        } catch (const Error& e) {
            error(key, e.what());
        }
    }

    template <class T, class Parse>
    void get_enum_list(const std::string& key, std::vector<T>& out, Parse parse) {
        std::vector<std::string> names;
        if (!present(key)) return;
        get(key, names);
        std::vector<T> parsed;
        for (const auto& s : names) {
            try {
                parsed.push_back(parse(s));
            } catch (const Error& e) {
                error(key, e.what());
            }
        }
        out = parsed;
    }

    bool present(const std::string& key) {
        seen_.insert(key);
        return node_ && node_->contains(key) && !(*node_)[key].is_null();
    }

    const json* raw(const std::string& key) {
        seen_.insert(key);
        return node_ && node_->contains(key) ? &(*node_)[key] : nullptr;
    }

    void error(const std::string& key, const std::string& msg) {
        errors_.push_back("'" + path(key) + "' " + msg);
    }

private:
    std::string path(const std::string& key) const {
        if (key.empty()) return prefix_;
        return prefix_.empty() ? key : prefix_ + "." + key;
    }

    const json* node_;
    std::string prefix_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

void read_schema(Reader r, CsvSchema& s) {
    std::string delim(1, s.delimiter);
    r.get("delimiter", delim);
    if (delim.size() == 1)
        s.delimiter = delim[0];
    else
        r.error("delimiter", "must be a single character");
    r.get_enum("task", s.task, [](std::string_view v) {
        if (v == "regression") return Task::regression;
        if (v == "classification") return Task::classification;
        fail(ErrorCode::config, "unknown task '" + std::string(v) + "'");
    });
    r.get("target", s.target);
    r.get("sensitive", s.sensitive);
    r.get("numeric", s.numeric);
    r.get("categorical", s.categorical);
    r.get("one_hot_drop_first", s.one_hot_drop_first);
    r.get("sensitive_as_feature", s.sensitive_as_feature);
    r.get("group_map", s.group_map);
    if (r.present("group_default")) {
        int g = 0;
        r.get("group_default", g);
        s.group_default = g;
    }
    r.get("label_map", s.label_map);
    r.get("missing_tokens", s.missing_tokens);
    r.get("columns", s.columns);
}

json schema_json(const CsvSchema& s) {
    json j;
    j["delimiter"] = std::string(1, s.delimiter);
    j["task"] = s.task == Task::regression ? "regression" : "classification";
    j["target"] = s.target;
    j["sensitive"] = s.sensitive;
    j["numeric"] = s.numeric;
    j["categorical"] = s.categorical;
    j["one_hot_drop_first"] = s.one_hot_drop_first;
    j["sensitive_as_feature"] = s.sensitive_as_feature;
    j["group_map"] = s.group_map;
    j["group_default"] = s.group_default ? json(*s.group_default) : json(nullptr);
    j["label_map"] = s.label_map;
    j["missing_tokens"] = s.missing_tokens;
    j["columns"] = s.columns;
    return j;
}

template <class T, class F>
json names(const std::vector<T>& v, F f) {
    json out = json::array();
    for (const auto& x : v) out.push_back(std::string(f(x)));
    return out;
}

}  // namespace

ConfigParse parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    ConfigParse out;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        out.errors.push_back(std::string("malformed JSON: ") + e.what());
        return out;
    }
    ExperimentConfig c;
    {
        Reader r(&root, "", out.errors);
        r.get_enum("experiment", c.experiment, experiment_kind_from_string);
        r.get("name", c.name);
        r.get("seed", c.seed);
        r.get("trials", c.trials);
        r.get("methods", c.methods);
        std::string output = c.output.string();
        r.get("output", output);
        c.output = output;

        {
            Reader d = r.child("dataset");
            auto& ds = c.dataset;
            d.get("source", ds.source);
            {
                Reader s = d.child("synthetic");
                s.get("N", ds.synthetic.N);
                s.get("T1", ds.synthetic.T1);
                s.get("T2", ds.synthetic.T2);
                s.get("eigengap_ratio", ds.synthetic.eigengap_ratio);
                s.get("noise_std", ds.synthetic.noise_std);
                s.get("classification", ds.synthetic_classification);
            }
            std::string path = ds.path.string();
            d.get("path", path);
            ds.path = path;
            if (!ds.path.empty() && ds.path.is_relative() && !base_dir.empty()) ds.path = base_dir / ds.path;
            d.get("path_env", ds.path_env);
            read_schema(d.child("schema"), ds.schema);
            d.get("split", ds.split);
            d.get("train_per_group", ds.train_per_group);
            d.get("test_fraction", ds.test_fraction);
            d.get("stratify", ds.stratify);
            d.get("standardize_target", ds.standardize_target);
            d.get_enum("error_metric", ds.error_metric, error_metric_from_string);
        }
        {
            Reader v = r.child("covariance");
            auto& cv = c.covariance;
            v.get_enum_list("kinds", cv.kinds, covariance_kind_from_string);
            v.get("alpha", cv.alpha);
            v.get("beta", cv.beta);
            v.get("disadvantaged_group", cv.disadvantaged_group);
            v.get("clip_negative", cv.clip_negative);
        }
        {
            Reader m = r.child("model");
            if (const json* layers = m.raw("layers")) {
                if (!layers->is_array()) {
                    m.error("layers", "must be an array");
                } else {
                    c.model.layers.clear();
                    for (std::size_t i = 0; i < layers->size(); ++i) {
                        LayerConfig l;
                        Reader lr(&(*layers)[i], "model.layers[" + std::to_string(i) + "]", out.errors);
                        lr.get("features", l.features);
                        lr.get("order", l.order);
                        c.model.layers.push_back(l);
                    }
                }
            }
            m.get_enum("activation", c.model.activation, activation_from_string);
            m.get("activate_last", c.model.activate_last);
        }
        {
            Reader t = r.child("training");
            auto& tc = c.training.train;
            t.get("gammas", c.training.gammas);
            t.get("epochs", tc.epochs);
            t.get("batch_size", tc.batch_size);
            t.get("learning_rate", tc.learning_rate);
            t.get_enum("optimizer", tc.optimizer, optimizer_kind_from_string);
            t.get("beta1", tc.beta1);
            t.get("beta2", tc.beta2);
            t.get("epsilon", tc.epsilon);
            if (t.present("early_stop")) {
                EarlyStop es;
                Reader e = t.child("early_stop");
                e.get("patience", es.patience);
                e.get("validation_fraction", es.validation_fraction);
                tc.early_stop = es;
            }
        }
        {
            Reader b = r.child("baselines");
            auto& bc = c.baselines;
            b.get_enum_list("kinds", bc.kinds, downstream_kind_from_string);
            b.get("m", bc.m);
            b.get("ridge", bc.ridge);
            if (b.present("bandwidth")) {
                double w = 0;
                b.get("bandwidth", w);
                bc.bandwidth = w;
            }
            b.get("max_support", bc.max_support);
        }
        {
            Reader s = r.child("sweep");
            s.get("t1_start", c.sweep.t1_start);
            s.get("t1_stop", c.sweep.t1_stop);
            s.get("t1_step", c.sweep.t1_step);
        }
        {
            Reader s = r.child("stability");
            auto& st = c.stability;
            s.get("cases", st.cases);
            s.get("t_grid", st.t_grid);
            s.get("trials", st.trials);
            s.get("filters", st.filters);
            s.get("alpha", st.alpha);
            s.get("beta", st.beta);
        }
    }
    c.dataset.synthetic.seed = c.seed;
    c.training.train.seed = c.seed;
    if (c.dataset.synthetic_classification) c.dataset.schema.task = Task::classification;
    if (out.errors.empty()) out.config = c;
    return out;
}

std::string to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = std::string(to_string(c.experiment));
    j["name"] = c.name;
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["methods"] = c.methods;
    j["output"] = c.output.string();

    const auto& ds = c.dataset;
    json d;
    d["source"] = ds.source;
    d["synthetic"] = {{"N", ds.synthetic.N},
                      {"T1", ds.synthetic.T1},
                      {"T2", ds.synthetic.T2},
                      {"eigengap_ratio", ds.synthetic.eigengap_ratio},
                      {"noise_std", ds.synthetic.noise_std},
                      {"classification", ds.synthetic_classification}};
    d["path"] = ds.path.string();
    d["path_env"] = ds.path_env;
    d["schema"] = schema_json(ds.schema);
    d["split"] = ds.split;
    d["train_per_group"] = ds.train_per_group;
    d["test_fraction"] = ds.test_fraction;
    d["stratify"] = ds.stratify;
    d["standardize_target"] = ds.standardize_target;
    d["error_metric"] = std::string(to_string(ds.error_metric));
    j["dataset"] = d;

    const auto& cv = c.covariance;
    j["covariance"] = {{"kinds", names(cv.kinds, [](auto k) { return to_string(k); })},
                       {"alpha", cv.alpha},
                       {"beta", cv.beta},
                       {"disadvantaged_group", cv.disadvantaged_group},
                       {"clip_negative", cv.clip_negative}};

    json layers = json::array();
    for (const auto& l : c.model.layers) layers.push_back({{"features", l.features}, {"order", l.order}});
    j["model"] = {{"layers", layers},
                  {"activation", std::string(to_string(c.model.activation))},
                  {"activate_last", c.model.activate_last}};

    const auto& tc = c.training.train;
    json t;
    t["gammas"] = c.training.gammas;
    t["epochs"] = tc.epochs;
    t["batch_size"] = tc.batch_size;
    t["learning_rate"] = tc.learning_rate;
    t["optimizer"] = std::string(to_string(tc.optimizer));
    t["beta1"] = tc.beta1;
    t["beta2"] = tc.beta2;
    t["epsilon"] = tc.epsilon;
    t["early_stop"] = tc.early_stop ? json{{"patience", tc.early_stop->patience},
                                           {"validation_fraction", tc.early_stop->validation_fraction}}
                                    : json(nullptr);
    j["training"] = t;

    const auto& bc = c.baselines;
    j["baselines"] = {{"kinds", names(bc.kinds, [](auto k) { return to_string(k); })},
                      {"m", bc.m},
                      {"ridge", bc.ridge},
                      {"bandwidth", bc.bandwidth ? json(*bc.bandwidth) : json(nullptr)},
                      {"max_support", bc.max_support}};
    j["sweep"] = {{"t1_start", c.sweep.t1_start}, {"t1_stop", c.sweep.t1_stop}, {"t1_step", c.sweep.t1_step}};
    const auto& st = c.stability;
    j["stability"] = {{"cases", st.cases},   {"t_grid", st.t_grid}, {"trials", st.trials},
                      {"filters", st.filters}, {"alpha", st.alpha},   {"beta", st.beta}};
    return j.dump(2) + "\n";
}

std::vector<std::string> check_config(const ExperimentConfig& c) {
    std::vector<std::string> e;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) e.push_back(msg);
    };
    check(c.trials >= 1, "'trials' must be at least 1");
    check(!c.methods.empty(), "'methods' must not be empty");
    for (const auto& m : c.methods) check(m == "fvnn" || m == "pca", "unknown method '" + m + "'");
    const auto& ds = c.dataset;
    check(ds.source == "synthetic" || ds.source == "csv", "'dataset.source' must be synthetic or csv");
    if (ds.source == "synthetic") {
        try {
            ds.synthetic.validate();
        } catch (const Error& err) {
            e.push_back(std::string("dataset.synthetic: ") + err.what());
        }
    } else {
        const auto p = c.dataset_path();
        check(!p.empty(), "'dataset.path' is required for csv data");
        if (!p.empty()) check(std::filesystem::exists(p), "dataset file '" + p.string() + "' does not exist");
        check(!ds.schema.target.empty(), "'dataset.schema.target' is required");
        check(!ds.schema.sensitive.empty(), "'dataset.schema.sensitive' is required");
    }
    check(ds.split == "per_group" || ds.split == "random", "'dataset.split' must be per_group or random");
    check(ds.train_per_group >= 1, "'dataset.train_per_group' must be positive");
    check(ds.test_fraction > 0 && ds.test_fraction < 1, "'dataset.test_fraction' must lie in (0, 1)");
    check(!c.covariance.kinds.empty(), "'covariance.kinds' must not be empty");
    check(!c.covariance.alpha.empty(), "'covariance.alpha' must not be empty");
    check(!c.covariance.beta.empty(), "'covariance.beta' must not be empty");
    for (double a : c.covariance.alpha) check(a >= 0 && a <= 1, "'covariance.alpha' values must lie in [0, 1]");
    for (double b : c.covariance.beta) check(b >= 0, "'covariance.beta' values must be nonnegative");
    check(!c.model.layers.empty(), "'model.layers' must not be empty");
    for (const auto& l : c.model.layers)
        check(l.features >= 1 && l.order >= 0, "'model.layers' need features >= 1 and order >= 0");
    check(!c.training.gammas.empty(), "'training.gammas' must not be empty");
    for (double g : c.training.gammas) check(g >= 0 && g <= 1, "'training.gammas' values must lie in [0, 1]");
    try {
        c.training.train.validate();
    } catch (const Error& err) {
        e.push_back(std::string("training: ") + err.what());
    }
    if (c.has_method("pca")) {
        check(!c.baselines.kinds.empty(), "'baselines.kinds' must not be empty");
        check(!c.baselines.m.empty(), "'baselines.m' must not be empty");
        for (Index m : c.baselines.m) check(m >= 1, "'baselines.m' values must be positive");
        if (ds.source == "synthetic")
            for (Index m : c.baselines.m) check(m <= ds.synthetic.N, "'baselines.m' exceeds the dimension");
    }
    check(c.baselines.ridge >= 0, "'baselines.ridge' must be nonnegative");
    check(!c.baselines.bandwidth || *c.baselines.bandwidth > 0, "'baselines.bandwidth' must be positive");
    if (c.experiment == ExperimentKind::synth_sweep) {
        check(ds.source == "synthetic", "synth_sweep needs synthetic data");
        check(!c.sweep.t1_values().empty(), "'sweep' range is empty");
        check(ds.split == "per_group", "synth_sweep needs the per_group split");
        check(c.sweep.t1_start >= 1 && c.sweep.t1_stop <= ds.synthetic.T1 - ds.train_per_group,
              "'sweep' range exceeds the group-1 test rows");
    }
    if (c.experiment == ExperimentKind::stability) {
        const auto& st = c.stability;
        check(!st.cases.empty(), "'stability.cases' must not be empty");
        for (const auto& s : st.cases)
            check(s == "balanced" || s == "debiased", "unknown stability case '" + s + "'");
        check(st.t_grid.size() >= 2, "'stability.t_grid' needs at least two points");
        for (std::size_t i = 0; i < st.t_grid.size(); ++i) {
            check(st.t_grid[i] >= 4, "'stability.t_grid' values must be at least 4");
            if (i) check(st.t_grid[i] > st.t_grid[i - 1], "'stability.t_grid' must be ascending");
        }
        check(st.trials >= 1, "'stability.trials' must be at least 1");
        check(!st.filters.empty(), "'stability.filters' must not be empty");
        for (const auto& f : st.filters) check(!f.empty(), "'stability.filters' entries must not be empty");
        check(st.alpha >= 0 && st.alpha <= 1, "'stability.alpha' must lie in [0, 1]");
        check(st.beta >= 0, "'stability.beta' must be nonnegative");
    }
    if (c.experiment == ExperimentKind::classification)
        check(ds.source == "csv" ? ds.schema.task == Task::classification : ds.synthetic_classification,
              "classification needs a classification dataset");
    if (c.experiment == ExperimentKind::gamma_sweep || c.experiment == ExperimentKind::synth_sweep)
        check(ds.source == "synthetic" ? !ds.synthetic_classification : ds.schema.task == Task::regression,
              "this experiment needs a regression dataset");
    return e;
}

namespace {
std::string join_errors(const std::vector<std::string>& errors) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
    return msg;
}
}  // namespace

ExperimentConfig config_from_string(const std::string& text, const std::filesystem::path& base_dir) {
    ConfigParse p = parse_config(text, base_dir);
    if (!p.config) fail(ErrorCode::config, join_errors(p.errors));
    return *p.config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::io, "cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_string(ss.str(), path.parent_path());
}

std::string normalize_config(const std::string& text, const std::filesystem::path& base_dir) {
    return to_json(config_from_string(text, base_dir));
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fvnn
