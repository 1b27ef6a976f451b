#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fvnn/config.hpp"
#include "fvnn/error.hpp"
#include "fvnn/experiments.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    int jobs = 1;
};

void report_error(std::string_view code, const std::string& message, const std::vector<std::string>& details = {}) {
    nlohmann::ordered_json j;
    j["error"] = code;
    j["message"] = message;
    if (!details.empty()) j["details"] = details;
    std::cerr << j.dump() << std::endl;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fvnn::Error(fvnn::ErrorCode::io, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int validate(const Options& o) {
    const auto p = fvnn::parse_config(read_file(o.config), std::filesystem::path(o.config).parent_path());
    std::vector<std::string> errors = p.errors;
    if (p.config) {
        const auto semantic = fvnn::check_config(*p.config);
        errors.insert(errors.end(), semantic.begin(), semantic.end());
    }
    if (!errors.empty()) {
        report_error("config", "invalid configuration", errors);
        return 2;
    }
    const std::string normalized = fvnn::to_json(*p.config);
    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        std::ofstream(std::filesystem::path(o.out) / "config.normalized.json") << normalized;
    }
    std::cout << normalized;
    return 0;
}

int run(const Options& o, std::optional<fvnn::ExperimentKind> expected, bool gradcheck) {
    fvnn::ExperimentConfig cfg = fvnn::load_config(o.config);
    if (expected && cfg.experiment != *expected)
        throw fvnn::Error(fvnn::ErrorCode::config, "config declares experiment '" +
                                                       std::string(fvnn::to_string(cfg.experiment)) + "', expected '" +
                                                       std::string(fvnn::to_string(*expected)) + "'");
    const auto start = std::chrono::steady_clock::now();
    const fvnn::ExperimentOutput out =
        gradcheck ? fvnn::run_gradcheck(cfg, o.jobs) : fvnn::run_experiment(cfg, o.jobs);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::filesystem::path dir = o.out.empty() ? cfg.output : std::filesystem::path(o.out);
    fvnn::write_outputs(dir, out, cfg, wall);
    std::cout << "wrote " << out.files.size() << " files to " << dir.string() << " in " << wall << " s\n";
    if (!out.ok) {
        report_error("check_failed", out.message);
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fair covariance neural network experiments"};
    app.require_subcommand(1);
    Options opts;

    struct Sub {
        const char* name;
        const char* help;
        std::optional<fvnn::ExperimentKind> kind;
    };
    const Sub subs[] = {
        {"synth-sweep", "Synthetic T1 sweep with frozen predictors", fvnn::ExperimentKind::synth_sweep},
        {"gamma-sweep", "Penalty-weight sweep on a regression dataset", fvnn::ExperimentKind::gamma_sweep},
        {"classify", "Classification grid over splits", fvnn::ExperimentKind::classification},
        {"stability", "Filter distance against sample count", fvnn::ExperimentKind::stability},
        {"gradcheck", "Finite-difference gradient checks", std::nullopt},
        {"validate", "Check a config and print its normalized form", std::nullopt},
    };
    std::vector<std::pair<CLI::App*, const Sub*>> commands;
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        cmd->add_option("--config", opts.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", opts.out, "Output directory (overrides the config)");
        cmd->add_option("--jobs", opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
        commands.emplace_back(cmd, &s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        report_error("usage", e.what());
        return 64;
    }

    try {
        for (const auto& [cmd, sub] : commands) {
            if (!cmd->parsed()) continue;
            const std::string name = sub->name;
            if (name == "validate") return validate(opts);
            return run(opts, sub->kind, name == "gradcheck");
        }
    } catch (const fvnn::Error& e) {
        report_error(fvnn::to_string(e.code()), e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return 3;
    }
    return 0;
}
