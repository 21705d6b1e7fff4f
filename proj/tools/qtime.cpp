// Command-line runner: qtime run|validate|list.

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qtime/config.hpp"
#include "qtime/errors.hpp"
#include "qtime/experiments.hpp"
#include "qtime/io.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr const char* kOutRootEnv = "QTIME_OUT_ROOT";

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kBlowup = 3, kCertFail = 4 };

namespace fs = std::filesystem;

fs::path output_dir(const qtime::config::ExperimentConfig& cfg, const std::string& flag) {
    if (!flag.empty()) return flag;
    if (!cfg.out.empty()) return cfg.out;
    const char* root = std::getenv(kOutRootEnv);
    return fs::path(root && *root ? root : "runs") / cfg.kind;
}

int run(const std::string& config_path, const std::string& out_flag, long seed) {
    qtime::config::ExperimentConfig cfg;
    try {
        cfg = qtime::config::load_config(config_path);
    } catch (const qtime::config::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return kConfig;
    }
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    const fs::path dir = output_dir(cfg, out_flag);

    const auto start = std::chrono::steady_clock::now();
    qtime::experiments::Outcome outcome;
    try {
        outcome = qtime::experiments::run(cfg);
    } catch (const qtime::config::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return kConfig;
    } catch (const qtime::NumericalBlowup& e) {
        std::cerr << "numerical blowup: " << e.what() << "\n";
        return kBlowup;
    } catch (const qtime::StepRejected& e) {
        std::cerr << "step rejected: " << e.what() << "\n";
        return kBlowup;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : outcome.files) {
        qtime::io::write_atomic(dir / f.name, f.content);
        files.push_back({{"name", f.name},
                         {"bytes", f.content.size()},
                         {"sha256", qtime::io::sha256_hex(f.content)}});
    }
    const nlohmann::json manifest = {
        {"tool", "qtime"},
        {"version", kVersion},
        {"config", cfg.echo()},
        {"wall_clock_seconds", wall},
        {"files", files},
    };
    qtime::io::write_atomic(dir / "manifest.json", qtime::io::json_text(manifest));
    std::cout << cfg.kind << ": wrote " << outcome.files.size() << " files to " << dir.string() << "\n";
    if (outcome.certification_failed) {
        std::cerr << "certification failed (see " << (dir / "summary.json").string() << ")\n";
        return kCertFail;
    }
    return kOk;
}

int validate(const std::string& config_path) {
    try {
        qtime::config::load_config(config_path);
    } catch (const qtime::config::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return kConfig;
    }
    return kOk;
}

int list() {
    for (const auto& k : qtime::config::experiment_kinds()) {
        std::cout << k << "\n";
        for (const auto& p : qtime::config::describe_kind(k)) {
            std::cout << "  " << p.at("name").get<std::string>() << " = " << p.at("default").dump() << "\n";
        }
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quadratic time change laboratory"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

    std::string config_path, out;
    long seed = -1;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment and write its outputs and manifest");
    run_cmd->add_option("--config", config_path, "TOML or JSON experiment file")->required();
    run_cmd->add_option("--out", out, "Output directory (overrides the config and " + std::string(kOutRootEnv) + ")");
    run_cmd->add_option("--seed", seed, "Seed override")->check(CLI::NonNegativeNumber);

    std::string validate_path;
    auto* val_cmd = app.add_subcommand("validate", "Check a config file without running it");
    val_cmd->add_option("--config", validate_path, "TOML or JSON experiment file")->required();

    auto* list_cmd = app.add_subcommand("list", "List experiment kinds and their parameters");

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (*run_cmd) return run(config_path, out, seed);
        if (*val_cmd) return validate(validate_path);
        if (*list_cmd) return list();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOther;
}
