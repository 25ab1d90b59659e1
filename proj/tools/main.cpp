// Command-line harness: data generation, single experiments, sweeps and the
// invariant check suite, driven by a JSON config file.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ddoc/validation.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int horizon = -1;
    int noise_case = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "JSON experiment config")->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "seed override");
    cmd->add_option("--horizon", opts.horizon, "horizon override");
    cmd->add_option("--noise-case", opts.noise_case, "noise case override (1, 2 or 3)")
        ->check(CLI::Range(1, 3));
}

ddoc::ExperimentConfig load_config(const CommonOptions& opts) {
    ddoc::ExperimentConfig cfg = ddoc::ExperimentConfig::load(opts.config_path);
    if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.horizon >= 0) cfg.horizon = opts.horizon;
    if (opts.noise_case > 0) cfg.noise.case_id = opts.noise_case;
    if (!opts.out_dir.empty()) cfg.output.dir = opts.out_dir;
    return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) throw ddoc::InvalidInputError("cannot write " + path.string());
    out << content;
}

int cmd_generate_data(const CommonOptions& opts) {
    const auto cfg = load_config(opts);
    const int pe_order = cfg.excitation_order();
    const auto gen = ddoc::generate_data(cfg.system, cfg.data, pe_order, cfg.seed);
    const fs::path path = fs::path(cfg.output.dir) / "data.csv";
    write_file(path, ddoc::trajectory_to_csv(gen.trajectory));
    std::cout << "wrote " << path.string() << " (" << gen.trajectory.length()
              << " samples, excitation order " << pe_order << ", retries " << gen.retries
              << ")\n";
    return 0;
}

int cmd_run(const CommonOptions& opts) {
    const auto cfg = load_config(opts);
    try {
        const auto result = ddoc::run_experiment(cfg);
        const fs::path record_path = fs::path(cfg.output.dir) / cfg.output.record;
        const fs::path summary_path = fs::path(cfg.output.dir) / cfg.output.summary;
        write_file(record_path, result.record.to_csv());
        write_file(summary_path, result.summary_json(cfg));
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << result.summary_json(cfg) << "\n";
        return 0;
    } catch (const ddoc::RunAbortedError& e) {
        // Keep whatever was logged before the failing step for debugging.
        const fs::path record_path = fs::path(cfg.output.dir) / cfg.output.record;
        write_file(record_path, e.partial_record().to_csv());
        throw;
    }
}

int cmd_sweep(const CommonOptions& opts, const std::vector<std::uint64_t>& seeds,
              const std::vector<int>& horizons, const std::vector<int>& noise_cases) {
    const auto base = load_config(opts);
    std::vector<std::uint64_t> seed_grid = seeds.empty()
                                               ? std::vector<std::uint64_t>{base.seed}
                                               : seeds;
    std::vector<int> horizon_grid = horizons.empty() ? std::vector<int>{base.horizon} : horizons;
    std::vector<int> case_grid =
        noise_cases.empty() ? std::vector<int>{base.noise.case_id} : noise_cases;

    std::ostringstream table;
    table << "seed,horizon,noise_case,total_regret,theta_path,eta_path,"
             "mean_tracking_error,max_output_norm,runtime_seconds\n";
    for (const auto seed : seed_grid)
        for (const int horizon : horizon_grid)
            for (const int noise_case : case_grid) {
                ddoc::ExperimentConfig cfg = base;
                cfg.seed = seed;
                cfg.horizon = horizon;
                cfg.noise.case_id = noise_case;
                const auto result = ddoc::run_experiment(cfg);
                table << seed << "," << horizon << "," << noise_case << ","
                      << ddoc::format_double(result.regret.total_regret) << ","
                      << ddoc::format_double(result.regret.theta_path) << ","
                      << ddoc::format_double(result.regret.eta_path) << ","
                      << ddoc::format_double(ddoc::mean_tracking_error(result.record)) << ","
                      << ddoc::format_double(ddoc::max_output_norm(result.record)) << ","
                      << ddoc::format_double(result.runtime_seconds) << "\n";
            }
    const fs::path path = fs::path(base.output.dir) / "sweep.csv";
    write_file(path, table.str());
    std::cout << table.str();
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_check(const CommonOptions& opts) {
    const auto cfg = load_config(opts);
    const auto suite = ddoc::run_invariant_suite(cfg);
    int failures = 0;
    for (const auto& check : suite.checks) {
        const bool gate = !check.informational;
        const char* tag = check.pass ? "[ok]  " : (gate ? "[FAIL]" : "[info]");
        if (!check.pass && gate) ++failures;
        std::cout << tag << " " << check.name << ": " << ddoc::format_double(check.value)
                  << " (threshold " << ddoc::format_double(check.threshold) << ")\n";
    }
    std::cout << (failures == 0 ? "all checks passed" : "checks failed") << "\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"data-driven online convex optimization controller harness"};
    app.require_subcommand(1);

    CommonOptions gen_opts, run_opts, sweep_opts, check_opts;
    auto* gen = app.add_subcommand("generate-data", "emit the data trajectory CSV");
    add_common(gen, gen_opts);
    auto* run = app.add_subcommand("run", "run one experiment (record CSV + summary JSON)");
    add_common(run, run_opts);
    auto* sweep = app.add_subcommand("sweep", "grid over seeds/horizons/noise cases");
    add_common(sweep, sweep_opts);
    std::vector<std::uint64_t> sweep_seeds;
    std::vector<int> sweep_horizons, sweep_cases;
    sweep->add_option("--seeds", sweep_seeds, "seeds to sweep");
    sweep->add_option("--horizons", sweep_horizons, "horizons to sweep");
    sweep->add_option("--noise-cases", sweep_cases, "noise cases to sweep");
    auto* check = app.add_subcommand("check", "run the invariant suite on a config");
    add_common(check, check_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate_data(gen_opts);
        if (run->parsed()) return cmd_run(run_opts);
        if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_seeds, sweep_horizons, sweep_cases);
        if (check->parsed()) return cmd_check(check_opts);
    } catch (const ddoc::RunAbortedError& e) {
        json err{{"error", {{"code", e.code()}, {"message", e.what()}, {"step", e.step()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const ddoc::Error& e) {
        json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        json err{{"error", {{"code", "internal"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 3;
    }
    return 0;
}
