// relayarq: throughput/outage/power analysis of relay-assisted hybrid-ARQ
// links, with closed-form engines cross-validated by a Monte Carlo simulator.
//
//   relayarq evaluate --config cfg.json [--validate] [--out dir] [--threads N] [--seed S]
//   relayarq validate --config cfg.json ...           (evaluate with MC columns)
//   relayarq optimize --config cfg.json ...
//   relayarq coverage --config cfg.json ...
//
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 infeasible problem.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "relayarq/experiment.hpp"

namespace {

void write_outputs(const std::string& out_dir, const relayarq::ExperimentConfig& cfg,
                   const std::string& command, const relayarq::CsvTable& table) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "results.csv", std::ios::binary);
    csv << table.to_string();
    std::ofstream meta(fs::path(out_dir) / "results.meta.json", std::ios::binary);
    meta << relayarq::provenance_json(cfg, command, table);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"relay-ARQ throughput/outage/power analysis"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int threads = 1;
    std::uint64_t seed = 0;
    bool seed_set = false, validate_flag = false;

    auto add_common = [&](CLI::App* sub, bool with_validate) {
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "directory for results.csv + results.meta.json");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "override the config's MC seed")
            ->each([&](const std::string&) { seed_set = true; });
        if (with_validate)
            sub->add_flag("--validate", validate_flag, "add MC columns and z-scores");
    };

    CLI::App* cmd_eval = app.add_subcommand("evaluate", "metrics for the configured points");
    add_common(cmd_eval, true);
    CLI::App* cmd_validate =
        app.add_subcommand("validate", "evaluate with MC cross-check columns");
    add_common(cmd_validate, false);
    CLI::App* cmd_opt = app.add_subcommand("optimize", "power/rate optimization");
    add_common(cmd_opt, false);
    CLI::App* cmd_cov = app.add_subcommand("coverage", "coverage region vs no-ARQ baseline");
    add_common(cmd_cov, false);

    CLI11_PARSE(app, argc, argv);

    try {
        relayarq::ExperimentConfig cfg = relayarq::load_config(config_path);
        if (seed_set) cfg.mc.seed = seed;

        relayarq::CsvTable table;
        std::string command;
        if (cmd_eval->parsed()) {
            command = validate_flag ? "evaluate --validate" : "evaluate";
            table = relayarq::run_evaluate(cfg, validate_flag, threads);
        } else if (cmd_validate->parsed()) {
            command = "validate";
            table = relayarq::run_evaluate(cfg, true, threads);
        } else if (cmd_opt->parsed()) {
            command = "optimize";
            table = relayarq::run_optimize(cfg, threads);
        } else {
            command = "coverage";
            table = relayarq::run_coverage(cfg, threads);
        }
        std::fputs(table.to_string().c_str(), stdout);
        if (!out_dir.empty()) write_outputs(out_dir, cfg, command, table);
        return 0;
    } catch (const relayarq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const relayarq::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 4;
    } catch (const relayarq::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
