#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relayarq/monte_carlo.hpp"
#include "relayarq/optimizer.hpp"
#include "relayarq/types.hpp"

namespace relayarq {

/// One fully-resolved experiment point of a sweep.
struct EvalPoint {
    ChannelParams channel;
    ProtocolConfig protocol;
    PowerAllocation powers;
    double snr_db = 0.0;
};

/// Parsed experiment configuration (strict JSON; unknown keys rejected).
struct ExperimentConfig {
    std::vector<double> snr_db{10.0};
    std::vector<double> deltas{0.0};
    bool explicit_powers = false;
    PowerAllocation powers;  // when explicit_powers

    ChannelParams channel;
    ProtocolConfig protocol;
    FeedbackNoise feedback;
    McConfig mc;

    InrMode inr_mode = InrMode::Exact2D;
    bool engine_mc = false;  // evaluate by simulation instead of closed forms

    // optimize
    Objective objective = Objective::MinOutage;
    bool scenario_individual = false;
    std::vector<double> budget_db{10.0};  // phi_total (or phi_s) sweep, in dB
    double phi_r_db = 10.0;
    std::vector<double> r1_sweep;  // optional: one row per initial rate
    bool free_rates = false;
    GridSpec grid;
    int multistarts = 8;
    int polish_iterations = 400;

    // coverage
    double eps = 1e-2;
    double coverage_lambda_lo = 1e-9;
    double coverage_lambda_hi = 1e6;
    double coverage_rel_tol = 1e-3;
    std::vector<int> coverage_m_sweep;  // optional M sweep (overrides protocol m_max)

    std::string raw;  // canonical dump for hashing/provenance
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string to_string() const;
};

CsvTable run_evaluate(const ExperimentConfig& cfg, bool validate, int threads);
CsvTable run_optimize(const ExperimentConfig& cfg, int threads);
CsvTable run_coverage(const ExperimentConfig& cfg, int threads);

/// Provenance sidecar: config hash, seed, engine, version, shape of the table.
std::string provenance_json(const ExperimentConfig& cfg, const std::string& command,
                            const CsvTable& table);

/// Shortest round-trippable decimal formatting; stable across runs.
std::string format_double(double v);

}  // namespace relayarq
