#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "relayarq/inr.hpp"
#include "relayarq/types.hpp"

namespace relayarq {

enum class Objective { MaxThroughput, MinOutage };

struct SumPowerConstraint {
    double phi_total = 1.0;
};
struct IndividualConstraint {
    double phi_s = 1.0;
    double phi_r = 1.0;
};
using PowerConstraint = std::variant<SumPowerConstraint, IndividualConstraint>;

struct GridSpec {
    double span_db = 20.0;      // search [-span, +span] dB around the constraint level
    double step_db = 0.5;       // requested grid step
    std::uint64_t max_grid_evaluations = 200000;  // step is coarsened to respect this
};

struct OptProblem {
    Objective objective = Objective::MaxThroughput;
    PowerConstraint scenario = SumPowerConstraint{};
    ChannelParams channel;
    ProtocolConfig protocol;  // the rate ladder doubles as the free_rates template
    InrMode inr_mode = InrMode::Exact2D;
    bool free_rates = false;  // also optimize the rate ladder
    GridSpec grid;
    int multistarts = 8;
    int polish_iterations = 400;
    int threads = 1;  // grid evaluations only; the result does not depend on it
};

struct OptResult {
    PowerAllocation powers;
    std::vector<double> rates;
    double objective_value = 0.0;  // throughput, or -outage for MinOutage
    Metrics metrics;
    std::uint64_t evaluations = 0;
    std::vector<double> start_values;  // best value seen by each polish start
};

/// Coarse grid search in dB space followed by multi-start Nelder-Mead in
/// log space; infeasible candidates (constraint Phi evaluated from the
/// candidate's own event probabilities) are rejected. Deterministic.
OptResult optimize(const OptProblem& problem);

/// Largest lambda_sd for which the optimized outage stays <= eps
/// (coverage region boundary), found by bisection on lambda_sd.
double coverage_lambda_threshold(const OptProblem& problem, double eps,
                                 double lambda_lo = 1e-9, double lambda_hi = 1e6,
                                 double rel_tol = 1e-3);

/// Coverage of `problem` relative to the single-user no-ARQ baseline with
/// the same initial rate and total power budget.
double coverage_ratio(const OptProblem& problem, double eps);

}  // namespace relayarq
