#pragma once

#include <map>
#include <utility>
#include <vector>

#include "relayarq/types.hpp"

namespace relayarq {

/// Closed-form probability terms of the RTD protocol over independent
/// quasi-static Rayleigh fading. alpha/beta/omega are indexed by round
/// (entry m-1 holds the round-m value); theta and rho cover the relay
/// takeover combinations.
struct RtdTerms {
    std::vector<double> alpha;                     // m = 1..M
    std::vector<double> beta;                      // m = 1..M+1
    double gamma = 0.0;                            // source sends all M+1 rounds
    std::vector<double> omega;                     // j = 1..M
    std::map<std::pair<int, int>, double> theta;   // (j,m), 1<=j<m<=M+1
    std::vector<double> rho;                       // n = 1..M
};

/// G_j(x) of the RTD analysis: Pr(g_sd * Ps(1..j) + g_rd * x < e^R - 1),
/// with the removable singularity at x = lambda_rd * Ps(1..j) / lambda_sd
/// handled explicitly. Exposed for the continuity tests.
double rtd_g_function(const ChannelParams& ch, double source_cumsum, double r1, double x);

RtdTerms rtd_terms(const ChannelParams& ch, const ProtocolConfig& cfg,
                   const PowerAllocation& pw);

std::vector<double> rtd_stop_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                   const PowerAllocation& pw);
std::vector<double> rtd_success_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                      const PowerAllocation& pw);
std::map<std::pair<int, int>, double> rtd_relay_active_probs(const ChannelParams& ch,
                                                             const ProtocolConfig& cfg,
                                                             const PowerAllocation& pw);

/// Full event bundle Pr(A), Pr(S), Pr(B).
EventProbabilities rtd_event_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                   const PowerAllocation& pw);

}  // namespace relayarq
