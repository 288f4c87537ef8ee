#pragma once

#include <map>
#include <utility>
#include <vector>

#include "relayarq/types.hpp"

namespace relayarq {

/// How the INR destination failure probabilities (the 2-D region integrals)
/// are evaluated. The bounds require fixed-length coding; UpperBoundT2
/// additionally requires its low-SNR constant r >= 1.
enum class InrMode { Exact2D, LowSnrApprox, LowerBoundT1, UpperBoundT2 };

const char* inr_mode_name(InrMode mode);

/// Maximum rate decodable by the relay at round m (accumulated mutual
/// information, normalized to the equivalent rate at round m).
double inr_rate_relay(double g_sr, const ProtocolConfig& cfg, const PowerAllocation& pw,
                      int m);

/// Maximum rate decodable by the destination at round m given the relay took
/// over after round j (j = m: source only).
double inr_rate_dest(double g_sd, double g_rd, const ProtocolConfig& cfg,
                     const PowerAllocation& pw, int j, int m);

/// Decoding thresholds: x_r[m] solves U_r(x) = R_(m), x_d[m] solves
/// U_d(x) = R_(m) for the source-only destination chain. Entry 0 is +inf
/// (nothing decodable before the first round).
struct InrThresholds {
    std::vector<double> x_r;
    std::vector<double> x_d;
};

InrThresholds solve_thresholds(const ProtocolConfig& cfg, const PowerAllocation& pw);

/// alpha, beta, gamma, omega of the INR protocol (exact thresholds).
struct InrSourceTerms {
    std::vector<double> alpha;  // m = 1..M
    std::vector<double> beta;   // m = 1..M+1
    double gamma = 0.0;
    std::vector<double> omega;  // j = 1..M
};

InrSourceTerms inr_source_terms(const ChannelParams& ch, const ProtocolConfig& cfg,
                                const PowerAllocation& pw);

/// Pr(destination cannot decode by round m | relay took over after round j),
/// evaluated per the requested mode. j = m gives the source-only value.
double inr_dest_fail_prob(const ChannelParams& ch, const ProtocolConfig& cfg,
                          const PowerAllocation& pw, int j, int m, InrMode mode);

struct InrThetaRho {
    std::map<std::pair<int, int>, double> theta;  // (j,m), 1<=j<m<=M+1
    std::vector<double> rho;                      // n = 1..M
};

InrThetaRho inr_theta_rho(const ChannelParams& ch, const ProtocolConfig& cfg,
                          const PowerAllocation& pw, InrMode mode);

EventProbabilities inr_event_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                   const PowerAllocation& pw,
                                   InrMode mode = InrMode::Exact2D);

}  // namespace relayarq
