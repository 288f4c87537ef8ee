#pragma once

#include "relayarq/types.hpp"

namespace relayarq {

/// Closed-form outage and total average power for RTD, M = 1, with
/// erroneous ACK/NACK feedback. With all error probabilities zero these
/// reduce to the noiseless expressions.
struct NoisyRtdM1Result {
    double outage = 0.0;
    double phi_total = 0.0;
};

NoisyRtdM1Result noisy_rtd_m1_metrics(const ChannelParams& ch, const PowerAllocation& pw,
                                      double r1, const FeedbackNoise& fb);

/// kappa = Pr(log(1 + g_sd P^s_1 + Z) < R) with Z = |H_sd sqrt(P^s_2) +
/// H_rd sqrt(P^r_2)|^2 sharing the H_sd realization: conditioned on g_sd,
/// Z is noncentral-exponential, so the conditional CDF is a Marcum Q.
double kappa_term(const ChannelParams& ch, const PowerAllocation& pw, double r1);

}  // namespace relayarq
