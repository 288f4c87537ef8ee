#pragma once

#include "relayarq/types.hpp"

namespace relayarq {

/// Correlated source-relay / source-destination Rayleigh model: the two
/// links share one rate parameter lambda and h_sd = delta h_sr +
/// sqrt(1-delta^2) varsigma. The relay-destination link stays independent.
struct CorrelatedChannel {
    double lambda = 1.0;
    double lambda_rd = 1.0;
    double delta = 0.0;

    static CorrelatedChannel from_params(const ChannelParams& ch);
    void validate() const;
};

/// Y(u,v,w,z) = Pr(g_sd in [u,v) and g_sr in [w,z)) under the correlated
/// joint pdf, composed from Marcum Q terms. v and z may be +inf.
double rect_prob(const CorrelatedChannel& ch, double u, double v, double w, double z);

/// RTD event probabilities over the correlated quasi-static channel; the
/// relay-takeover terms are 1-D integrals of rect_prob over the g_rd pdf.
EventProbabilities corr_rtd_event_probs(const CorrelatedChannel& ch,
                                        const ProtocolConfig& cfg,
                                        const PowerAllocation& pw);

}  // namespace relayarq
