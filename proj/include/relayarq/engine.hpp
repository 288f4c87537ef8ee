#pragma once

#include <string>

#include "relayarq/inr.hpp"
#include "relayarq/types.hpp"

namespace relayarq {

/// Routes a (channel, protocol, powers) instance to the matching analytical
/// engine: RTD/INR closed forms, correlated RTD, or the fast-fading CDFs.
/// inr_mode selects among the quasi-static INR evaluations.
EventProbabilities analytic_event_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                        const PowerAllocation& pw,
                                        InrMode inr_mode = InrMode::Exact2D);

Metrics analytic_metrics(const ChannelParams& ch, const ProtocolConfig& cfg,
                         const PowerAllocation& pw, InrMode inr_mode = InrMode::Exact2D);

/// Short engine tag for result records, e.g. "rtd_closed_form", "inr_exact2d".
std::string engine_name(const ChannelParams& ch, const ProtocolConfig& cfg,
                        InrMode inr_mode = InrMode::Exact2D);

}  // namespace relayarq
