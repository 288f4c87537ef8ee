#include "relayarq/engine.hpp"

#include "relayarq/correlated.hpp"
#include "relayarq/fast_fading.hpp"
#include "relayarq/metrics.hpp"
#include "relayarq/rtd.hpp"

namespace relayarq {

EventProbabilities analytic_event_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                        const PowerAllocation& pw, InrMode inr_mode) {
    if (ch.fading == FadingMode::FastFading) return ff_event_probs(ch, cfg, pw);
    if (ch.delta > 0.0)
        return corr_rtd_event_probs(CorrelatedChannel::from_params(ch), cfg, pw);
    if (cfg.protocol == Protocol::Rtd) return rtd_event_probs(ch, cfg, pw);
    return inr_event_probs(ch, cfg, pw, inr_mode);
}

Metrics analytic_metrics(const ChannelParams& ch, const ProtocolConfig& cfg,
                         const PowerAllocation& pw, InrMode inr_mode) {
    return assemble_metrics(analytic_event_probs(ch, cfg, pw, inr_mode), cfg, pw);
}

std::string engine_name(const ChannelParams& ch, const ProtocolConfig& cfg,
                        InrMode inr_mode) {
    if (ch.fading == FadingMode::FastFading)
        return cfg.protocol == Protocol::Rtd ? "rtd_fast_fading" : "inr_fast_fading";
    if (ch.delta > 0.0) return "rtd_correlated";
    if (cfg.protocol == Protocol::Rtd) return "rtd_closed_form";
    return std::string("inr_") + inr_mode_name(inr_mode);
}

}  // namespace relayarq
