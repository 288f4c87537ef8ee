#pragma once

#include "relayarq/types.hpp"

namespace relayarq {

/// Pr(Outage) = 1 - sum_m Pr(A_m), clamped to [0,1].
double outage(const EventProbabilities& ev);

/// Long-run throughput in npcu (ratio of expected decoded nats to expected
/// channel uses, both per packet and normalized by Q).
double throughput(const EventProbabilities& ev, const ProtocolConfig& cfg);

/// Average source transmission power over source-active channel uses.
double phi_source(const EventProbabilities& ev, const ProtocolConfig& cfg,
                  const PowerAllocation& pw);

struct PhiRelay {
    double value = 0.0;
    bool relay_ever_active = false;  // false: relay never transmits, value pinned to 0
};

/// Average relay transmission power over relay-active channel uses.
PhiRelay phi_relay(const EventProbabilities& ev, const ProtocolConfig& cfg,
                   const PowerAllocation& pw);

/// Average total power over all channel uses; equals
/// (E{Xi_s} + E{Xi_r}) / E{T_total}.
double phi_total(const EventProbabilities& ev, const ProtocolConfig& cfg,
                 const PowerAllocation& pw);

/// All five metrics in one pass.
Metrics assemble_metrics(const EventProbabilities& ev, const ProtocolConfig& cfg,
                         const PowerAllocation& pw);

}  // namespace relayarq
