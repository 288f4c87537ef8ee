#pragma once

#include <functional>
#include <vector>

#include "relayarq/types.hpp"

namespace relayarq {

/// Failure-CDF ladders shared by every engine whose decode events are
/// threshold crossings of a monotone per-round accumulation:
///   relay_fail[m]    = Pr(relay cannot decode after source rounds 1..m)
///   dest_src_fail[m] = Pr(destination cannot decode after source rounds 1..m)
///   dest_relay_fail(j,m) = Pr(destination cannot decode after source rounds
///                            1..j and relay rounds j+1..m), j < m
/// Index 0 entries are 1 (nothing received). Vectors run m = 0..M+1.
struct FailureLadders {
    std::vector<double> relay_fail;
    std::vector<double> dest_src_fail;
    std::function<double(int j, int m)> dest_relay_fail;
};

/// Assembles Pr(A_m), Pr(S_m), Pr(B_{n,m}) from the ladders exactly as the
/// quasi-static RTD event structure does; every engine (RTD, INR, fast
/// fading) differs only in how the ladders are computed.
EventProbabilities assemble_event_probs(int m_max, const FailureLadders& ladders);

}  // namespace relayarq
