#pragma once

#include <complex>
#include <cstdint>

#include "relayarq/types.hpp"

namespace relayarq {

/// Philox4x32-10 counter-based generator. Each (seed, stream) pair is an
/// independent substream; the per-packet streams make parallel simulation
/// reproducible and merge-order independent.
class Philox4x32 {
public:
    Philox4x32(std::uint64_t seed, std::uint64_t stream);

    std::uint32_t next_u32();
    /// Uniform in the open interval (0,1); 53-bit resolution.
    double u01();
    /// Exponential with rate lambda; lambda = +inf yields 0 (dead link).
    double exponential(double lambda);
    /// Standard normal pair (Box-Muller).
    void normal_pair(double& z0, double& z1);
    /// Complex circularly-symmetric Gaussian with E|h|^2 = 1/lambda.
    std::complex<double> cgauss(double lambda);

    /// Antithetic mode replaces every uniform u by 1-u.
    void set_antithetic(bool on) { antithetic_ = on; }

private:
    void refill();

    std::uint32_t key0_, key1_;
    std::uint32_t ctr_[4];
    std::uint32_t out_[4];
    int idx_ = 4;
    bool antithetic_ = false;
};

/// One coherence block of channel coefficients. Under the correlated model
/// h_sd = delta h_sr + sqrt(1-delta^2) varsigma with a shared rate parameter.
struct FadingSample {
    std::complex<double> h_sr, h_sd, h_rd;
    double g_sr() const { return std::norm(h_sr); }
    double g_sd() const { return std::norm(h_sd); }
    double g_rd() const { return std::norm(h_rd); }
};

FadingSample sample_fading(const ChannelParams& ch, Philox4x32& rng);

struct McConfig {
    std::uint64_t n_packets = 1000000;
    std::uint64_t seed = 0;
    bool antithetic = false;
    int threads = 1;
};

struct McResult {
    Metrics metrics;
    Metrics std_errors;  // per-metric standard errors (delta method for ratios)
    EventProbabilities event_freqs;
    std::uint64_t n_packets = 0;
};

/// Event-level simulation of the full relay-ARQ handshake. Deterministic
/// given (config, seed); the thread count does not change the result.
McResult simulate(const ChannelParams& ch, const ProtocolConfig& cfg,
                  const PowerAllocation& pw, const FeedbackNoise& fb, const McConfig& mc);

}  // namespace relayarq
