#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace relayarq {

/// Bad user-supplied configuration or arguments (CLI exit code 2).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge (CLI exit code 3).
/// Carries the best estimate obtained before giving up.
struct NumericalError : std::runtime_error {
    double best_estimate;
    explicit NumericalError(const std::string& what, double best = std::nan(""))
        : std::runtime_error(what), best_estimate(best) {}
};

/// An optimization or search problem has an empty feasible set (CLI exit code 4).
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FadingMode { QuasiStatic, FastFading };
enum class Protocol { Rtd, Inr };
enum class Coding { FixedLength, VariableLength };

/// Rayleigh-fading rate parameters of the three links. A link with
/// lambda = +inf is a dead link (gain 0 almost surely); this is how the
/// single-user baselines are expressed.
struct ChannelParams {
    double lambda_sr = 1.0;
    double lambda_sd = 1.0;
    double lambda_rd = 1.0;
    double delta = 0.0;  // spatial correlation of h_sd and h_sr, in [0,1]
    FadingMode fading = FadingMode::QuasiStatic;

    void validate() const;
};

/// ARQ protocol configuration. rates holds the equivalent data rates
/// R_(1)..R_(M+1) in nats per channel use, strictly decreasing.
struct ProtocolConfig {
    Protocol protocol = Protocol::Rtd;
    int m_max = 0;  // maximum number of retransmission rounds M
    std::vector<double> rates;
    Coding coding = Coding::FixedLength;

    int rounds() const { return m_max + 1; }

    /// Fixed-length ladder R_(m) = r1/m.
    static ProtocolConfig fixed_length(Protocol p, int m_max, double r1);
    static ProtocolConfig variable_length(Protocol p, std::vector<double> ladder);

    /// 1/R_(m); by convention 1/R_(0) = 0, so weight(1) = 1/R_(1).
    double inv_rate(int m) const;

    /// w_i = 1/R_(i) - 1/R_(i-1) = l_i/Q, the round-i length in units of Q.
    double weight(int i) const;

    void validate() const;
};

/// Per-round transmit powers (linear scale, unit noise variance).
/// p_relay[0] is never consumed: the relay can transmit from round 2 on.
struct PowerAllocation {
    std::vector<double> p_source;
    std::vector<double> p_relay;

    static PowerAllocation uniform(int rounds, double p);

    /// sum_{i=1}^{m} P^s_i with the empty sum (m=0) equal to 0.
    double source_cumsum(int m) const;
    /// sum_{i=a}^{b} P^r_i, empty when a > b.
    double relay_sum(int a, int b) const;

    void validate(int rounds) const;
};

/// The protocol/fading-specific layer: Pr(A_m), Pr(S_m), Pr(B_{n,m}).
/// Vectors are 0-indexed over rounds m = 1..M+1; b maps (n,m), 1<=n<m<=M+1.
struct EventProbabilities {
    std::vector<double> a;
    std::vector<double> s;
    std::map<std::pair<int, int>, double> b;

    double success_total() const;
    void validate() const;
};

struct Metrics {
    double throughput = 0.0;  // npcu
    double outage = 0.0;
    double phi_s = 0.0;
    double phi_r = 0.0;
    double phi_total = 0.0;
    bool relay_ever_active = false;  // false: phi_r is defined-as-zero
};

/// Feedback bit error probabilities of the destination->source,
/// destination->relay and relay->source links.
struct FeedbackNoise {
    double p_sd = 0.0;
    double p_rd = 0.0;
    double p_sr = 0.0;

    bool any() const { return p_sd > 0.0 || p_rd > 0.0 || p_sr > 0.0; }
    void validate() const;
};

/// R_(m) = q / sum_{n<=m} lengths[n].
std::vector<double> rates_from_lengths(double q, const std::vector<double>& lengths);

/// Inverse of rates_from_lengths: l_i = q (1/R_(i) - 1/R_(i-1)).
std::vector<double> lengths_from_rates(double q, const std::vector<double>& rates);

}  // namespace relayarq
