#include "relayarq/inr.hpp"

#include <algorithm>
#include <cmath>

#include "relayarq/event_ladders.hpp"
#include "relayarq/special_functions.hpp"

namespace relayarq {

namespace {

// e^{-lambda x} with the conventions x=+inf -> 0 and x<=0 -> 1.
double survival_at(double lambda, double x) {
    if (x <= 0.0) return 1.0;
    if (std::isinf(lambda) || std::isinf(x)) return 0.0;
    return std::exp(-lambda * x);
}

void check_inputs(const ChannelParams& ch, const ProtocolConfig& cfg,
                  const PowerAllocation& pw) {
    ch.validate();
    cfg.validate();
    pw.validate(cfg.rounds());
    if (cfg.protocol != Protocol::Inr) throw ConfigError("inr: protocol must be INR");
    if (ch.fading != FadingMode::QuasiStatic)
        throw ConfigError("inr: quasi-static fading only (see the fast-fading engine)");
    if (ch.delta != 0.0)
        throw ConfigError("inr: only independent fading is instantiated for INR");
}

void check_mode(const ProtocolConfig& cfg, InrMode mode) {
    if ((mode == InrMode::LowerBoundT1 || mode == InrMode::UpperBoundT2) &&
        cfg.coding != Coding::FixedLength)
        throw ConfigError("inr: the Minkowski-type bounds require fixed-length coding");
}

// Accumulated weighted mutual information sum_{i<=m} w_i log(1+g P_i),
// the decode test at round m being >= 1.
double weighted_mi(const ProtocolConfig& cfg, const std::vector<double>& powers, double g,
                   int upto) {
    double acc = 0.0;
    for (int i = 1; i <= upto; ++i) acc += cfg.weight(i) * std::log1p(g * powers[i - 1]);
    return acc;
}

double geometric_mean(const std::vector<double>& p, int lo, int hi) {
    double logsum = 0.0;
    for (int i = lo; i <= hi; ++i) {
        if (p[i - 1] <= 0.0) return 0.0;
        logsum += std::log(p[i - 1]);
    }
    return std::exp(logsum / (hi - lo + 1));
}

// ---- Theorem 1: V_{j,m}(v) = lambda_sd int_0^inf e^{-lambda_sd x - lambda_rd x^{j/(j-m)} v} dx
double v_integral(const ChannelParams& ch, int j, int m, double v) {
    if (v == 0.0) return 1.0;
    if (std::isinf(v)) return 0.0;
    const double expo = static_cast<double>(j) / (j - m);  // negative
    auto f = [&](double x) {
        if (x <= 0.0) return 0.0;
        const double t = ch.lambda_sd * x + ch.lambda_rd * std::pow(x, expo) * v;
        return ch.lambda_sd * std::exp(-t);
    };
    return sf::quad_adaptive(f, 0.0, INFINITY, 1e-10);
}

double t1_ladder_fail(double lambda, double r1, const std::vector<double>& powers, int m) {
    if (m == 0) return 1.0;
    const double gm = geometric_mean(powers, 1, m);
    if (gm <= 0.0) return 1.0;
    return 1.0 - survival_at(lambda, std::expm1(r1 / m) / gm);
}

double t1_dest_relay_fail(const ChannelParams& ch, double r1, const PowerAllocation& pw,
                          int j, int m) {
    double logsum = 0.0;
    for (int i = 1; i <= j; ++i) {
        if (pw.p_source[i - 1] <= 0.0) return 1.0;
        logsum += std::log(pw.p_source[i - 1]);
    }
    for (int i = j + 1; i <= m; ++i) {
        if (pw.p_relay[i - 1] <= 0.0) return 1.0;
        logsum += std::log(pw.p_relay[i - 1]);
    }
    const double gm = std::exp(logsum / m);
    const double s = std::pow(std::expm1(r1 / m) / gm, static_cast<double>(m) / (m - j));
    return 1.0 - v_integral(ch, j, m, s);
}

// ---- Theorem 2 (valid for r >= 1 only)
double t2_r_constant(double r1, const PowerAllocation& pw, int j, int m) {
    double denom = 1.0;
    for (int i = 1; i <= j; ++i) denom *= 1.0 + pw.p_source[i - 1] * pw.p_source[i - 1];
    for (int i = j + 1; i <= m; ++i) denom *= 1.0 + pw.p_relay[i - 1] * pw.p_relay[i - 1];
    return std::exp(2.0 * r1) / denom;
}

double t2_ladder_fail(double lambda, double r1, const std::vector<double>& powers, int m) {
    if (m == 0) return 1.0;
    double prod = 1.0;
    for (int i = 1; i <= m; ++i) prod *= 1.0 + powers[i - 1] * powers[i - 1];
    const double arg = std::exp(2.0 * r1 / m) / std::pow(prod, 1.0 / m) - 1.0;
    if (arg < 0.0)
        throw ConfigError("inr: Theorem 2 requires r >= 1 (SNR too high for the bound)");
    return 1.0 - survival_at(lambda, std::sqrt(arg));
}

double t2_dest_relay_fail(const ChannelParams& ch, double r1, const PowerAllocation& pw,
                          int j, int m) {
    const double r = t2_r_constant(r1, pw, j, m);
    if (r < 1.0)
        throw ConfigError("inr: Theorem 2 requires r >= 1 (SNR too high for the bound)");
    const double upper = std::sqrt(std::pow(r, 1.0 / j) - 1.0);
    const double rr = std::pow(r, 1.0 / (m - j));
    const double expo = static_cast<double>(j) / (j - m);
    auto f = [&](double x) {
        const double arg = rr * std::pow(1.0 + x * x, expo) - 1.0;
        const double inner = arg <= 0.0 ? 0.0 : 1.0 - survival_at(ch.lambda_rd, std::sqrt(arg));
        return ch.lambda_sd * std::exp(-ch.lambda_sd * x) * inner;
    };
    return sf::quad_adaptive(f, 0.0, upper, 1e-10);
}

// ---- Exact 2-D region probability, reduced to a 1-D integral with an inner
// root solve: for fixed g_sd = x the failure set in g_rd is [0, y*(x)).
double exact2d_dest_relay_fail(const ChannelParams& ch, const ProtocolConfig& cfg,
                               const PowerAllocation& pw, const InrThresholds& th, int j,
                               int m) {
    double relay_scale = 0.0;  // sum of w_i P^r_i over the relay rounds
    for (int i = j + 1; i <= m; ++i) relay_scale += cfg.weight(i) * pw.p_relay[i - 1];
    if (relay_scale <= 0.0 || std::isinf(ch.lambda_rd))
        return 1.0 - survival_at(ch.lambda_sd, th.x_d[j]);

    const double x_max = th.x_d[j];
    auto rel_part = [&](double y) {
        double acc = 0.0;
        for (int i = j + 1; i <= m; ++i)
            acc += cfg.weight(i) * std::log1p(y * pw.p_relay[i - 1]);
        return acc;
    };
    const double hint = std::expm1(cfg.rates[m - 1]) /
                        std::max(1e-300, *std::max_element(pw.p_relay.begin() + j,
                                                           pw.p_relay.begin() + m));
    auto f = [&](double x) {
        const double deficit = 1.0 - weighted_mi(cfg, pw.p_source, x, j);
        if (deficit <= 0.0) return 0.0;
        const double ystar = sf::root_increasing(rel_part, deficit, hint);
        return ch.lambda_sd * std::exp(-ch.lambda_sd * x) *
               (1.0 - survival_at(ch.lambda_rd, ystar));
    };
    return sf::quad_adaptive(f, 0.0, x_max, 1e-8);
}

// ---- Low-SNR closed form: log(1+x) ~ x turns the region into a half-plane.
double lowsnr_dest_relay_fail(const ChannelParams& ch, const ProtocolConfig& cfg,
                              const PowerAllocation& pw, int j, int m) {
    double ss = 0.0, sr = 0.0;
    for (int i = 1; i <= j; ++i) ss += cfg.weight(i) * pw.p_source[i - 1];
    for (int i = j + 1; i <= m; ++i) sr += cfg.weight(i) * pw.p_relay[i - 1];
    return sf::exp_mrc_fail_prob(ch.lambda_sd, ss, ch.lambda_rd, sr, 1.0);
}

FailureLadders inr_ladders(const ChannelParams& ch, const ProtocolConfig& cfg,
                           const PowerAllocation& pw, const InrThresholds& th,
                           InrMode mode) {
    const int rounds = cfg.rounds();
    FailureLadders lad;
    lad.relay_fail.resize(rounds + 1);
    lad.dest_src_fail.resize(rounds + 1);
    if (mode == InrMode::LowerBoundT1) {
        for (int m = 0; m <= rounds; ++m) {
            lad.relay_fail[m] = t1_ladder_fail(ch.lambda_sr, cfg.rates[0], pw.p_source, m);
            lad.dest_src_fail[m] = t1_ladder_fail(ch.lambda_sd, cfg.rates[0], pw.p_source, m);
        }
    } else if (mode == InrMode::UpperBoundT2) {
        for (int m = 0; m <= rounds; ++m) {
            lad.relay_fail[m] = t2_ladder_fail(ch.lambda_sr, cfg.rates[0], pw.p_source, m);
            lad.dest_src_fail[m] = t2_ladder_fail(ch.lambda_sd, cfg.rates[0], pw.p_source, m);
        }
    } else {
        for (int m = 0; m <= rounds; ++m) {
            lad.relay_fail[m] = 1.0 - survival_at(ch.lambda_sr, th.x_r[m]);
            lad.dest_src_fail[m] = 1.0 - survival_at(ch.lambda_sd, th.x_d[m]);
        }
    }
    // The bound ladders need not be monotone for uneven power vectors; a
    // running min keeps the event differences nonneg (and keeps T1 an upper
    // bound, since the exact ladder is itself nonincreasing).
    for (int m = 1; m <= rounds; ++m) {
        lad.relay_fail[m] = std::min(lad.relay_fail[m], lad.relay_fail[m - 1]);
        lad.dest_src_fail[m] = std::min(lad.dest_src_fail[m], lad.dest_src_fail[m - 1]);
    }
    lad.dest_relay_fail = [&ch, &cfg, &pw, &th, mode](int j, int m) {
        switch (mode) {
            case InrMode::Exact2D:
                return exact2d_dest_relay_fail(ch, cfg, pw, th, j, m);
            case InrMode::LowSnrApprox:
                return lowsnr_dest_relay_fail(ch, cfg, pw, j, m);
            case InrMode::LowerBoundT1:
                return t1_dest_relay_fail(ch, cfg.rates[0], pw, j, m);
            case InrMode::UpperBoundT2:
                return t2_dest_relay_fail(ch, cfg.rates[0], pw, j, m);
        }
        return 1.0;
    };
    return lad;
}

}  // namespace

const char* inr_mode_name(InrMode mode) {
    switch (mode) {
        case InrMode::Exact2D: return "exact2d";
        case InrMode::LowSnrApprox: return "low_snr";
        case InrMode::LowerBoundT1: return "lower_bound_t1";
        case InrMode::UpperBoundT2: return "upper_bound_t2";
    }
    return "?";
}

double inr_rate_relay(double g_sr, const ProtocolConfig& cfg, const PowerAllocation& pw,
                      int m) {
    if (m < 1 || m > cfg.rounds()) throw ConfigError("inr_rate_relay: round out of range");
    return cfg.rates[m - 1] * weighted_mi(cfg, pw.p_source, g_sr, m);
}

double inr_rate_dest(double g_sd, double g_rd, const ProtocolConfig& cfg,
                     const PowerAllocation& pw, int j, int m) {
    if (m < 1 || m > cfg.rounds() || j < 0 || j > m)
        throw ConfigError("inr_rate_dest: rounds out of range");
    double acc = weighted_mi(cfg, pw.p_source, g_sd, j);
    for (int i = j + 1; i <= m; ++i) acc += cfg.weight(i) * std::log1p(g_rd * pw.p_relay[i - 1]);
    return cfg.rates[m - 1] * acc;
}

InrThresholds solve_thresholds(const ProtocolConfig& cfg, const PowerAllocation& pw) {
    cfg.validate();
    pw.validate(cfg.rounds());
    const int rounds = cfg.rounds();
    InrThresholds th;
    th.x_r.assign(rounds + 1, INFINITY);
    th.x_d.assign(rounds + 1, INFINITY);
    const double p1 = pw.p_source[0];
    if (p1 <= 0.0) throw NumericalError("solve_thresholds: all source powers are zero");
    double hint = std::expm1(cfg.rates[0]) / p1;
    for (int m = 1; m <= rounds; ++m) {
        auto f = [&](double x) { return weighted_mi(cfg, pw.p_source, x, m); };
        th.x_r[m] = sf::root_increasing(f, 1.0, hint);
        th.x_d[m] = th.x_r[m];  // same chain, different fading rate applied later
        hint = th.x_r[m];
    }
    return th;
}

InrSourceTerms inr_source_terms(const ChannelParams& ch, const ProtocolConfig& cfg,
                                const PowerAllocation& pw) {
    check_inputs(ch, cfg, pw);
    const InrThresholds th = solve_thresholds(cfg, pw);
    const int m_max = cfg.m_max;
    InrSourceTerms t;
    t.alpha.resize(m_max);
    t.beta.resize(m_max + 1);
    t.omega.resize(m_max);
    auto fr = [&](int m) { return 1.0 - survival_at(ch.lambda_sr, th.x_r[m]); };
    auto fd = [&](int m) { return 1.0 - survival_at(ch.lambda_sd, th.x_d[m]); };
    for (int m = 1; m <= m_max; ++m) {
        t.omega[m - 1] = std::max(0.0, fr(m - 1) - fr(m));
        t.alpha[m - 1] = t.omega[m - 1] * fd(m);
    }
    for (int m = 1; m <= m_max + 1; ++m)
        t.beta[m - 1] = std::max(0.0, fd(m - 1) - fd(m)) * fr(m - 1);
    t.gamma = fd(m_max) * fr(m_max);
    return t;
}

double inr_dest_fail_prob(const ChannelParams& ch, const ProtocolConfig& cfg,
                          const PowerAllocation& pw, int j, int m, InrMode mode) {
    check_inputs(ch, cfg, pw);
    check_mode(cfg, mode);
    const InrThresholds th = solve_thresholds(cfg, pw);
    const FailureLadders lad = inr_ladders(ch, cfg, pw, th, mode);
    if (m <= j) return lad.dest_src_fail[j];
    return lad.dest_relay_fail(j, m);
}

InrThetaRho inr_theta_rho(const ChannelParams& ch, const ProtocolConfig& cfg,
                          const PowerAllocation& pw, InrMode mode) {
    check_inputs(ch, cfg, pw);
    check_mode(cfg, mode);
    const InrThresholds th = solve_thresholds(cfg, pw);
    const FailureLadders lad = inr_ladders(ch, cfg, pw, th, mode);
    const int m_max = cfg.m_max;
    InrThetaRho tr;
    tr.rho.resize(m_max);
    for (int n = 1; n <= m_max; ++n)
        tr.rho[n - 1] = n == m_max ? lad.dest_src_fail[n] : lad.dest_relay_fail(n, m_max);
    for (int j = 1; j <= m_max; ++j) {
        double prev = lad.dest_src_fail[j];
        for (int m = j + 1; m <= m_max + 1; ++m) {
            const double cur = std::min(prev, lad.dest_relay_fail(j, m));
            tr.theta[{j, m}] = std::max(0.0, prev - cur);
            prev = cur;
        }
    }
    return tr;
}

EventProbabilities inr_event_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                   const PowerAllocation& pw, InrMode mode) {
    check_inputs(ch, cfg, pw);
    check_mode(cfg, mode);
    const InrThresholds th = solve_thresholds(cfg, pw);
    const FailureLadders lad = inr_ladders(ch, cfg, pw, th, mode);
    return assemble_event_probs(cfg.m_max, lad);
}

}  // namespace relayarq
