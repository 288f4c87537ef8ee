#include "relayarq/correlated.hpp"

#include <algorithm>
#include <cmath>

#include "relayarq/special_functions.hpp"

namespace relayarq {

namespace {

double mq(double a, double b) {
    if (std::isinf(b)) return 0.0;
    if (std::isinf(a)) return 1.0;
    return sf::marcum_q(a, b);
}

double decay(double lambda, double x) { return std::isinf(x) ? 0.0 : std::exp(-lambda * x); }

}  // namespace

CorrelatedChannel CorrelatedChannel::from_params(const ChannelParams& ch) {
    ch.validate();
    if (ch.delta <= 0.0)
        throw ConfigError("correlated: delta must be > 0 (use the independent engine)");
    CorrelatedChannel cc{ch.lambda_sd, ch.lambda_rd, ch.delta};
    cc.validate();
    return cc;
}

void CorrelatedChannel::validate() const {
    if (!(lambda > 0.0) || !(lambda_rd > 0.0))
        throw ConfigError("correlated: rate parameters must be > 0");
    if (std::isinf(lambda)) throw ConfigError("correlated: shared lambda must be finite");
    if (delta < 0.0 || delta > 1.0) throw ConfigError("correlated: delta must be in [0,1]");
}

double rect_prob(const CorrelatedChannel& ch, double u, double v, double w, double z) {
    if (!(u >= 0.0) || !(w >= 0.0) || v < u || z < w)
        throw ConfigError("rect_prob: need 0 <= u <= v and 0 <= w <= z");
    if (v == u || z == w) return 0.0;
    const double lam = ch.lambda, d = ch.delta;

    if (d >= 1.0 - 1e-12) {  // fully correlated: g_sd = g_sr
        const double lo = std::max(u, w), hi = std::min(v, z);
        if (hi <= lo) return 0.0;
        return std::max(0.0, decay(lam, lo) - decay(lam, hi));
    }
    if (d == 0.0)
        return std::max(0.0, (decay(lam, u) - decay(lam, v)) *
                                 (decay(lam, w) - decay(lam, z)));

    const double q = (1.0 - d * d) / lam;
    auto sq = [&](double x) { return std::isinf(x) ? INFINITY : std::sqrt(2.0 * x / q); };
    const double su = sq(u), sv = sq(v), sw = sq(w), sz = sq(z);

    double y = 0.0;
    const double ew = decay(lam, w), ez = decay(lam, z);
    const double eu = decay(lam, u), ev = decay(lam, v);
    if (ew > 0.0) y += ew * (mq(sw * d, su) - mq(sw * d, sv));
    if (ez > 0.0) y -= ez * (mq(sz * d, su) - mq(sz * d, sv));
    if (ev > 0.0) y += ev * mq(sw, sv * d);
    if (eu > 0.0) y -= eu * mq(sw, su * d);
    if (ev > 0.0) y -= ev * mq(sz, sv * d);
    if (eu > 0.0) y += eu * mq(sz, su * d);
    if (y < -1e-8 || y > 1.0 + 1e-8)
        throw NumericalError("rect_prob: outside [0,1] beyond tolerance", y);
    return std::clamp(y, 0.0, 1.0);
}

namespace {

struct CorrContext {
    const CorrelatedChannel& ch;
    const ProtocolConfig& cfg;
    const PowerAllocation& pw;
    double thr;  // e^R - 1

    // E / sum_{i<=m} P^s_i; +inf for the empty prefix.
    double sd_bound(int m) const {
        const double s = pw.source_cumsum(m);
        return s > 0.0 ? thr / s : INFINITY;
    }
};

// Probability that the relay decoded at round j (g_sr window [E/S_j, E/S_{j-1}))
// and the destination's gain falls in the moving rectangle set by the relay
// gain x: [clamp0((E - x t_hi)/S_j), clamp0((E - x t_lo)/S_j)). With
// lower_moves = false the lower bound is pinned at 0 (the fails-through-M
// vartheta terms). Integrates over the independent g_rd ~ Exp(lambda_rd).
double takeover_integral(const CorrContext& c, int j, double t_hi, double t_lo,
                         bool lower_moves) {
    const double sj = c.pw.source_cumsum(j);
    const double w = c.sd_bound(j), z = c.sd_bound(j - 1);
    auto rect = [&](double x) {
        const double v = (c.thr - x * t_lo) / sj;
        if (v <= 0.0) return 0.0;
        const double u = lower_moves ? std::max(0.0, (c.thr - x * t_hi) / sj) : 0.0;
        if (u >= v) return 0.0;
        return rect_prob(c.ch, u, v, w, z);
    };
    if (std::isinf(c.ch.lambda_rd)) return rect(0.0);  // g_rd = 0 a.s.

    const double lam = c.ch.lambda_rd;
    auto f = [&](double x) { return lam * std::exp(-lam * x) * rect(x); };
    const double x_end = t_lo > 0.0 ? c.thr / t_lo : INFINITY;  // v reaches 0
    const double kink =
        lower_moves && t_hi > 0.0 ? std::min(c.thr / t_hi, x_end) : 0.0;  // u clamps

    double total = 0.0;
    if (std::isfinite(x_end)) {
        if (kink > 0.0) total += sf::quad_adaptive(f, 0.0, kink, 1e-8);
        total += sf::quad_adaptive(f, kink, x_end, 1e-8);
    } else if (lower_moves && t_hi > 0.0) {
        // Rectangle is constant [0, E/S_j) past the kink: closed-form tail.
        total += sf::quad_adaptive(f, 0.0, kink, 1e-8);
        total += std::exp(-lam * kink) * rect(kink);
    } else {
        total = rect(0.0);  // no relay power moves the rectangle at all
    }
    return std::clamp(total, 0.0, 1.0);
}

}  // namespace

EventProbabilities corr_rtd_event_probs(const CorrelatedChannel& ch,
                                        const ProtocolConfig& cfg,
                                        const PowerAllocation& pw) {
    ch.validate();
    cfg.validate();
    pw.validate(cfg.rounds());
    if (cfg.protocol != Protocol::Rtd)
        throw ConfigError("correlated: only the RTD protocol is instantiated");

    const int m_max = cfg.m_max;
    const int rounds = cfg.rounds();
    CorrContext c{ch, cfg, pw, std::expm1(cfg.rates[0])};

    EventProbabilities ev;
    ev.a.assign(rounds, 0.0);
    ev.s.assign(rounds, 0.0);

    std::vector<double> beta(rounds);
    for (int m = 1; m <= rounds; ++m)
        beta[m - 1] = rect_prob(ch, c.sd_bound(m), c.sd_bound(m - 1), 0.0, c.sd_bound(m - 1));
    for (int m = 1; m <= m_max; ++m) {
        const double alpha =
            rect_prob(ch, 0.0, c.sd_bound(m), c.sd_bound(m), c.sd_bound(m - 1));
        ev.s[m - 1] = alpha + beta[m - 1];
    }
    ev.s[rounds - 1] = rect_prob(ch, 0.0, c.sd_bound(m_max), 0.0, c.sd_bound(m_max));

    for (int m = 1; m <= rounds; ++m) {
        double a = beta[m - 1];
        for (int j = 1; j < m; ++j) {
            const double eps = takeover_integral(c, j, pw.relay_sum(j + 1, m),
                                                 pw.relay_sum(j + 1, m - 1), true);
            a += eps;
            if (m <= m_max && eps > 0.0) ev.b[{j, m}] = eps;
        }
        ev.a[m - 1] = std::clamp(a, 0.0, 1.0);
    }
    for (int n = 1; n <= m_max; ++n) {
        const double vartheta =
            takeover_integral(c, n, 0.0, pw.relay_sum(n + 1, m_max), false);
        if (vartheta > 0.0) ev.b[{n, rounds}] = vartheta;
    }
    return ev;
}

}  // namespace relayarq
