#include "relayarq/rtd.hpp"

#include <algorithm>
#include <cmath>

#include "relayarq/event_ladders.hpp"
#include "relayarq/special_functions.hpp"

namespace relayarq {

namespace {

void check_inputs(const ChannelParams& ch, const ProtocolConfig& cfg,
                  const PowerAllocation& pw) {
    ch.validate();
    cfg.validate();
    pw.validate(cfg.rounds());
    if (cfg.protocol != Protocol::Rtd)
        throw ConfigError("rtd: protocol must be RTD");
    if (ch.fading != FadingMode::QuasiStatic)
        throw ConfigError("rtd: quasi-static fading only (see the fast-fading engine)");
    if (ch.delta != 0.0)
        throw ConfigError("rtd: independent fading only (see the correlated engine)");
    for (int m = 1; m <= cfg.m_max; ++m)
        if (pw.source_cumsum(m) <= 0.0)
            throw ConfigError("rtd: zero cumulative source power before the last round");
}

FailureLadders rtd_ladders(const ChannelParams& ch, const ProtocolConfig& cfg,
                           const PowerAllocation& pw) {
    const int rounds = cfg.rounds();
    const double thr = std::expm1(cfg.rates[0]);  // e^R - 1
    FailureLadders lad;
    lad.relay_fail.resize(rounds + 1);
    lad.dest_src_fail.resize(rounds + 1);
    for (int m = 0; m <= rounds; ++m) {
        const double ps = pw.source_cumsum(m);
        lad.relay_fail[m] = 1.0 - sf::exp_survival(ch.lambda_sr, thr, ps);
        lad.dest_src_fail[m] = 1.0 - sf::exp_survival(ch.lambda_sd, thr, ps);
    }
    lad.dest_relay_fail = [&ch, &pw, thr](int j, int m) {
        return sf::exp_mrc_fail_prob(ch.lambda_sd, pw.source_cumsum(j), ch.lambda_rd,
                                     pw.relay_sum(j + 1, m), thr);
    };
    return lad;
}

}  // namespace

double rtd_g_function(const ChannelParams& ch, double source_cumsum, double r1, double x) {
    return sf::exp_mrc_fail_prob(ch.lambda_sd, source_cumsum, ch.lambda_rd, x,
                                 std::expm1(r1));
}

RtdTerms rtd_terms(const ChannelParams& ch, const ProtocolConfig& cfg,
                   const PowerAllocation& pw) {
    check_inputs(ch, cfg, pw);
    const int m_max = cfg.m_max;
    const FailureLadders lad = rtd_ladders(ch, cfg, pw);
    const auto& fr = lad.relay_fail;
    const auto& fd = lad.dest_src_fail;

    RtdTerms t;
    t.alpha.resize(m_max);
    t.beta.resize(m_max + 1);
    t.omega.resize(m_max);
    t.rho.resize(m_max);
    for (int m = 1; m <= m_max; ++m) {
        t.omega[m - 1] = std::max(0.0, fr[m - 1] - fr[m]);
        t.alpha[m - 1] = t.omega[m - 1] * fd[m];
        t.rho[m - 1] = lad.dest_relay_fail(m, m_max);
    }
    for (int m = 1; m <= m_max + 1; ++m)
        t.beta[m - 1] = std::max(0.0, fd[m - 1] - fd[m]) * fr[m - 1];
    t.gamma = fd[m_max] * fr[m_max];
    for (int j = 1; j <= m_max; ++j)
        for (int m = j + 1; m <= m_max + 1; ++m) {
            const double hi = m - 1 == j ? fd[j] : lad.dest_relay_fail(j, m - 1);
            t.theta[{j, m}] = std::max(0.0, hi - lad.dest_relay_fail(j, m));
        }
    return t;
}

EventProbabilities rtd_event_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                   const PowerAllocation& pw) {
    check_inputs(ch, cfg, pw);
    return assemble_event_probs(cfg.m_max, rtd_ladders(ch, cfg, pw));
}

std::vector<double> rtd_stop_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                   const PowerAllocation& pw) {
    return rtd_event_probs(ch, cfg, pw).s;
}

std::vector<double> rtd_success_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                      const PowerAllocation& pw) {
    return rtd_event_probs(ch, cfg, pw).a;
}

std::map<std::pair<int, int>, double> rtd_relay_active_probs(const ChannelParams& ch,
                                                             const ProtocolConfig& cfg,
                                                             const PowerAllocation& pw) {
    return rtd_event_probs(ch, cfg, pw).b;
}

}  // namespace relayarq
