#include "relayarq/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace relayarq {

double outage(const EventProbabilities& ev) {
    return std::clamp(1.0 - ev.success_total(), 0.0, 1.0);
}

double throughput(const EventProbabilities& ev, const ProtocolConfig& cfg) {
    const int rounds = cfg.rounds();
    double num = 0.0, den = 0.0;
    for (int m = 1; m <= rounds; ++m) {
        num += ev.a[m - 1];
        den += ev.a[m - 1] * cfg.inv_rate(m);
    }
    den += (1.0 - num) * cfg.inv_rate(rounds);
    if (den <= 0.0) return 0.0;
    return num / den;
}

double phi_source(const EventProbabilities& ev, const ProtocolConfig& cfg,
                  const PowerAllocation& pw) {
    const int rounds = cfg.rounds();
    double num = 0.0, den = 0.0;
    for (int m = 1; m <= rounds; ++m) {
        double energy = 0.0;  // sum_{i<=m} P^s_i w_i, source energy in units of Q
        for (int i = 1; i <= m; ++i) energy += pw.p_source[i - 1] * cfg.weight(i);
        num += energy * ev.s[m - 1];
        den += ev.s[m - 1] * cfg.inv_rate(m);
    }
    if (den <= 0.0) throw ConfigError("phi_source: sum Pr(S_m) is zero (degenerate input)");
    return num / den;
}

PhiRelay phi_relay(const EventProbabilities& ev, const ProtocolConfig& cfg,
                   const PowerAllocation& pw) {
    double num = 0.0, den = 0.0;
    for (const auto& [nm, p] : ev.b) {
        const auto [n, m] = nm;
        double energy = 0.0;
        for (int i = n + 1; i <= m; ++i) energy += pw.p_relay[i - 1] * cfg.weight(i);
        num += energy * p;
        den += p * (cfg.inv_rate(m) - cfg.inv_rate(n));
    }
    if (den <= 0.0) return {0.0, false};
    return {num / den, true};
}

double phi_total(const EventProbabilities& ev, const ProtocolConfig& cfg,
                 const PowerAllocation& pw) {
    const int rounds = cfg.rounds();
    double energy = 0.0;
    for (int m = 1; m <= rounds; ++m) {
        double src = 0.0;
        for (int i = 1; i <= m; ++i) src += pw.p_source[i - 1] * cfg.weight(i);
        energy += src * ev.s[m - 1];
    }
    for (const auto& [nm, p] : ev.b) {
        const auto [n, m] = nm;
        double rel = 0.0;
        for (int i = n + 1; i <= m; ++i) rel += pw.p_relay[i - 1] * cfg.weight(i);
        energy += rel * p;
    }
    double uses = 0.0, succ = 0.0;
    for (int m = 1; m <= rounds; ++m) {
        succ += ev.a[m - 1];
        uses += ev.a[m - 1] * cfg.inv_rate(m);
    }
    uses += (1.0 - succ) * cfg.inv_rate(rounds);
    if (uses <= 0.0) return 0.0;
    return energy / uses;
}

Metrics assemble_metrics(const EventProbabilities& ev, const ProtocolConfig& cfg,
                         const PowerAllocation& pw) {
    Metrics m;
    m.outage = outage(ev);
    m.throughput = throughput(ev, cfg);
    m.phi_s = phi_source(ev, cfg, pw);
    const PhiRelay pr = phi_relay(ev, cfg, pw);
    m.phi_r = pr.value;
    m.relay_ever_active = pr.relay_ever_active;
    m.phi_total = phi_total(ev, cfg, pw);
    return m;
}

}  // namespace relayarq
