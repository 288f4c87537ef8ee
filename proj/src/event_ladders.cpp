#include "relayarq/event_ladders.hpp"

#include <algorithm>
#include <cmath>

namespace relayarq {

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

EventProbabilities assemble_event_probs(int m_max, const FailureLadders& ladders) {
    const int rounds = m_max + 1;
    const auto& fr = ladders.relay_fail;
    const auto& fd = ladders.dest_src_fail;

    // Destination failure table with relay takeover at j; entry (j,j) is the
    // source-only value. Evaluated lazily so dead-relay configs never pay for it.
    std::vector<std::vector<double>> fdr(rounds + 1,
                                         std::vector<double>(rounds + 1, std::nan("")));
    auto dest_fail = [&](int j, int m) {
        if (m <= j) return fd[j];
        double& slot = fdr[j][m];
        if (std::isnan(slot)) {
            slot = clamp01(ladders.dest_relay_fail(j, m));
            // A longer relay prefix can only help; enforce ladder monotonicity
            // against roundoff (and against non-monotone bound substitutions).
            const double prev = m - 1 <= j ? fd[j] : fdr[j][m - 1];
            if (!std::isnan(prev)) slot = std::min(slot, prev);
        }
        return slot;
    };

    EventProbabilities ev;
    ev.a.assign(rounds, 0.0);
    ev.s.assign(rounds, 0.0);

    std::vector<double> omega(rounds + 1, 0.0);  // relay decodes at j, not before
    for (int j = 1; j <= rounds; ++j) omega[j] = std::max(0.0, fr[j - 1] - fr[j]);

    for (int m = 1; m <= rounds; ++m) {
        const double beta = std::max(0.0, fd[m - 1] - fd[m]) * fr[m - 1];
        if (m <= m_max) {
            const double alpha = omega[m] * fd[m];
            ev.s[m - 1] = alpha + beta;
        }
        double a = beta;
        for (int j = 1; j < m; ++j) {
            if (omega[j] <= 0.0) continue;
            const double theta = std::max(0.0, dest_fail(j, m - 1) - dest_fail(j, m));
            const double eps = omega[j] * theta;
            a += eps;
            if (m <= m_max && eps > 0.0) ev.b[{j, m}] = eps;
        }
        ev.a[m - 1] = clamp01(a);
    }
    ev.s[rounds - 1] = clamp01(fd[m_max] * fr[m_max]);

    // Relay active through the final round: it decoded at n and the
    // destination was still failing at the end of round M.
    for (int n = 1; n <= m_max; ++n) {
        if (omega[n] <= 0.0) continue;
        const double p = omega[n] * dest_fail(n, m_max);
        if (p > 0.0) ev.b[{n, rounds}] = p;
    }
    return ev;
}

}  // namespace relayarq
