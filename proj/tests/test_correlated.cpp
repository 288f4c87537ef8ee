#include <cmath>
#include <random>

#include "doctest.h"
#include "relayarq/correlated.hpp"
#include "relayarq/metrics.hpp"
#include "relayarq/monte_carlo.hpp"
#include "relayarq/rtd.hpp"

using namespace relayarq;

namespace {

// Direct 2-D Simpson quadrature of the correlated joint pdf over a rectangle;
// independent of rect_prob's Marcum composition.
double rect_oracle(const CorrelatedChannel& ch, double u, double v, double w, double z) {
    const double lam = ch.lambda, d = ch.delta;
    const double c = lam * lam / (1.0 - d * d);
    auto i0 = [](long double x) {
        const long double q = 0.25L * x * x;
        long double term = 1.0L, sum = 1.0L;
        for (int k = 1; k < 400; ++k) {
            term *= q / (static_cast<long double>(k) * k);
            sum += term;
            if (term < sum * 1e-20L) break;
        }
        return static_cast<double>(sum);
    };
    auto pdf = [&](double x, double y) {
        return c * std::exp(-lam * (x + y) / (1.0 - d * d)) *
               i0(2.0 * lam * d * std::sqrt(x * y) / (1.0 - d * d));
    };
    const int n = 400;  // per axis, Simpson
    const double hx = (v - u) / n, hy = (z - w) / n;
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double wx = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double row = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double wy = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            row += wy * pdf(u + i * hx, w + k * hy);
        }
        total += wx * row;
    }
    return total * hx * hy / 9.0;
}

}  // namespace

TEST_CASE("rect_prob: independence, total mass, marginals, additivity") {
    CorrelatedChannel ind{1.3, 0.5, 0.0};
    CHECK(rect_prob(ind, 0.2, 1.0, 0.1, 2.0) ==
          doctest::Approx((std::exp(-1.3 * 0.2) - std::exp(-1.3 * 1.0)) *
                          (std::exp(-1.3 * 0.1) - std::exp(-1.3 * 2.0)))
              .epsilon(1e-12));

    CorrelatedChannel ch{1.0, 0.5, 0.5};
    CHECK(rect_prob(ch, 0.0, INFINITY, 0.0, INFINITY) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rect_prob(ch, 0.3, 1.7, 0.0, INFINITY) ==
          doctest::Approx(std::exp(-0.3) - std::exp(-1.7)).epsilon(1e-9));
    const double whole = rect_prob(ch, 0.1, 2.0, 0.2, 1.5);
    const double split = rect_prob(ch, 0.1, 0.8, 0.2, 1.5) + rect_prob(ch, 0.8, 2.0, 0.2, 1.5);
    CHECK(whole == doctest::Approx(split).epsilon(1e-9));
    CHECK_THROWS_AS(rect_prob(ch, 1.0, 0.5, 0.0, 1.0), ConfigError);
}

TEST_CASE("rect_prob matches direct 2-D quadrature of the joint pdf") {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> edge(0.0, 2.0), len(0.1, 2.0);
    for (double delta : {0.3, 0.5, 0.8}) {
        CorrelatedChannel ch{1.0, 0.5, delta};
        for (int trial = 0; trial < 4; ++trial) {
            const double u = edge(rng), w = edge(rng);
            const double v = u + len(rng), z = w + len(rng);
            CHECK(rect_prob(ch, u, v, w, z) ==
                  doctest::Approx(rect_oracle(ch, u, v, w, z)).epsilon(1e-6));
        }
    }
}

TEST_CASE("independence limit recovers the rtd module") {
    // delta -> 0 with the shared rate lambda_sr = lambda_sd = lambda
    ChannelParams ind{1.0, 1.0, 0.2, 0.0, FadingMode::QuasiStatic};
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 1, 0.5);
    PowerAllocation pw;
    pw.p_source = {4.0, 2.0};
    pw.p_relay = {0.0, 6.0};
    const auto ev_ind = rtd_event_probs(ind, cfg, pw);
    const auto ev_cor = corr_rtd_event_probs(CorrelatedChannel{1.0, 0.2, 0.0}, cfg, pw);
    for (int m = 0; m < 2; ++m) {
        CHECK(ev_cor.a[m] == doctest::Approx(ev_ind.a[m]).epsilon(1e-8));
        CHECK(ev_cor.s[m] == doctest::Approx(ev_ind.s[m]).epsilon(1e-8));
    }
    for (const auto& [nm, p] : ev_ind.b)
        CHECK(ev_cor.b.at(nm) == doctest::Approx(p).epsilon(1e-7));
}

TEST_CASE("full correlation maps to the single-user setup") {
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 1, 0.5);
    const auto pw = PowerAllocation::uniform(2, 5.0);
    const auto ev = corr_rtd_event_probs(CorrelatedChannel{1.0, 0.2, 1.0}, cfg, pw);
    // g_sr == g_sd: whenever the relay decodes the destination has too, so the
    // relay never helps; outage is the two-round single-user MRC outage.
    const double out_single = 1.0 - std::exp(-1.0 * std::expm1(0.5) / 10.0);
    CHECK(outage(ev) == doctest::Approx(out_single).epsilon(1e-6));
}

TEST_CASE("stop probabilities sum to one (correlated assembly)") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> d(0.05, 0.95), pdb(0.0, 12.0);
    for (int trial = 0; trial < 8; ++trial) {
        CorrelatedChannel ch{1.0, 0.4, d(rng)};
        const int m_max = 1 + static_cast<int>(rng() % 2);
        const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, m_max, 0.7);
        PowerAllocation pw;
        for (int i = 0; i <= m_max; ++i) {
            pw.p_source.push_back(std::pow(10.0, pdb(rng) / 10.0));
            pw.p_relay.push_back(std::pow(10.0, pdb(rng) / 10.0));
        }
        const auto ev = corr_rtd_event_probs(ch, cfg, pw);
        double sum_s = 0.0;
        for (double v : ev.s) sum_s += v;
        CHECK(sum_s == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("correlated engine matches Monte Carlo at delta=0.5") {
    ChannelParams ch{1.0, 1.0, 0.2, 0.5, FadingMode::QuasiStatic};
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 1, 0.5);
    const auto pw = PowerAllocation::uniform(2, 10.0);
    const auto ev = corr_rtd_event_probs(CorrelatedChannel::from_params(ch), cfg, pw);
    McConfig mc;
    mc.n_packets = 600000;
    mc.seed = 555;
    mc.threads = 4;
    const auto r = simulate(ch, cfg, pw, {}, mc);
    const Metrics an = assemble_metrics(ev, cfg, pw);
    CHECK(std::abs(an.outage - r.metrics.outage) < 3.0 * r.std_errors.outage + 1e-9);
    CHECK(std::abs(an.throughput - r.metrics.throughput) <
          3.0 * r.std_errors.throughput + 1e-9);
    CHECK(std::abs(an.phi_r - r.metrics.phi_r) < 3.0 * r.std_errors.phi_r + 1e-9);
}

TEST_CASE("outage is flat for practical correlation and rises near delta=1") {
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 1, 0.5);
    // Low-delta insensitivity is a low/moderate-outage-regime statement: the
    // joint low-gain tail inflates by 1/(1-delta^2) under correlation, which
    // is invisible only while outage is not tail-dominated.
    const auto pw_low = PowerAllocation::uniform(2, std::pow(10.0, -0.5));  // -5 dB
    double lo = INFINITY, hi = -INFINITY;
    for (double delta : {1e-9, 0.1, 0.2, 0.3, 0.4, 0.5}) {
        const double out = outage(corr_rtd_event_probs({1.0, 0.2, delta}, cfg, pw_low));
        lo = std::min(lo, out);
        hi = std::max(hi, out);
    }
    CHECK((hi - lo) / lo < 0.05);
    // The degradation toward full correlation shows at moderate SNR.
    const auto pw = PowerAllocation::uniform(2, std::pow(10.0, 0.5));  // 5 dB
    const double out_half = outage(corr_rtd_event_probs({1.0, 0.2, 0.5}, cfg, pw));
    const double out_full = outage(corr_rtd_event_probs({1.0, 0.2, 0.999}, cfg, pw));
    CHECK(out_full > 2.0 * out_half);
}

TEST_CASE("high correlation still matches Monte Carlo") {
    ChannelParams ch{1.0, 1.0, 0.4, 0.9, FadingMode::QuasiStatic};
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 1, 0.7);
    PowerAllocation pw;
    pw.p_source = {5.0, 2.0};
    pw.p_relay = {0.0, 8.0};
    const auto ev = corr_rtd_event_probs(CorrelatedChannel::from_params(ch), cfg, pw);
    McConfig mc;
    mc.n_packets = 500000;
    mc.seed = 614;
    mc.threads = 4;
    const auto r = simulate(ch, cfg, pw, {}, mc);
    const Metrics an = assemble_metrics(ev, cfg, pw);
    CHECK(std::abs(an.outage - r.metrics.outage) < 3.0 * r.std_errors.outage + 1e-9);
    CHECK(std::abs(an.throughput - r.metrics.throughput) <
          3.0 * r.std_errors.throughput + 1e-9);
    CHECK(std::abs(an.phi_r - r.metrics.phi_r) < 3.0 * r.std_errors.phi_r + 1e-9);
}
