#include <cmath>
#include <random>

#include "doctest.h"
#include "relayarq/metrics.hpp"
#include "relayarq/monte_carlo.hpp"
#include "relayarq/rtd.hpp"

using namespace relayarq;

namespace {

ChannelParams fig3_channel() { return {0.5, 1.0, 0.5, 0.0, FadingMode::QuasiStatic}; }

}  // namespace

TEST_CASE("M=0 collapses to the single-shot link") {
    ChannelParams ch{1.0, 1.0, 1.0, 0.0, FadingMode::QuasiStatic};
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 0, std::log(2.0));
    PowerAllocation pw = PowerAllocation::uniform(1, 1.0);
    const auto ev = rtd_event_probs(ch, cfg, pw);
    CHECK(ev.s[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ev.a[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));  // e^R-1 = 1
    CHECK(ev.b.empty());
    CHECK(outage(ev) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("dead relay link reduces stop probs to the single-user ladder") {
    ChannelParams ch = fig3_channel();
    ch.lambda_sr = INFINITY;
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 2, 0.8);
    const auto pw = PowerAllocation::uniform(3, 3.0);
    const auto ev = rtd_event_probs(ch, cfg, pw);
    const double e = std::expm1(0.8);
    auto fd = [&](int m) { return 1.0 - std::exp(-ch.lambda_sd * e / (3.0 * m)); };
    CHECK(ev.s[0] == doctest::Approx(1.0 - fd(1)).epsilon(1e-12));
    CHECK(ev.s[1] == doctest::Approx(fd(1) - fd(2)).epsilon(1e-12));
    CHECK(ev.s[2] == doctest::Approx(fd(2)).epsilon(1e-12));
    CHECK(ev.b.empty());
}

TEST_CASE("zero relay power recovers source-only HARQ") {
    ChannelParams ch = fig3_channel();
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 2, 0.5);
    PowerAllocation pw = PowerAllocation::uniform(3, 2.0);
    pw.p_relay = {0.0, 0.0, 0.0};
    const auto ev = rtd_event_probs(ch, cfg, pw);
    const auto t = rtd_terms(ch, cfg, pw);
    for (int m = 1; m <= 3; ++m)
        CHECK(ev.a[m - 1] == doctest::Approx(t.beta[m - 1]).epsilon(1e-12));
}

TEST_CASE("G function continuity at the removable singularity") {
    ChannelParams ch = fig3_channel();
    const double s_cum = 4.0, r1 = 0.7;
    const double x_sing = ch.lambda_rd * s_cum / ch.lambda_sd;
    const double mid = rtd_g_function(ch, s_cum, r1, x_sing);
    const double lo = rtd_g_function(ch, s_cum, r1, x_sing * (1.0 - 1e-6));
    const double hi = rtd_g_function(ch, s_cum, r1, x_sing * (1.0 + 1e-6));
    CHECK(std::abs(lo - mid) < 1e-6);
    CHECK(std::abs(hi - mid) < 1e-6);
    CHECK(rtd_g_function(ch, s_cum, r1, 0.0) ==
          doctest::Approx(1.0 - std::exp(-ch.lambda_sd * std::expm1(r1) / s_cum)));
    CHECK(rtd_g_function(ch, s_cum, r1, 1e12) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("terms stay in [0,1] and stop probs sum to one") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> lam(0.2, 2.0), pdb(-10.0, 15.0), rate(0.2, 2.0);
    for (int trial = 0; trial < 120; ++trial) {
        const int m_max = static_cast<int>(rng() % 4);
        ChannelParams ch{lam(rng), lam(rng), lam(rng), 0.0, FadingMode::QuasiStatic};
        const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, m_max, rate(rng));
        PowerAllocation pw;
        for (int i = 0; i <= m_max; ++i) {
            pw.p_source.push_back(std::pow(10.0, pdb(rng) / 10.0));
            pw.p_relay.push_back(std::pow(10.0, pdb(rng) / 10.0));
        }
        const auto t = rtd_terms(ch, cfg, pw);
        for (int m = 1; m <= m_max; ++m) {
            CHECK(t.alpha[m - 1] >= 0.0);
            CHECK(t.beta[m - 1] >= 0.0);
            CHECK(t.alpha[m - 1] + t.beta[m - 1] <= 1.0 + 1e-12);
            CHECK(t.omega[m - 1] >= 0.0);
            CHECK(t.rho[m - 1] >= 0.0);
            CHECK(t.rho[m - 1] <= 1.0);
        }
        CHECK(t.gamma >= 0.0);
        CHECK(t.gamma <= 1.0);
        for (const auto& [jm, th] : t.theta) {
            CHECK(th >= 0.0);
            CHECK(th <= 1.0);
        }
        const auto ev = rtd_event_probs(ch, cfg, pw);
        double sum_s = 0.0;
        for (double v : ev.s) sum_s += v;
        CHECK(sum_s == doctest::Approx(1.0).epsilon(1e-9));
        CHECK_NOTHROW(ev.validate());
    }
}

TEST_CASE("outage never increases when all powers scale up") {
    ChannelParams ch = fig3_channel();
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 1, 0.5);
    PowerAllocation pw;
    pw.p_source = {2.0, 1.0};
    pw.p_relay = {0.0, 3.0};
    double prev = 1.0;
    for (double scale : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        PowerAllocation scaled = pw;
        for (auto& p : scaled.p_source) p *= scale;
        for (auto& p : scaled.p_relay) p *= scale;
        const double out = outage(rtd_event_probs(ch, cfg, scaled));
        CHECK(out <= prev + 1e-12);
        prev = out;
    }
}

TEST_CASE("closed forms match Monte Carlo event frequencies") {
    ChannelParams ch = fig3_channel();
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 1, 0.5);
    const auto pw = PowerAllocation::uniform(2, 10.0);
    const auto ev = rtd_event_probs(ch, cfg, pw);
    McConfig mc;
    mc.n_packets = 1000000;
    mc.seed = 20240801;
    mc.threads = 4;
    const McResult r = simulate(ch, cfg, pw, {}, mc);
    const double n = static_cast<double>(r.n_packets);
    for (int m = 0; m < 2; ++m) {
        const double se_s = std::sqrt(ev.s[m] * (1.0 - ev.s[m]) / n) + 1e-12;
        CHECK(std::abs(ev.s[m] - r.event_freqs.s[m]) < 3.0 * se_s);
        const double se_a = std::sqrt(ev.a[m] * (1.0 - ev.a[m]) / n) + 1e-12;
        CHECK(std::abs(ev.a[m] - r.event_freqs.a[m]) < 3.0 * se_a);
    }
    for (const auto& [nm, p] : ev.b) {
        const double freq = r.event_freqs.b.count(nm) ? r.event_freqs.b.at(nm) : 0.0;
        const double se = std::sqrt(p * (1.0 - p) / n) + 1e-12;
        CHECK(std::abs(p - freq) < 3.0 * se);
    }
    const Metrics an = assemble_metrics(ev, cfg, pw);
    CHECK(std::abs(an.outage - r.metrics.outage) < 3.0 * r.std_errors.outage + 1e-12);
}

TEST_CASE("three retransmission rounds still match Monte Carlo") {
    ChannelParams ch = fig3_channel();
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 3, 0.8);
    PowerAllocation pw;
    pw.p_source = {3.0, 1.5, 6.0, 2.0};
    pw.p_relay = {0.0, 4.0, 2.5, 8.0};
    const auto ev = rtd_event_probs(ch, cfg, pw);
    const Metrics an = assemble_metrics(ev, cfg, pw);
    McConfig mc;
    mc.n_packets = 500000;
    mc.seed = 613;
    mc.threads = 4;
    const McResult r = simulate(ch, cfg, pw, {}, mc);
    CHECK(std::abs(an.outage - r.metrics.outage) < 3.0 * r.std_errors.outage + 1e-9);
    CHECK(std::abs(an.throughput - r.metrics.throughput) <
          3.0 * r.std_errors.throughput + 1e-9);
    CHECK(std::abs(an.phi_s - r.metrics.phi_s) < 3.0 * r.std_errors.phi_s + 1e-9);
    CHECK(std::abs(an.phi_r - r.metrics.phi_r) < 3.0 * r.std_errors.phi_r + 1e-9);
    CHECK(std::abs(an.phi_total - r.metrics.phi_total) <
          3.0 * r.std_errors.phi_total + 1e-9);
}
