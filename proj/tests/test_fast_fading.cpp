#include <cmath>
#include <random>

#include "doctest.h"
#include "relayarq/engine.hpp"
#include "relayarq/fast_fading.hpp"
#include "relayarq/metrics.hpp"
#include "relayarq/monte_carlo.hpp"

using namespace relayarq;

namespace {

ChannelParams ff_channel(double lsr = 0.5, double lsd = 1.0, double lrd = 0.5) {
    return {lsr, lsd, lrd, 0.0, FadingMode::FastFading};
}

PowerAllocation powers(std::vector<double> src, std::vector<double> rel) {
    PowerAllocation pw;
    pw.p_source = std::move(src);
    pw.p_relay = std::move(rel);
    return pw;
}

// Small independent MC oracle for one CDF value (std::mt19937, not Philox).
double mc_mrc_cdf(const ChannelParams& ch, const PowerAllocation& pw, int j, int m,
                  double r, int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::exponential_distribution<double> esd(ch.lambda_sd), erd(ch.lambda_rd);
    const double thr = std::expm1(r);
    int hits = 0;
    for (int it = 0; it < n; ++it) {
        double acc = 0.0;
        for (int i = 1; i <= j; ++i) acc += pw.p_source[i - 1] * esd(rng);
        for (int i = j + 1; i <= m; ++i) acc += pw.p_relay[i - 1] * erd(rng);
        if (acc <= thr) ++hits;
    }
    return static_cast<double>(hits) / n;
}

double mc_sumlog_cdf(const ChannelParams& ch, const PowerAllocation& pw, int j, int m,
                     double r, int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::exponential_distribution<double> esd(ch.lambda_sd), erd(ch.lambda_rd);
    int hits = 0;
    for (int it = 0; it < n; ++it) {
        double acc = 0.0;
        for (int i = 1; i <= j; ++i) acc += std::log1p(pw.p_source[i - 1] * esd(rng));
        for (int i = j + 1; i <= m; ++i) acc += std::log1p(pw.p_relay[i - 1] * erd(rng));
        if (acc <= r) ++hits;
    }
    return static_cast<double>(hits) / n;
}

}  // namespace

TEST_CASE("ff_mrc_cdf single round and degenerate threshold") {
    const auto ch = ff_channel(0.5, 1.0, 0.5);
    const auto pw = powers({1.0}, {0.0});
    CHECK(ff_mrc_cdf(ch, pw, 1, 1, std::log(2.0)) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(ff_mrc_cdf(ch, pw, 1, 1, 0.0) == 0.0);
}

TEST_CASE("ff_mrc_cdf equals the Erlang CDF for equal scales") {
    const auto ch = ff_channel(0.5, 1.0, 1.0);
    for (int m : {2, 3}) {
        const auto pw = powers(std::vector<double>(m, 2.0), std::vector<double>(m, 0.0));
        const double r = 1.1;
        const double got = ff_mrc_cdf(ch, pw, m, m, r);
        const double y = std::expm1(r) / (2.0 / ch.lambda_sd);
        double tail = 1.0, term = 1.0;
        for (int k = 1; k < m; ++k) {
            term *= y / k;
            tail += term;
        }
        const double erlang = 1.0 - std::exp(-y) * tail;
        CHECK(got == doctest::Approx(erlang).epsilon(1e-8));
    }
}

TEST_CASE("ff_mrc_cdf partial fractions vs the convolution fallback") {
    const auto ch = ff_channel();
    // near-collision triggers the fallback; a slightly separated instance
    // stays on partial fractions; both must agree with the MC oracle
    const auto pw_distinct = powers({1.0, 2.5}, {0.0, 4.0});
    const auto pw_collide = powers({2.0, 2.0 * (1.0 + 5e-10)}, {0.0, 4.0});
    for (const auto& pw : {pw_distinct, pw_collide}) {
        const double got = ff_mrc_cdf(ch, pw, 2, 2, 0.9);
        const double mc = mc_mrc_cdf(ch, pw, 2, 2, 0.9, 400000, 99);
        const double se = std::sqrt(got * (1.0 - got) / 400000.0);
        CHECK(std::abs(got - mc) < 3.0 * se + 1e-9);
    }
    // three rounds, mixed links
    const auto pw3 = powers({1.0, 3.0, 0.0}, {0.0, 0.0, 2.0});
    const double got = ff_mrc_cdf(ch, pw3, 2, 3, 1.2);
    const double mc = mc_mrc_cdf(ch, pw3, 2, 3, 1.2, 400000, 7);
    CHECK(std::abs(got - mc) < 3.0 * std::sqrt(got * (1 - got) / 400000.0) + 1e-9);
}

TEST_CASE("ff_sumlog_cdf basics and MC agreement") {
    const auto ch = ff_channel(0.5, 1.0, 0.5);
    const auto pw1 = powers({1.0}, {0.0});
    CHECK(ff_sumlog_cdf(ch, pw1, 1, 1, 1.0) ==
          doctest::Approx(1.0 - std::exp(-std::expm1(1.0))).epsilon(1e-12));
    const auto pw2 = powers({1.0, 1.0}, {0.0, 0.0});
    CHECK(ff_sumlog_cdf(ch, pw2, 2, 2, 60.0) == doctest::Approx(1.0).epsilon(1e-6));
    const double got = ff_sumlog_cdf(ch, pw2, 2, 2, 1.0);
    const double mc = mc_sumlog_cdf(ch, pw2, 2, 2, 1.0, 400000, 31);
    CHECK(std::abs(got - mc) < 3.0 * std::sqrt(got * (1 - got) / 400000.0) + 1e-6);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> pd(0.3, 6.0), rd(0.4, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto pw = powers({pd(rng), pd(rng), pd(rng)}, {0.0, pd(rng), pd(rng)});
        const int j = 1 + static_cast<int>(rng() % 2);
        const double r = rd(rng);
        const double v = ff_sumlog_cdf(ch, pw, j, 3, r);
        const double est = mc_sumlog_cdf(ch, pw, j, 3, r, 200000, 100 + trial);
        const double se = std::sqrt(std::max(v * (1 - v), 1e-9) / 200000.0);
        CHECK(std::abs(v - est) < 3.0 * se + 2e-6);
    }
}

TEST_CASE("CDF orientation: nondecreasing from 0 to 1") {
    const auto ch = ff_channel();
    const auto pw = powers({2.0, 1.0, 4.0}, {0.0, 3.0, 2.0});
    double prev = -1.0;
    for (double r = 0.0; r <= 8.0; r += 0.5) {
        const double v = ff_mrc_cdf(ch, pw, 1, 3, r);
        CHECK(v >= prev - 1e-12);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
    CHECK(ff_mrc_cdf(ch, pw, 1, 3, 0.0) == 0.0);
    CHECK(ff_mrc_cdf(ch, pw, 1, 3, 25.0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("ff_event_probs structure") {
    const auto ch = ff_channel();
    ChannelParams qs = ch;
    qs.fading = FadingMode::QuasiStatic;
    // one round: one draw, identical to quasi-static
    const auto cfg0 = ProtocolConfig::fixed_length(Protocol::Rtd, 0, 0.5);
    const auto pw0 = PowerAllocation::uniform(1, 3.0);
    CHECK(ff_event_probs(ch, cfg0, pw0).a[0] ==
          doctest::Approx(analytic_event_probs(qs, cfg0, pw0).a[0]).epsilon(1e-12));

    const auto cfg = ProtocolConfig::fixed_length(Protocol::Inr, 2, 0.8);
    const auto pw = PowerAllocation::uniform(3, 2.0);
    const auto ev = ff_event_probs(ch, cfg, pw);
    double sum_s = 0.0;
    for (double v : ev.s) sum_s += v;
    CHECK(sum_s == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_NOTHROW(ev.validate());

    CHECK_THROWS_AS(
        ff_event_probs(ch, ProtocolConfig::variable_length(Protocol::Inr, {1.0, 0.4}),
                       PowerAllocation::uniform(2, 1.0)),
        ConfigError);
}

TEST_CASE("fast fading beats quasi-static at moderate SNR (both protocols)") {
    for (Protocol proto : {Protocol::Rtd, Protocol::Inr}) {
        const auto cfg = ProtocolConfig::fixed_length(proto, 1, 0.5);
        for (double snr_db : {0.0, 5.0, 10.0, 15.0, 20.0}) {
            const auto pw = PowerAllocation::uniform(2, std::pow(10.0, snr_db / 10.0));
            ChannelParams ff = ff_channel(), qs = ff_channel();
            qs.fading = FadingMode::QuasiStatic;
            const double out_ff = outage(analytic_event_probs(ff, cfg, pw));
            const double out_qs = outage(analytic_event_probs(qs, cfg, pw));
            CHECK(out_ff <= out_qs + 1e-12);
        }
    }
}

TEST_CASE("ff engines match the full Monte Carlo state machine") {
    const auto ch = ff_channel();
    McConfig mc;
    mc.n_packets = 400000;
    mc.seed = 4242;
    mc.threads = 4;
    for (Protocol proto : {Protocol::Rtd, Protocol::Inr}) {
        const auto cfg = ProtocolConfig::fixed_length(proto, 2, 0.6);
        const auto pw = powers({4.0, 2.0, 6.0}, {0.0, 5.0, 3.0});
        const auto an = assemble_metrics(ff_event_probs(ch, cfg, pw), cfg, pw);
        const auto r = simulate(ch, cfg, pw, {}, mc);
        CHECK(std::abs(an.outage - r.metrics.outage) < 3.0 * r.std_errors.outage + 1e-9);
        CHECK(std::abs(an.throughput - r.metrics.throughput) <
              3.0 * r.std_errors.throughput + 1e-9);
        CHECK(std::abs(an.phi_r - r.metrics.phi_r) < 3.0 * r.std_errors.phi_r + 1e-9);
    }
}
