#include <cmath>
#include <random>

#include "doctest.h"
#include "relayarq/types.hpp"

using namespace relayarq;

TEST_CASE("rates_from_lengths basics") {
    CHECK(rates_from_lengths(1.0, {1.0, 1.0}) == std::vector<double>{1.0, 0.5});
    CHECK(rates_from_lengths(2.0, {1.0}) == std::vector<double>{2.0});
    CHECK(rates_from_lengths(1.0, {2.0, 3.0}) == std::vector<double>{0.5, 0.2});
    CHECK_THROWS_AS(rates_from_lengths(1.0, {1.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(rates_from_lengths(0.0, {1.0}), ConfigError);
}

TEST_CASE("rates/lengths round trip") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> len(0.1, 5.0), qd(0.5, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double q = qd(rng);
        std::vector<double> lengths;
        const int n = 1 + static_cast<int>(rng() % 5);
        for (int i = 0; i < n; ++i) lengths.push_back(len(rng));
        const auto rates = rates_from_lengths(q, lengths);
        const auto back = lengths_from_rates(q, rates);
        REQUIRE(back.size() == lengths.size());
        for (std::size_t i = 0; i < lengths.size(); ++i)
            CHECK(back[i] == doctest::Approx(lengths[i]).epsilon(1e-12));
        for (std::size_t i = 1; i < rates.size(); ++i) CHECK(rates[i] < rates[i - 1]);
    }
}

TEST_CASE("fixed-length ladder is exactly R/m") {
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Inr, 3, 1.3);
    for (int m = 1; m <= 4; ++m) CHECK(cfg.rates[m - 1] * m == doctest::Approx(1.3).epsilon(1e-15));
    CHECK(cfg.inv_rate(0) == 0.0);
    CHECK(cfg.weight(1) == doctest::Approx(1.0 / 1.3));
    CHECK(cfg.weight(3) == doctest::Approx(1.0 / 1.3));
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("protocol validation") {
    CHECK_THROWS_AS(ProtocolConfig::variable_length(Protocol::Inr, {1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(ProtocolConfig::variable_length(Protocol::Inr, {1.0, -0.5}), ConfigError);
    CHECK_THROWS_AS(ProtocolConfig::variable_length(Protocol::Rtd, {1.0, 0.6}), ConfigError);
    CHECK_NOTHROW(ProtocolConfig::variable_length(Protocol::Inr, {1.0, 0.6, 0.3}).validate());
    CHECK_THROWS_AS(ProtocolConfig::fixed_length(Protocol::Rtd, -1, 1.0), ConfigError);
}

TEST_CASE("channel and power validation") {
    ChannelParams ch;
    ch.lambda_sd = 0.0;
    CHECK_THROWS_AS(ch.validate(), ConfigError);
    ch = ChannelParams{};
    ch.delta = 0.5;
    ch.lambda_sr = 2.0;  // correlated model needs a shared rate
    CHECK_THROWS_AS(ch.validate(), ConfigError);
    ch.lambda_sr = ch.lambda_sd;
    CHECK_NOTHROW(ch.validate());
    ch.fading = FadingMode::FastFading;
    CHECK_THROWS_AS(ch.validate(), ConfigError);

    PowerAllocation pw = PowerAllocation::uniform(2, 1.0);
    CHECK_NOTHROW(pw.validate(2));
    pw.p_source[0] = 0.0;
    CHECK_THROWS_AS(pw.validate(2), ConfigError);
    pw = PowerAllocation::uniform(2, -1.0);
    CHECK_THROWS_AS(pw.validate(2), ConfigError);
}

TEST_CASE("event bundle validation") {
    EventProbabilities ev;
    ev.a = {0.4, 0.3};
    ev.s = {0.6, 0.4};
    ev.b[{1, 2}] = 0.2;
    CHECK_NOTHROW(ev.validate());
    CHECK(ev.success_total() == doctest::Approx(0.7));
    ev.s = {0.5, 0.4};
    CHECK_THROWS_AS(ev.validate(), ConfigError);  // sum != 1
    ev.s = {0.6, 0.4};
    ev.b[{2, 2}] = 0.1;
    CHECK_THROWS_AS(ev.validate(), ConfigError);  // bad index
}

TEST_CASE("M=0 is legal with empty relay map") {
    const auto cfg = ProtocolConfig::fixed_length(Protocol::Rtd, 0, 1.0);
    CHECK(cfg.rounds() == 1);
    EventProbabilities ev;
    ev.a = {0.9};
    ev.s = {1.0};
    CHECK_NOTHROW(ev.validate());
}
