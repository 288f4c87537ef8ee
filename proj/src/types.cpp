#include "relayarq/types.hpp"

#include <algorithm>
#include <cmath>

namespace relayarq {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

}  // namespace

void ChannelParams::validate() const {
    require(lambda_sr > 0.0 && lambda_sd > 0.0 && lambda_rd > 0.0,
            "channel: all fading rate parameters must be > 0");
    require(!std::isnan(lambda_sr) && !std::isnan(lambda_sd) && !std::isnan(lambda_rd),
            "channel: lambda is NaN");
    require(delta >= 0.0 && delta <= 1.0, "channel: delta must be in [0,1]");
    if (delta > 0.0) {
        require(fading == FadingMode::QuasiStatic,
                "channel: correlated fading is modeled only for the quasi-static case");
        require(std::isfinite(lambda_sr) && lambda_sr == lambda_sd,
                "channel: the correlated model shares one rate parameter, "
                "lambda_sr must equal lambda_sd");
    }
}

ProtocolConfig ProtocolConfig::fixed_length(Protocol p, int m_max, double r1) {
    require(m_max >= 0, "protocol: m_max must be >= 0");
    require(r1 > 0.0, "protocol: initial rate must be > 0");
    ProtocolConfig cfg;
    cfg.protocol = p;
    cfg.m_max = m_max;
    cfg.coding = Coding::FixedLength;
    cfg.rates.resize(m_max + 1);
    for (int m = 1; m <= m_max + 1; ++m) cfg.rates[m - 1] = r1 / m;
    return cfg;
}

ProtocolConfig ProtocolConfig::variable_length(Protocol p, std::vector<double> ladder) {
    ProtocolConfig cfg;
    cfg.protocol = p;
    cfg.m_max = static_cast<int>(ladder.size()) - 1;
    cfg.coding = Coding::VariableLength;
    cfg.rates = std::move(ladder);
    cfg.validate();
    return cfg;
}

double ProtocolConfig::inv_rate(int m) const {
    if (m == 0) return 0.0;
    return 1.0 / rates.at(m - 1);
}

double ProtocolConfig::weight(int i) const {
    return inv_rate(i) - inv_rate(i - 1);
}

void ProtocolConfig::validate() const {
    require(m_max >= 0, "protocol: m_max must be >= 0");
    require(static_cast<int>(rates.size()) == m_max + 1,
            "protocol: rates must have M+1 entries");
    for (int i = 0; i < static_cast<int>(rates.size()); ++i) {
        require(rates[i] > 0.0, "protocol: rates must be > 0");
        if (i > 0)
            require(rates[i] < rates[i - 1], "protocol: rates must be strictly decreasing");
    }
    if (coding == Coding::FixedLength) {
        for (int m = 1; m <= m_max + 1; ++m)
            require(std::abs(rates[m - 1] * m - rates[0]) <= 1e-9 * rates[0],
                    "protocol: fixed-length coding requires R_(m) = R_(1)/m");
    }
    if (protocol == Protocol::Rtd)
        require(coding == Coding::FixedLength,
                "protocol: RTD repeats one codeword, so it is fixed-length");
}

PowerAllocation PowerAllocation::uniform(int rounds, double p) {
    PowerAllocation pw;
    pw.p_source.assign(rounds, p);
    pw.p_relay.assign(rounds, p);
    return pw;
}

double PowerAllocation::source_cumsum(int m) const {
    double s = 0.0;
    for (int i = 0; i < m && i < static_cast<int>(p_source.size()); ++i) s += p_source[i];
    return s;
}

double PowerAllocation::relay_sum(int a, int b) const {
    double s = 0.0;
    for (int i = a; i <= b; ++i)
        if (i >= 1 && i <= static_cast<int>(p_relay.size())) s += p_relay[i - 1];
    return s;
}

void PowerAllocation::validate(int rounds) const {
    require(static_cast<int>(p_source.size()) == rounds,
            "powers: p_source must have M+1 entries");
    require(static_cast<int>(p_relay.size()) == rounds,
            "powers: p_relay must have M+1 entries");
    for (double p : p_source) require(p >= 0.0 && std::isfinite(p), "powers: P^s must be >= 0");
    for (double p : p_relay) require(p >= 0.0 && std::isfinite(p), "powers: P^r must be >= 0");
    require(p_source[0] > 0.0, "powers: P^s_1 must be > 0");
}

double EventProbabilities::success_total() const {
    double t = 0.0;
    for (double x : a) t += x;
    return t;
}

void EventProbabilities::validate() const {
    require(a.size() == s.size() && !a.empty(), "events: a and s must have M+1 entries");
    auto in01 = [](double p) { return p >= -1e-12 && p <= 1.0 + 1e-9; };
    double sum_s = 0.0, sum_a = 0.0;
    for (double p : s) {
        require(in01(p), "events: Pr(S_m) outside [0,1]");
        sum_s += p;
    }
    for (double p : a) {
        require(in01(p), "events: Pr(A_m) outside [0,1]");
        sum_a += p;
    }
    const int rounds = static_cast<int>(a.size());
    for (const auto& [nm, p] : b) {
        require(nm.first >= 1 && nm.first < nm.second && nm.second <= rounds,
                "events: B_{n,m} index out of range");
        require(in01(p), "events: Pr(B_{n,m}) outside [0,1]");
    }
    require(std::abs(sum_s - 1.0) <= 1e-9, "events: sum Pr(S_m) must be 1");
    require(sum_a <= 1.0 + 1e-9, "events: sum Pr(A_m) must be <= 1");
}

void FeedbackNoise::validate() const {
    for (double p : {p_sd, p_rd, p_sr})
        require(p >= 0.0 && p <= 1.0, "feedback: bit error probabilities must be in [0,1]");
}

std::vector<double> rates_from_lengths(double q, const std::vector<double>& lengths) {
    require(q > 0.0, "rates_from_lengths: q must be > 0");
    require(!lengths.empty(), "rates_from_lengths: need at least one length");
    std::vector<double> rates(lengths.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        require(lengths[i] > 0.0, "rates_from_lengths: lengths must be > 0");
        acc += lengths[i];
        rates[i] = q / acc;
    }
    return rates;
}

std::vector<double> lengths_from_rates(double q, const std::vector<double>& rates) {
    require(q > 0.0, "lengths_from_rates: q must be > 0");
    require(!rates.empty(), "lengths_from_rates: need at least one rate");
    std::vector<double> lengths(rates.size());
    double prev_inv = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        require(rates[i] > 0.0, "lengths_from_rates: rates must be > 0");
        lengths[i] = q * (1.0 / rates[i] - prev_inv);
        prev_inv = 1.0 / rates[i];
    }
    return lengths;
}

}  // namespace relayarq
