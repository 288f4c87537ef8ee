#include "relayarq/fast_fading.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "relayarq/event_ladders.hpp"
#include "relayarq/special_functions.hpp"

namespace relayarq {

namespace {

// Trapezoid-rule convolution of two pdfs sampled on the same uniform grid.
std::vector<double> convolve_grid(const std::vector<double>& a, const std::vector<double>& b,
                                  double h) {
    const std::size_t n = a.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        double s = 0.5 * (a[0] * b[k] + a[k] * b[0]);
        for (std::size_t i = 1; i < k; ++i) s += a[i] * b[k - i];
        out[k] = s * h;
    }
    return out;
}

double trapz(const std::vector<double>& f, double h) {
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

// CDF at x of the sum of pdfs sampled by `sample(i, t)`, i = 0..n_parts-1,
// refined with Richardson extrapolation until successive grids agree.
double convolved_cdf(int n_parts, const std::function<double(int, double)>& sample, double x,
                     double tol) {
    double prev = -1.0;
    for (int n = 512; n <= (1 << 16); n *= 2) {
        const double h = x / n;
        std::vector<double> pdf(n + 1);
        for (int i = 0; i <= n; ++i) pdf[i] = sample(0, i * h);
        for (int part = 1; part < n_parts; ++part) {
            std::vector<double> next(n + 1);
            for (int i = 0; i <= n; ++i) next[i] = sample(part, i * h);
            pdf = convolve_grid(pdf, next, h);
        }
        const double cur = trapz(pdf, h);
        if (prev >= 0.0 && std::abs(cur - prev) < tol)
            return std::clamp((4.0 * cur - prev) / 3.0, 0.0, 1.0);
        prev = cur;
    }
    throw NumericalError("fast_fading: convolution grid did not converge", prev);
}

// Erlang(k, scale) CDF: regularized lower incomplete gamma at integer shape.
double erlang_cdf(int k, double scale, double x) {
    const double y = x / scale;
    double term = 1.0, tail = 1.0;
    for (int j = 1; j < k; ++j) {
        term *= y / j;
        tail += term;
    }
    return std::clamp(1.0 - std::exp(-y) * tail, 0.0, 1.0);
}

}  // namespace

namespace detail {

double sum_exp_cdf(std::vector<double> scales, double x) {
    scales.erase(std::remove_if(scales.begin(), scales.end(),
                                [](double b) { return b <= 0.0; }),
                 scales.end());
    if (scales.empty()) return x >= 0.0 ? 1.0 : 0.0;
    if (x <= 0.0) return 0.0;
    const int n = static_cast<int>(scales.size());
    if (n == 1) return 1.0 - std::exp(-x / scales[0]);

    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(a, b); };
    bool all_equal = true, any_collision = false;
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k) {
            if (near(scales[i], scales[k])) any_collision = true;
            if (!near(scales[i], scales[k])) all_equal = false;
        }
    if (all_equal) return erlang_cdf(n, scales[0], x);

    if (!any_collision) {
        // Partial fractions: CDF = 1 - sum_i a_i e^{-x/b_i},
        // a_i = prod_{k != i} 1/(1 - b_k/b_i).
        double cdf = 1.0, amax = 0.0;
        bool ill_conditioned = false;
        for (int i = 0; i < n; ++i) {
            double a = 1.0;
            for (int k = 0; k < n; ++k)
                if (k != i) a /= 1.0 - scales[k] / scales[i];
            amax = std::max(amax, std::abs(a));
            if (std::abs(a) > 1e12) ill_conditioned = true;
            cdf -= a * std::exp(-x / scales[i]);
        }
        if (!ill_conditioned) return std::clamp(cdf, 0.0, 1.0);
    }
    // Repeated poles (equal powers proposed by the optimizer) or unusable
    // conditioning: convolve the exponential pdfs numerically.
    auto sample = [&scales](int part, double t) {
        return std::exp(-t / scales[part]) / scales[part];
    };
    return convolved_cdf(n, sample, x, 1e-9);
}

double sum_log_exp_cdf(std::vector<double> rate_over_power, double r) {
    rate_over_power.erase(std::remove_if(rate_over_power.begin(), rate_over_power.end(),
                                         [](double k) { return std::isinf(k); }),
                          rate_over_power.end());
    if (rate_over_power.empty()) return r >= 0.0 ? 1.0 : 0.0;
    if (r <= 0.0) return 0.0;
    const int n = static_cast<int>(rate_over_power.size());
    if (n == 1) return 1.0 - std::exp(-rate_over_power[0] * std::expm1(r));
    // Per-round mutual-information pdf: f(w) = k e^w exp(-k (e^w - 1)), w >= 0.
    auto sample = [&rate_over_power](int part, double w) {
        const double k = rate_over_power[part];
        return k * std::exp(w) * std::exp(-k * std::expm1(w));
    };
    return convolved_cdf(n, sample, r, 1e-6);
}

}  // namespace detail

namespace {

std::vector<double> mixed_scales(const ChannelParams& ch, const PowerAllocation& pw, int j,
                                 int m) {
    std::vector<double> scales;
    for (int i = 1; i <= j; ++i)
        scales.push_back(std::isinf(ch.lambda_sd) ? 0.0 : pw.p_source[i - 1] / ch.lambda_sd);
    for (int i = j + 1; i <= m; ++i)
        scales.push_back(std::isinf(ch.lambda_rd) ? 0.0 : pw.p_relay[i - 1] / ch.lambda_rd);
    return scales;
}

std::vector<double> mixed_rates(const ChannelParams& ch, const PowerAllocation& pw, int j,
                                int m) {
    std::vector<double> k;
    for (int i = 1; i <= j; ++i)
        k.push_back(pw.p_source[i - 1] > 0.0 ? ch.lambda_sd / pw.p_source[i - 1] : INFINITY);
    for (int i = j + 1; i <= m; ++i)
        k.push_back(pw.p_relay[i - 1] > 0.0 ? ch.lambda_rd / pw.p_relay[i - 1] : INFINITY);
    return k;
}

void check_inputs(const ChannelParams& ch, const ProtocolConfig& cfg,
                  const PowerAllocation& pw) {
    ch.validate();
    cfg.validate();
    pw.validate(cfg.rounds());
    if (ch.fading != FadingMode::FastFading)
        throw ConfigError("fast_fading: channel must be fast-fading");
    if (cfg.coding != Coding::FixedLength)
        throw ConfigError(
            "fast_fading: codeword length equals the fading block length, "
            "so only fixed-length coding is defined");
}

}  // namespace

double ff_mrc_cdf(const ChannelParams& ch, const PowerAllocation& pw, int j, int m,
                  double r_threshold) {
    if (j < 0 || j > m) throw ConfigError("ff_mrc_cdf: need 0 <= j <= m");
    return detail::sum_exp_cdf(mixed_scales(ch, pw, j, m), std::expm1(r_threshold));
}

double ff_sumlog_cdf(const ChannelParams& ch, const PowerAllocation& pw, int j, int m,
                     double r_threshold) {
    if (j < 0 || j > m) throw ConfigError("ff_sumlog_cdf: need 0 <= j <= m");
    return detail::sum_log_exp_cdf(mixed_rates(ch, pw, j, m), r_threshold);
}

EventProbabilities ff_event_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                  const PowerAllocation& pw) {
    check_inputs(ch, cfg, pw);
    const int rounds = cfg.rounds();
    const double r1 = cfg.rates[0];
    const bool rtd = cfg.protocol == Protocol::Rtd;

    FailureLadders lad;
    lad.relay_fail.resize(rounds + 1);
    lad.dest_src_fail.resize(rounds + 1);
    lad.relay_fail[0] = 1.0;
    lad.dest_src_fail[0] = 1.0;
    for (int m = 1; m <= rounds; ++m) {
        std::vector<double> src_sr, src_sd;
        for (int i = 1; i <= m; ++i) {
            const double p = pw.p_source[i - 1];
            src_sr.push_back(std::isinf(ch.lambda_sr) ? 0.0 : p / ch.lambda_sr);
            src_sd.push_back(std::isinf(ch.lambda_sd) ? 0.0 : p / ch.lambda_sd);
        }
        if (rtd) {
            const double thr = std::expm1(r1);
            lad.relay_fail[m] = detail::sum_exp_cdf(src_sr, thr);
            lad.dest_src_fail[m] = detail::sum_exp_cdf(src_sd, thr);
        } else {
            std::vector<double> k_sr, k_sd;
            for (int i = 1; i <= m; ++i) {
                const double p = pw.p_source[i - 1];
                k_sr.push_back(p > 0.0 ? ch.lambda_sr / p : INFINITY);
                k_sd.push_back(p > 0.0 ? ch.lambda_sd / p : INFINITY);
            }
            lad.relay_fail[m] = detail::sum_log_exp_cdf(k_sr, r1);
            lad.dest_src_fail[m] = detail::sum_log_exp_cdf(k_sd, r1);
        }
    }
    lad.dest_relay_fail = [&ch, &pw, r1, rtd](int j, int m) {
        return rtd ? ff_mrc_cdf(ch, pw, j, m, r1) : ff_sumlog_cdf(ch, pw, j, m, r1);
    };
    return assemble_event_probs(cfg.m_max, lad);
}

}  // namespace relayarq
