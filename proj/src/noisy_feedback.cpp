#include "relayarq/noisy_feedback.hpp"

#include <algorithm>
#include <cmath>

#include "relayarq/special_functions.hpp"

namespace relayarq {

namespace {

void check_inputs(const ChannelParams& ch, const PowerAllocation& pw, double r1,
                  const FeedbackNoise& fb) {
    ch.validate();
    fb.validate();
    if (ch.fading != FadingMode::QuasiStatic || ch.delta != 0.0)
        throw ConfigError("noisy_feedback: independent quasi-static fading only");
    if (pw.p_source.size() != 2 || pw.p_relay.size() != 2)
        throw ConfigError("noisy_feedback: closed forms cover M = 1 (two rounds)");
    pw.validate(2);
    if (r1 <= 0.0) throw ConfigError("noisy_feedback: rate must be > 0");
}

}  // namespace

double kappa_term(const ChannelParams& ch, const PowerAllocation& pw, double r1) {
    const double thr = std::expm1(r1);
    const double p1 = pw.p_source[0], p2s = pw.p_source[1], p2r = pw.p_relay[1];
    if (p2r <= 0.0)  // Z collapses to the coherent source sum: kappa = sigma
        return sf::exp_mrc_fail_prob(ch.lambda_sd, p1 + p2s, ch.lambda_rd, 0.0, thr);
    if (std::isinf(ch.lambda_sd)) return 1.0 - sf::exp_survival(ch.lambda_rd, thr, p2r);

    // Conditioned on g_sd = x, Z = |sqrt(x P^s_2) + H_rd sqrt(P^r_2)|^2 is
    // noncentral chi-square with 2 dof: Pr(Z <= t) = 1 - M(a(x), b(t)).
    const double scale = std::isinf(ch.lambda_rd) ? 0.0 : p2r / ch.lambda_rd;
    auto f = [&](double x) {
        const double t = thr - x * p1;
        if (t <= 0.0) return 0.0;
        double inner;
        if (scale <= 0.0) {
            inner = x * p2s < t ? 1.0 : 0.0;  // dead relay-destination link
        } else {
            const double a = std::sqrt(2.0 * x * p2s / scale);
            const double b = std::sqrt(2.0 * t / scale);
            inner = 1.0 - sf::marcum_q(a, b);
        }
        return ch.lambda_sd * std::exp(-ch.lambda_sd * x) * inner;
    };
    const double v = sf::quad_adaptive(f, 0.0, thr / p1, 1e-6);
    return std::clamp(v, 0.0, 1.0);
}

NoisyRtdM1Result noisy_rtd_m1_metrics(const ChannelParams& ch, const PowerAllocation& pw,
                                      double r1, const FeedbackNoise& fb) {
    check_inputs(ch, pw, r1, fb);
    const double thr = std::expm1(r1);
    const double p1 = pw.p_source[0], p2s = pw.p_source[1], p2r = pw.p_relay[1];
    const double psd = fb.p_sd, prd = fb.p_rd, psr = fb.p_sr;

    const double omega1 = sf::exp_survival(ch.lambda_sr, thr, p1);
    const double beta1 = sf::exp_survival(ch.lambda_sd, thr, p1);
    const double mu = sf::exp_mrc_fail_prob(ch.lambda_sd, p1, ch.lambda_rd, p2r, thr);
    const double sigma = sf::exp_mrc_fail_prob(ch.lambda_sd, p1 + p2s, ch.lambda_rd, 0.0, thr);
    const double kappa = omega1 > 0.0 && psr > 0.0 ? kappa_term(ch, pw, r1) : 0.0;

    // Probability that both terminals believe the destination sent NACK.
    const double both_nack = (1.0 - beta1) * (1.0 - prd) * (1.0 - psd) + beta1 * prd * psd;

    const double xi =
        p1 +
        (omega1 * (1.0 - psr) * p2r + omega1 * psr * (p2r + p2s) +
         (1.0 - omega1) * (1.0 - psr) * p2s) *
            both_nack +
        psd * (1.0 - prd) * (p2r * omega1 * (1.0 - beta1) + p2s * beta1) +
        prd * (1.0 - psd) * (p2s * (1.0 - beta1) + p2r * omega1 * beta1);

    const double uses = 1.0 + (1.0 - (1.0 - omega1) * psr) * both_nack +
                        psd * (1.0 - prd) * (beta1 + (1.0 - beta1) * omega1) +
                        prd * (1.0 - psd) * (1.0 - beta1 + omega1 * beta1);

    const double outage =
        (1.0 - beta1) * prd * psd + psd * (1.0 - prd) * omega1 * mu +
        psd * (1.0 - prd) * (1.0 - omega1) * (1.0 - beta1) + (1.0 - psd) * prd * sigma +
        (1.0 - prd) * (1.0 - psd) *
            (omega1 * (1.0 - psr) * mu + omega1 * psr * kappa +
             (1.0 - omega1) * (1.0 - psr) * sigma +
             (1.0 - beta1) * (1.0 - omega1) * psr);

    NoisyRtdM1Result res;
    res.outage = std::clamp(outage, 0.0, 1.0);
    res.phi_total = uses > 0.0 ? xi / uses : 0.0;
    return res;
}

}  // namespace relayarq
