#include "relayarq/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "relayarq/types.hpp"

namespace relayarq::sf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Sums the ascending series sum_k (x/2)^{2k} / (k!)^2; converges fast for x <= 20.
double i0_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 240; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

// Asymptotic expansion of e^{-x} I0(x) for large x; truncated well before
// the smallest term for x >= 20.
double i0_scaled_asymptotic(double x) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 40; ++k) {
        const double num = (2.0 * k - 1.0) * (2.0 * k - 1.0);
        term *= num / (8.0 * k * x);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum / std::sqrt(2.0 * kPi * x);
}

}  // namespace

double bessel_i0(double x) {
    x = std::abs(x);
    if (x <= 20.0) return i0_series(x);
    return i0_scaled_asymptotic(x) * std::exp(x);  // +inf past ~709; callers wanting
                                                   // finite values use the scaled form
}

double bessel_i0_scaled(double x) {
    x = std::abs(x);
    if (x <= 20.0) return i0_series(x) * std::exp(-x);
    return i0_scaled_asymptotic(x);
}

namespace {

// Canonical series M(a,b) = sum_n Pois(n; a^2/2) * P(N <= n; b^2/2-Poisson's CDF
// cousin) with both factors updated by recurrence. Valid and stable while the
// leading Poisson weight e^{-a^2/2} does not underflow.
double marcum_series(double a, double b) {
    const double half_a2 = 0.5 * a * a;
    const double half_b2 = 0.5 * b * b;
    double pois = std::exp(-half_a2);        // Pois(0)
    double gterm = std::exp(-half_b2);       // e^{-y} y^n / n! at n = 0
    double gcum = gterm;                     // sum_{k<=n} of the above
    double acc = pois * gcum;
    double pois_used = pois;
    for (int n = 1; n < 100000; ++n) {
        pois *= half_a2 / n;
        gterm *= half_b2 / n;
        gcum += gterm;
        acc += pois * gcum;
        pois_used += pois;
        if (1.0 - pois_used < 1e-16 * std::max(acc, 1e-300)) break;
    }
    return acc;
}

double marcum_quadrature(double a, double b) {
    // Integrand t e^{-(t-a)^2/2} * [e^{-at} I0(at)]; mass lives within a few
    // units of max(a,b), tail truncated where the Gaussian factor is ~e^{-800}.
    const double hi = std::max(a, b) + 40.0;
    if (hi <= b) return 0.0;
    auto f = [a](double t) {
        const double d = t - a;
        return t * std::exp(-0.5 * d * d) * bessel_i0_scaled(a * t);
    };
    return quad_adaptive(f, b, hi, 1e-11);
}

}  // namespace

double marcum_q(double a, double b) {
    if (a < 0.0 || b < 0.0) throw ConfigError("marcum_q: arguments must be >= 0");
    if (b == 0.0) return 1.0;
    if (a == 0.0) return std::exp(-0.5 * b * b);
    double v;
    if (a * b <= 30.0 && a <= 15.0 && b <= 15.0)
        v = marcum_series(a, b);
    else
        v = marcum_quadrature(a, b);
    if (v < -1e-8 || v > 1.0 + 1e-8)
        throw NumericalError("marcum_q: result outside [0,1] beyond tolerance", v);
    return std::clamp(v, 0.0, 1.0);
}

namespace {

// Kronrod-15 abscissae/weights on [-1,1]; odd-indexed nodes carry the
// embedded Gauss-7 rule.
constexpr double kKx[15] = {
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245,  0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,  0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,  0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};
constexpr double kKw[15] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};
constexpr double kGw[7] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
    0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

struct Panel {
    double lo, hi, integral, err;
};

Panel gk15(const std::function<double(double)>& f, double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double ik = 0.0, ig = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double fx = f(c + h * kKx[i]);
        ik += kKw[i] * fx;
        if (i % 2 == 1) ig += kGw[i / 2] * fx;
    }
    ik *= h;
    ig *= h;
    return {lo, hi, ik, std::abs(ik - ig)};
}

}  // namespace

double quad_adaptive(const std::function<double(double)>& f, double lo, double hi,
                     double rel_tol) {
    if (!(lo <= hi)) throw ConfigError("quad_adaptive: requires lo <= hi");
    if (lo == hi) return 0.0;
    if (std::isinf(hi)) {
        // x = lo + t/(1-t) maps [0,1) onto [lo,inf); nodes stay interior.
        auto g = [&f, lo](double t) {
            const double om = 1.0 - t;
            return f(lo + t / om) / (om * om);
        };
        return quad_adaptive(g, 0.0, 1.0, rel_tol);
    }

    constexpr int kMaxPanels = 4000;
    std::vector<Panel> panels;
    panels.push_back(gk15(f, lo, hi));
    for (;;) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].integral;
            err += panels[i].err;
            if (panels[i].err > panels[worst].err) worst = i;
        }
        const double tol = rel_tol * std::max(std::abs(total), 1e-300) + 1e-305;
        if (err <= tol) return total;
        if (static_cast<int>(panels.size()) >= kMaxPanels)
            throw NumericalError("quad_adaptive: interval budget exhausted", total);
        const Panel p = panels[worst];
        const double mid = 0.5 * (p.lo + p.hi);
        panels[worst] = gk15(f, p.lo, mid);
        panels.push_back(gk15(f, mid, p.hi));
    }
}

double root_increasing(const std::function<double(double)>& f, double target,
                       double bracket_hint) {
    if (target < 0.0) throw ConfigError("root_increasing: target must be >= 0");
    if (target == 0.0) return 0.0;
    double hi = bracket_hint > 0.0 && std::isfinite(bracket_hint) ? bracket_hint : 1.0;
    double lo = 0.0;
    double fhi = f(hi) - target;
    int doublings = 0;
    while (fhi < 0.0) {
        lo = hi;
        hi *= 2.0;
        fhi = f(hi) - target;
        if (++doublings > 200)
            throw NumericalError("root_increasing: no bracket after 200 doublings", hi);
    }
    // Shrink lo toward the root if the hint overshot badly.
    while (lo == 0.0 && hi > 1e-300) {
        const double cand = hi / 2.0;
        if (f(cand) - target >= 0.0)
            hi = cand;
        else
            lo = cand;
    }

    double flo = f(lo) - target;
    if (flo > 0.0) return lo;  // can only happen at the shrink floor
    // Brent's method on g(x) = f(x) - target.
    double a = lo, b = hi, fa = flo, fb = fhi;
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b);
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) break;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b) - target;
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            e = d = b - a;
        }
    }
    const double resid = std::abs(f(b) - target);
    if (resid > 1e-12 * std::max(1.0, std::abs(target)))
        throw NumericalError("root_increasing: residual above tolerance", b);
    return b;
}

double exp_survival(double lambda, double threshold, double cumsum) {
    if (threshold <= 0.0) return 1.0;
    if (cumsum <= 0.0) return 0.0;
    if (std::isinf(lambda)) return 0.0;
    return std::exp(-lambda * threshold / cumsum);
}

double exp_mrc_fail_prob(double lambda_a, double coef_a, double lambda_b, double coef_b,
                         double threshold) {
    if (threshold <= 0.0) return 0.0;
    if (coef_a <= 0.0 && coef_b <= 0.0) return 1.0;
    if (coef_a <= 0.0) return 1.0 - exp_survival(lambda_b, threshold, coef_b);
    if (coef_b <= 0.0) return 1.0 - exp_survival(lambda_a, threshold, coef_a);
    const double sa = exp_survival(lambda_a, threshold, coef_a);
    const double sb = exp_survival(lambda_b, threshold, coef_b);
    if (std::isinf(lambda_a)) return 1.0 - sb;
    if (std::isinf(lambda_b)) return 1.0 - sa;
    const double ratio = (lambda_b * coef_a) / (lambda_a * coef_b);
    const double denom = 1.0 - ratio;
    double v;
    if (std::abs(denom) < 1e-9) {
        const double c = lambda_a * threshold / coef_a;
        v = 1.0 - sa - c * sb;
    } else {
        v = 1.0 - sa - (sb - sa) / denom;
    }
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace relayarq::sf
