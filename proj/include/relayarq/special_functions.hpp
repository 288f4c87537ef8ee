#pragma once

#include <functional>

namespace relayarq::sf {

/// Zeroth-order modified Bessel function of the first kind, I0(x).
/// Relative error <= 1e-12; overflows to +inf only past x ~ 709.
double bessel_i0(double x);

/// e^{-|x|} I0(x); stays finite for all x, used for large-argument work.
double bessel_i0_scaled(double x);

/// Marcum Q-function M(a,b) = int_b^inf t e^{-(t^2+a^2)/2} I0(at) dt.
/// Series with Poisson/gamma recurrences for small arguments, adaptive
/// quadrature of the defining integral otherwise. Result clamped to [0,1]
/// after a tolerance check.
double marcum_q(double a, double b);

/// Adaptive Gauss-Kronrod (G7,K15) quadrature of f over [lo,hi].
/// hi may be +inf (mapped to a finite range by x = lo + t/(1-t)).
/// Throws NumericalError carrying the best estimate if the interval
/// budget is exhausted before the tolerance is met.
double quad_adaptive(const std::function<double(double)>& f, double lo, double hi,
                     double rel_tol = 1e-10);

/// Solves f(x) = target for f strictly increasing with f(0) = 0, target >= 0.
/// Brackets by doubling from bracket_hint, then Brent. The residual
/// |f(x)-target| is driven below 1e-12 * max(1,|target|).
double root_increasing(const std::function<double(double)>& f, double target,
                       double bracket_hint = 1.0);

/// Pr(a*A + b*B < threshold) for independent a ~ Exp(lambda_a), b ~ Exp(lambda_b)
/// and constants A, B >= 0. This is the quasi-static MRC failure probability;
/// the near-singular branch at lambda_b * A ~ lambda_a * B is handled by the
/// removable-singularity formula.
double exp_mrc_fail_prob(double lambda_a, double coef_a, double lambda_b, double coef_b,
                         double threshold);

/// e^{-lambda * threshold / cumsum} with the empty-sum convention
/// cumsum = 0 -> 0 (a zero-power prefix can never decode a positive rate).
double exp_survival(double lambda, double threshold, double cumsum);

}  // namespace relayarq::sf
