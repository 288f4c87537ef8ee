#pragma once

#include <vector>

#include "relayarq/types.hpp"

namespace relayarq {

/// Pr(log(1 + sum_{i<=j} P^s_i g^sd_i + sum_{j<i<=m} P^r_i g^rd_i) <= r_threshold)
/// with independent per-round gains: the CDF of a sum of independent
/// exponentials (partial fractions; numerical convolution when scale
/// parameters collide).
double ff_mrc_cdf(const ChannelParams& ch, const PowerAllocation& pw, int j, int m,
                  double r_threshold);

/// Pr(sum_{i<=j} log(1+P^s_i g^sd_i) + sum_{j<i<=m} log(1+P^r_i g^rd_i) <= r_threshold)
/// by recursive numerical convolution of the per-round mutual-information pdfs.
double ff_sumlog_cdf(const ChannelParams& ch, const PowerAllocation& pw, int j, int m,
                     double r_threshold);

/// Event probabilities when gains redraw each round. RTD substitutes the
/// MRC-sum CDFs, INR the mutual-information-sum CDFs (fixed-length only).
EventProbabilities ff_event_probs(const ChannelParams& ch, const ProtocolConfig& cfg,
                                  const PowerAllocation& pw);

namespace detail {

/// CDF of sum z_i, z_i ~ Exp with mean scales[i] (scales[i] > 0).
double sum_exp_cdf(std::vector<double> scales, double x);

/// CDF at r of sum_i w_i with w_i = log(1 + g/k_i), g ~ Exp(1): rate_over_power
/// holds k_i = lambda_i / P_i.
double sum_log_exp_cdf(std::vector<double> rate_over_power, double r);

}  // namespace detail

}  // namespace relayarq
