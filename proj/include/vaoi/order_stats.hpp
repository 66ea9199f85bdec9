#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "errors.hpp"

namespace vaoi {

/// Sum of 1/i for i in [a, b]. b = a - 1 gives the empty sum. Summation runs
/// from the small index upward.
inline double harmonic_sum(long a, long b) {
  if (a < 1 || b < a - 1) {
    std::ostringstream os;
    os << "harmonic_sum needs 1 <= a and b >= a - 1, got a=" << a << " b=" << b;
    throw DomainError(os.str());
  }
  double sum = 0.0;
  for (long i = a; i <= b; ++i) sum += 1.0 / static_cast<double>(i);
  return sum;
}

/// Mean of the k-th smallest of n iid Exp(rate) draws:
/// (H_n - H_{n-k}) / rate.
inline double exp_order_stat_mean(int k, int n, double rate) {
  if (k < 1 || k > n) {
    std::ostringstream os;
    os << "order statistic index k=" << k << " outside [1, n=" << n << "]";
    throw DomainError(os.str());
  }
  if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("rate must be positive and finite");
  return harmonic_sum(n - k + 1, n) / rate;
}

namespace detail {

inline void check_het_args(int k, const std::vector<double>& rates) {
  int n = static_cast<int>(rates.size());
  if (k < 1 || k > n) {
    std::ostringstream os;
    os << "order statistic index k=" << k << " outside [1, n=" << n << "]";
    throw DomainError(os.str());
  }
  for (double r : rates)
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("rates must be positive and finite");
}

inline double binom(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  r = std::min(r, n - r);
  double v = 1.0;
  for (int i = 1; i <= r; ++i) v = v * static_cast<double>(n - r + i) / static_cast<double>(i);
  return v;
}

/// Integral of Pr(X_(k) > t) * exp(-shift * t) over t >= 0, evaluated exactly
/// through inclusion-exclusion over rate subsets. X_(k) > t means at least
/// q = n - k + 1 of the variables exceed t, and
/// Pr(#exceed >= q) = sum_{j=q}^{n} (-1)^{j-q} C(j-1, q-1) sum_{|C|=j} e^{-R_C t},
/// so each subset contributes 1 / (R_C + shift). One pass over the 2^n subset
/// rate sums, accumulated per cardinality in long double to absorb the
/// alternating-sum cancellation.
inline double orderstat_tail_integral_exact(int k, const std::vector<double>& rates, double shift) {
  int n = static_cast<int>(rates.size());
  int q = n - k + 1;
  std::vector<double> subset_rate(static_cast<std::size_t>(1) << n, 0.0);
  std::vector<long double> by_card(static_cast<std::size_t>(n) + 1, 0.0L);
  for (std::size_t mask = 1; mask < subset_rate.size(); ++mask) {
    std::size_t low = mask & (~mask + 1);
    int low_idx = std::countr_zero(mask);
    subset_rate[mask] = subset_rate[mask ^ low] + rates[static_cast<std::size_t>(low_idx)];
    by_card[static_cast<std::size_t>(std::popcount(mask))] +=
        1.0L / (static_cast<long double>(subset_rate[mask]) + static_cast<long double>(shift));
  }
  long double total = 0.0L;
  for (int j = q; j <= n; ++j) {
    long double term = static_cast<long double>(binom(j - 1, q - 1)) * by_card[static_cast<std::size_t>(j)];
    total += ((j - q) % 2 == 0) ? term : -term;
  }
  return static_cast<double>(total);
}

/// Pr(X_(k) > t) for independent Exp(rates[i]) via the count distribution of
/// arrivals by time t (Poisson-binomial, truncated at k terms).
inline double orderstat_survival_impl(int k, const std::vector<double>& rates, double t) {
  if (t <= 0.0) return 1.0;
  // dp[c] = Pr(exactly c of the variables seen so far are <= t), kept for c < k.
  std::vector<double> dp(static_cast<std::size_t>(k), 0.0);
  dp[0] = 1.0;
  for (double r : rates) {
    double p = -std::expm1(-r * t);
    for (int c = k - 1; c >= 0; --c) {
      double stay = dp[static_cast<std::size_t>(c)] * (1.0 - p);
      double up = (c > 0) ? dp[static_cast<std::size_t>(c) - 1] * p : 0.0;
      dp[static_cast<std::size_t>(c)] = stay + up;
    }
  }
  double s = 0.0;
  for (int c = k - 1; c >= 0; --c) s += dp[static_cast<std::size_t>(c)];
  return std::min(1.0, s);
}

inline double orderstat_tail_integral_quadrature(int k, const std::vector<double>& rates, double shift) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double t) {
    double v = orderstat_survival_impl(k, rates, t);
    return shift > 0.0 ? v * std::exp(-shift * t) : v;
  };
  return integrator.integrate(f, 1e-12);
}

inline constexpr int exact_subset_limit = 20;

inline double orderstat_tail_integral(int k, const std::vector<double>& rates, double shift) {
  if (static_cast<int>(rates.size()) <= exact_subset_limit)
    return orderstat_tail_integral_exact(k, rates, shift);
  return orderstat_tail_integral_quadrature(k, rates, shift);
}

} // namespace detail

/// Pr(X_(k) > t) for independent exponentials with the given rates.
inline double exp_order_stat_survival(int k, const std::vector<double>& rates, double t) {
  detail::check_het_args(k, rates);
  return detail::orderstat_survival_impl(k, rates, t);
}

/// Mean of the k-th smallest of independent Exp(rates[i]) draws. Exact
/// inclusion-exclusion up to 20 rates, adaptive quadrature beyond.
inline double exp_order_stat_mean(int k, const std::vector<double>& rates) {
  detail::check_het_args(k, rates);
  return detail::orderstat_tail_integral(k, rates, 0.0);
}

/// E[min(X_(k), U)] where X_(k) is the k-th smallest of independent
/// Exp(rates[i]) draws and U ~ Exp(cap_rate) is independent of them.
inline double exp_order_stat_capped_mean(int k, const std::vector<double>& rates, double cap_rate) {
  detail::check_het_args(k, rates);
  if (!(cap_rate > 0.0) || !std::isfinite(cap_rate)) throw DomainError("cap rate must be positive and finite");
  return detail::orderstat_tail_integral(k, rates, cap_rate);
}

/// Pr(X_(k) <= U) with U ~ Exp(cap_rate), via the identity
/// Pr(X <= U) = 1 - cap_rate * E[min(X, U)].
inline double exp_order_stat_beats_cap(int k, const std::vector<double>& rates, double cap_rate) {
  detail::check_het_args(k, rates);
  if (!(cap_rate > 0.0) || !std::isfinite(cap_rate)) throw DomainError("cap rate must be positive and finite");
  double p = 1.0 - cap_rate * detail::orderstat_tail_integral(k, rates, cap_rate);
  return std::clamp(p, 0.0, 1.0);
}

} // namespace vaoi
