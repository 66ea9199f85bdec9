#pragma once

#include <cmath>
#include <sstream>

#include "analytic.hpp"
#include "config.hpp"
#include "errors.hpp"

namespace vaoi {

/// How close the memoryless graph-average age must come to the memory one.
struct CriticalRateQuery {
  int k = 1;
  int n = 2;
  int s = 2;
  int m = 2;
  double lambda_s = 1.0;
  double epsilon = 0.1;
};

struct CriticalRateResult {
  double rate = 0.0;         ///< smallest lambda_e with gap <= epsilon (to 1e-6 relative)
  double gap_at_rate = 0.0;
  /// True when the network is partial key, where the memory-scheme age is only
  /// known by bounds; the gap then uses the lower bound in place of the exact
  /// age, so `rate` is an upper bound on the true critical rate.
  bool bound_only = false;
};

namespace detail {

/// Memoryless-minus-memory graph gap at a given gossip rate. For partial-key
/// networks the memory age is replaced by its lower bound, making the result
/// an upper bound on the true gap.
inline double scheme_gap(const CriticalRateQuery& q, NetworkType type, double lambda_e) {
  const int k = q.k, n = q.n, s = q.s, m = q.m;
  double mem;
  if (type == NetworkType::PartialKeySubscription) {
    mem = bounds_memory_partial(k, n, m, q.lambda_s, lambda_e).lower;
  } else {
    double sub = age_memory_total_key(k, n, m, q.lambda_s, lambda_e, NodeClass::Subscriber);
    double non = (s == m) ? 0.0
                          : age_memory_total_key(k, n, m, q.lambda_s, lambda_e, NodeClass::Nonsubscriber);
    mem = graph_average(sub, non, s, m);
  }
  double mless_sub = (s == 0) ? 0.0
                              : age_memoryless_partial(k, n, s, m, q.lambda_s, lambda_e,
                                                       NodeClass::Subscriber);
  double mless_non = (s == m) ? 0.0
                              : age_memoryless_partial(k, n, s, m, q.lambda_s, lambda_e,
                                                       NodeClass::Nonsubscriber);
  double mless = graph_average(mless_sub, mless_non, s, m);
  return std::fabs(mless - mem);
}

} // namespace detail

/// Smallest gossip rate at which forgoing forwarding memory costs at most
/// epsilon in graph-average age. Bracketing by doubling from lambda_s, then
/// bisection to 1e-6 relative width; the gap's monotone decrease in lambda_e
/// is checked on a log-spaced scan before bisection and a violation raises
/// SolverError(NotMonotone). Returns 0 when even a vanishing gossip rate
/// already meets epsilon.
inline CriticalRateResult critical_gossip_rate(const CriticalRateQuery& q) {
  if (!(q.epsilon > 0.0) || !std::isfinite(q.epsilon))
    throw DomainError("epsilon must be positive and finite");
  // Rate-independent checks ride on config validation with a placeholder rate.
  ValidatedConfig v = validate_config(
      make_homogeneous(q.k, q.n, q.s, q.m, q.lambda_s, q.lambda_s, Scheme::Memory));

  CriticalRateResult res;
  res.bound_only = v.type == NetworkType::PartialKeySubscription;
  auto gap = [&](double le) { return detail::scheme_gap(q, v.type, le); };

  const double floor_rate = q.lambda_s * 1e-6;
  if (gap(floor_rate) <= q.epsilon) {
    res.rate = 0.0;
    res.gap_at_rate = gap(floor_rate);
    return res;
  }

  double lo = floor_rate;
  double hi = q.lambda_s;
  const double cap = 1e9 * q.lambda_s;
  while (gap(hi) > q.epsilon) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) {
      std::ostringstream os;
      os << "no gossip rate below " << cap << " brings the gap under " << q.epsilon;
      throw SolverError(SolverFault::NoBracket, os.str());
    }
  }

  // Monotonicity scan over the whole bracketed range.
  {
    const int points = 48;
    double prev = gap(floor_rate);
    for (int i = 1; i <= points; ++i) {
      double le = floor_rate * std::pow(hi / floor_rate, static_cast<double>(i) / points);
      double g = gap(le);
      if (g > prev * (1.0 + 1e-9) + 1e-15)
        throw SolverError(SolverFault::NotMonotone,
                          "scheme gap is not decreasing in lambda_e over the scanned range");
      prev = g;
    }
  }

  while (hi - lo > 1e-6 * hi) {
    double mid = 0.5 * (lo + hi);
    if (gap(mid) <= q.epsilon)
      hi = mid;
    else
      lo = mid;
  }
  res.rate = hi;
  res.gap_at_rate = gap(hi);
  return res;
}

} // namespace vaoi
