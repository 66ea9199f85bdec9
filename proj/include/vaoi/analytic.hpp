#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "order_stats.hpp"

namespace vaoi {

/// Closed interval that is known to contain a quantity whose exact value has
/// no closed form.
struct BoundPair {
  double lower = 0.0;
  double upper = 0.0;
};

namespace detail {

inline void check_rates(double lambda_s, double lambda_e) {
  if (!(lambda_s > 0.0) || !std::isfinite(lambda_s))
    throw DomainError("lambda_s must be positive and finite");
  if (!(lambda_e > 0.0) || !std::isfinite(lambda_e))
    throw DomainError("lambda_e must be positive and finite");
}

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) throw DomainError("alpha must lie in (0, 1]");
}

inline double tilde(int m, double lambda_s, double lambda_e) {
  return static_cast<double>(m - 1) * lambda_s / lambda_e;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Memory scheme
// ---------------------------------------------------------------------------

/// Time-average version age of a node under full subscription and the memory
/// scheme, with n_j in-neighbors each gossiping to it at `edge_rate`:
/// lambda_s * E[X_(k : n_j)].
inline double age_memory_full(int k, int n_j, double edge_rate, double lambda_s) {
  detail::check_rates(lambda_s, edge_rate);
  if (k < 0 || k > n_j) throw DomainError("need 0 <= k <= n_j in-neighbors");
  if (k == 0) return 0.0;
  return lambda_s * exp_order_stat_mean(k, n_j, edge_rate);
}

/// Heterogeneous variant: one rate per incoming edge of the node.
inline double age_memory_full(int k, const std::vector<double>& in_rates, double lambda_s) {
  if (!(lambda_s > 0.0) || !std::isfinite(lambda_s))
    throw DomainError("lambda_s must be positive and finite");
  if (k < 0 || k > static_cast<int>(in_rates.size()))
    throw DomainError("need 0 <= k <= number of in-neighbors");
  if (k == 0) return 0.0;
  return lambda_s * exp_order_stat_mean(k, in_rates);
}

/// Memory scheme, total key subscription (m > n = s), fully connected
/// homogeneous network. Subscribers wait for the k-th of n - 1 subscriber
/// keys, nonsubscribers for the (k+1)-th of n.
inline double age_memory_total_key(int k, int n, int m, double lambda_s, double lambda_e,
                                   NodeClass cls) {
  detail::check_rates(lambda_s, lambda_e);
  if (k < 0 || k >= n) throw DomainError("need 0 <= k < n");
  if (m < 2 || n > m) throw DomainError("need 2 <= m and n <= m");
  double lt = detail::tilde(m, lambda_s, lambda_e);
  if (cls == NodeClass::Subscriber) return lt * harmonic_sum(n - k, n - 1);
  return lt * harmonic_sum(n - k, n);
}

/// Large-network limit of the memory-scheme graph average when n = floor(alpha m):
/// lambda_s (k + 1 - alpha) / (alpha lambda_e).
inline double asymptote_memory(int k, double alpha, double lambda_s, double lambda_e) {
  detail::check_rates(lambda_s, lambda_e);
  detail::check_alpha(alpha);
  if (k < 0) throw DomainError("k cannot be negative");
  return lambda_s * (static_cast<double>(k) + 1.0 - alpha) / (alpha * lambda_e);
}

/// Memory scheme, partial key subscription (m > n > s): the graph-average age
/// has no closed form, but is sandwiched between the total-key graph averages
/// of the n = m and n = n networks.
inline BoundPair bounds_memory_partial(int k, int n, int m, double lambda_s, double lambda_e) {
  detail::check_rates(lambda_s, lambda_e);
  if (k < 0 || k >= n) throw DomainError("need 0 <= k < n");
  if (n > m) throw DomainError("need n <= m");
  if (m < 2) throw DomainError("need m >= 2");
  double lt = detail::tilde(m, lambda_s, lambda_e);
  return BoundPair{lt * harmonic_sum(m - k, m - 1), lt * harmonic_sum(n - k, n)};
}

/// Upper bound on (upper - lower) / lower for the partial-key memory bounds;
/// rate free.
inline double relative_gap_bound(int k, int n, int m) {
  if (k < 1 || k >= n || n > m) throw DomainError("need 1 <= k < n <= m");
  double num = static_cast<double>(m - n) * k + static_cast<double>(m - 1 - k) +
               static_cast<double>(k) * k;
  return num / (static_cast<double>(n - k) * k);
}

/// Limit of relative_gap_bound along n = floor(alpha m), m -> infinity.
inline double asymptotic_relative_gap(int k, double alpha) {
  detail::check_alpha(alpha);
  if (k < 1) throw DomainError("need k >= 1");
  return (static_cast<double>(k) - alpha * k + 1.0) / (alpha * k);
}

/// Large-network limits of the partial-key memory bounds along n = floor(alpha m).
inline BoundPair asymptote_bounds_memory_partial(int k, double alpha, double lambda_s,
                                                 double lambda_e) {
  detail::check_rates(lambda_s, lambda_e);
  detail::check_alpha(alpha);
  if (k < 0) throw DomainError("k cannot be negative");
  return BoundPair{static_cast<double>(k) * lambda_s / lambda_e,
                   (static_cast<double>(k) + 1.0) * lambda_s / (alpha * lambda_e)};
}

// ---------------------------------------------------------------------------
// Memoryless scheme: the decode-vs-update race
// ---------------------------------------------------------------------------

/// Effective sender multiplicity once i - 1 of n - 1 current-key holders have
/// already reached the node: (n - i) / (m - 1).
inline double coeff_B(int n, int m, int i) {
  if (m < 2) throw DomainError("need m >= 2");
  if (i < 1 || i > n - 1) throw DomainError("need 1 <= i <= n - 1");
  return static_cast<double>(n - i) / static_cast<double>(m - 1);
}

/// Probability that the first j stages of the decode race all finish before
/// the next source update: product over i <= j of
/// lambda_e B(n,m,i) / (lambda_e B(n,m,i) + lambda_s). j = 0 gives 1.
inline double coeff_A(int n, int m, int j, double lambda_s, double lambda_e) {
  detail::check_rates(lambda_s, lambda_e);
  if (j < 0 || j > n - 1) throw DomainError("need 0 <= j <= n - 1");
  double prod = 1.0;
  for (int i = 1; i <= j; ++i) {
    double eb = lambda_e * coeff_B(n, m, i);
    prod *= eb / (eb + lambda_s);
  }
  return prod;
}

/// E[min(X_(k : n-1), U)]: expected progress of a k-stage decode race against
/// the next source update U ~ Exp(lambda_s), with n - 1 current-key holders
/// gossiping over a homogeneous network of m nodes.
inline double expected_min_orderstat_update(int k, int n, int m, double lambda_s,
                                            double lambda_e) {
  detail::check_rates(lambda_s, lambda_e);
  if (k < 0 || k > n - 1) throw DomainError("need 0 <= k <= n - 1");
  double sum = 0.0;
  for (int j = 1; j <= k; ++j) {
    double eb = lambda_e * coeff_B(n, m, j);
    sum += coeff_A(n, m, j - 1, lambda_s, lambda_e) / (eb + lambda_s);
  }
  return sum;
}

/// Pr(X_(k : n-1) <= U): the k-stage race finishes before the next update.
inline double prob_decode_before_update(int k, int n, int m, double lambda_s,
                                        double lambda_e) {
  detail::check_rates(lambda_s, lambda_e);
  if (k < 0 || k > n - 1) throw DomainError("need 0 <= k <= n - 1");
  return coeff_A(n, m, k, lambda_s, lambda_e);
}

/// Memoryless full-subscription age of a node with n_j in-neighbors, each
/// gossiping at `edge_rate`: lambda_s E[min(X_(k:n_j), U)] / Pr(X_(k:n_j) <= U).
inline double age_memoryless_full(int k, int n_j, double edge_rate, double lambda_s) {
  detail::check_rates(lambda_s, edge_rate);
  if (k < 0 || k > n_j) throw DomainError("need 0 <= k <= n_j in-neighbors");
  if (k == 0) return 0.0;
  // Map onto the race coefficients of an n_j + 1 key, per-edge-rate network.
  double num = 0.0, prod = 1.0;
  for (int j = 1; j <= k; ++j) {
    double eb = edge_rate * static_cast<double>(n_j + 1 - j);
    num += prod / (eb + lambda_s);
    prod *= eb / (eb + lambda_s);
  }
  return lambda_s * num / prod;
}

/// Heterogeneous variant: one rate per incoming edge of the node.
inline double age_memoryless_full(int k, const std::vector<double>& in_rates, double lambda_s) {
  if (!(lambda_s > 0.0) || !std::isfinite(lambda_s))
    throw DomainError("lambda_s must be positive and finite");
  if (k < 0 || k > static_cast<int>(in_rates.size()))
    throw DomainError("need 0 <= k <= number of in-neighbors");
  if (k == 0) return 0.0;
  double num = exp_order_stat_capped_mean(k, in_rates, lambda_s);
  double pr = 1.0 - lambda_s * num;
  return lambda_s * num / pr;
}

/// Memoryless scheme on the homogeneous fully connected network, any
/// subscription level with n <= m (s < n means partial, s = n total, n = m
/// full). Subscribers race k stages among n current-key holders; a
/// nonsubscriber either holds a key (race of k among n) or does not (race of
/// k + 1 among n + 1), mixed by the selection odds.
inline double age_memoryless_partial(int k, int n, int s, int m, double lambda_s,
                                     double lambda_e, NodeClass cls) {
  detail::check_rates(lambda_s, lambda_e);
  if (k < 0 || k >= n) throw DomainError("need 0 <= k < n");
  if (s < 0 || s > n || n > m) throw DomainError("need 0 <= s <= n <= m");
  if (cls == NodeClass::Subscriber) {
    if (s == 0) throw DomainError("no subscribers in this network");
    double num = lambda_s * expected_min_orderstat_update(k, n, m, lambda_s, lambda_e);
    return num / coeff_A(n, m, k, lambda_s, lambda_e);
  }
  if (s == m) throw DomainError("no nonsubscribers in this network");
  double w_sel = static_cast<double>(n - s);
  double w_not = static_cast<double>(m - n);
  double num = w_sel * lambda_s * expected_min_orderstat_update(k, n, m, lambda_s, lambda_e) +
               w_not * lambda_s * expected_min_orderstat_update(k + 1, n + 1, m, lambda_s, lambda_e);
  double den = w_sel * coeff_A(n, m, k, lambda_s, lambda_e) +
               w_not * coeff_A(n + 1, m, k + 1, lambda_s, lambda_e);
  return num / den;
}

/// Large-network limit of the memoryless age along n = floor(alpha m), with
/// P = 1 + lambda_s / (alpha lambda_e).
inline double asymptote_memoryless(int k, double alpha, double lambda_s, double lambda_e,
                                   Population pop) {
  detail::check_rates(lambda_s, lambda_e);
  detail::check_alpha(alpha);
  if (k < 0) throw DomainError("k cannot be negative");
  double p = 1.0 + lambda_s / (alpha * lambda_e);
  switch (pop) {
    case Population::Subscriber:
      return std::pow(p, k) - 1.0;
    case Population::Nonsubscriber:
      return std::pow(p, k + 1) - 1.0;
    default:
      return std::pow(p, k) * ((lambda_s + alpha * (lambda_e - lambda_s)) / (alpha * lambda_e)) -
             1.0;
  }
}

// ---------------------------------------------------------------------------
// Aggregation and dispatch
// ---------------------------------------------------------------------------

/// Node-count weighted graph average of the two class averages. A class with
/// no members is ignored entirely, so its value may be anything, even NaN.
inline double graph_average(double sub_value, double nonsub_value, int s, int m) {
  if (m < 1 || s < 0 || s > m) throw DomainError("need 0 <= s <= m and m >= 1");
  if (s == 0) return nonsub_value;
  if (s == m) return sub_value;
  double fs = static_cast<double>(s) / static_cast<double>(m);
  return fs * sub_value + (1.0 - fs) * nonsub_value;
}

/// Closed-form reference for a validated homogeneous config: a point value
/// where one exists, a bound pair where only bounds are known, neither for
/// heterogeneous topologies.
struct AnalyticRef {
  std::optional<double> value;
  std::optional<BoundPair> bounds;
};

inline AnalyticRef analytic_reference(const ValidatedConfig& v, Population pop) {
  AnalyticRef out;
  if (!v.homogeneous()) return out;
  const auto& c = v.cfg;
  double le = v.lambda_e();
  bool memory = c.scheme == Scheme::Memory;

  if (pop == Population::Subscriber && c.s == 0) return out;
  if (pop == Population::Nonsubscriber && c.s == c.m) return out;

  if (memory) {
    if (v.type == NetworkType::PartialKeySubscription) {
      out.bounds = bounds_memory_partial(c.k, c.n, c.m, c.lambda_s, le);
      return out;
    }
    // Full subscription is the n = m case of the total-key formulas.
    switch (pop) {
      case Population::Subscriber:
        out.value = age_memory_total_key(c.k, c.n, c.m, c.lambda_s, le, NodeClass::Subscriber);
        break;
      case Population::Nonsubscriber:
        out.value = age_memory_total_key(c.k, c.n, c.m, c.lambda_s, le, NodeClass::Nonsubscriber);
        break;
      case Population::Graph: {
        double sub = age_memory_total_key(c.k, c.n, c.m, c.lambda_s, le, NodeClass::Subscriber);
        double non = (c.s == c.m)
                         ? 0.0
                         : age_memory_total_key(c.k, c.n, c.m, c.lambda_s, le, NodeClass::Nonsubscriber);
        out.value = graph_average(sub, non, c.s, c.m);
        break;
      }
    }
    return out;
  }

  switch (pop) {
    case Population::Subscriber:
      out.value = age_memoryless_partial(c.k, c.n, c.s, c.m, c.lambda_s, le, NodeClass::Subscriber);
      break;
    case Population::Nonsubscriber:
      out.value = age_memoryless_partial(c.k, c.n, c.s, c.m, c.lambda_s, le, NodeClass::Nonsubscriber);
      break;
    case Population::Graph: {
      double sub = (c.s == 0) ? 0.0
                              : age_memoryless_partial(c.k, c.n, c.s, c.m, c.lambda_s, le,
                                                       NodeClass::Subscriber);
      double non = (c.s == c.m) ? 0.0
                                : age_memoryless_partial(c.k, c.n, c.s, c.m, c.lambda_s, le,
                                                         NodeClass::Nonsubscriber);
      out.value = graph_average(sub, non, c.s, c.m);
      break;
    }
  }
  return out;
}

} // namespace vaoi
