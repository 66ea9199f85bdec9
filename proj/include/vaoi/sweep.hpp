#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "config.hpp"
#include "critical_rate.hpp"
#include "errors.hpp"
#include "simulator.hpp"

namespace vaoi {

/// Partial override of the structural counts, applied on top of a sweep's
/// base configuration.
struct CaseOverride {
  std::optional<int> k, n, s, m;
};

/// Grid description for a comparison sweep: a lambda_e axis crossed with an
/// optional list of count cases, each run under each listed scheme.
struct SweepSpec {
  std::string name = "sweep";
  NetworkConfig base;                 ///< lambda_e of the base is replaced by the grid
  std::vector<double> lambda_e_grid;
  std::vector<CaseOverride> cases;    ///< empty means run the base counts only
  std::vector<Scheme> schemes{Scheme::Memory};
  std::uint64_t updates = 100000;
  unsigned replications = 4;
  std::uint64_t base_seed = 0;
};

enum class Containment {
  NotApplicable,         ///< row carries no bound pair or no simulated mean
  Contained,             ///< simulated mean inside [lower, upper]
  ViolatedWithCiOverlap, ///< outside, but within 3 half-widths of the crossed bound
  Violated,              ///< outside by more than 3 half-widths
};

/// One grid point for one population, carrying whatever analytic reference
/// exists alongside the simulated estimate.
struct ComparisonRow {
  Scheme scheme = Scheme::Memory;
  int k = 0, n = 0, s = 0, m = 0;
  double lambda_s = 0.0, lambda_e = 0.0;
  Population population = Population::Graph;
  std::optional<double> analytic;
  std::optional<BoundPair> bounds;
  bool hard_bound = false;  ///< bounds proven for this row (graph rows); class rows are advisory
  std::optional<double> sim_mean;
  std::optional<double> sim_ci_half;
  std::optional<double> rel_error;   ///< |sim - analytic| / analytic where both exist
  Containment containment = Containment::NotApplicable;
  std::uint64_t seed = 0;
  std::uint64_t horizon_updates = 0;
};

namespace detail {

inline Containment classify_containment(const BoundPair& b, double mean, double ci) {
  if (mean >= b.lower && mean <= b.upper) return Containment::Contained;
  double slack = 3.0 * (std::isfinite(ci) ? ci : 0.0);
  if (mean < b.lower) return mean >= b.lower - slack ? Containment::ViolatedWithCiOverlap
                                                     : Containment::Violated;
  return mean <= b.upper + slack ? Containment::ViolatedWithCiOverlap : Containment::Violated;
}

inline ComparisonRow make_row(const ValidatedConfig& v, Population pop, const ClassResult& cr,
                              std::uint64_t seed, std::uint64_t horizon) {
  ComparisonRow row;
  row.scheme = v.cfg.scheme;
  row.k = v.cfg.k;
  row.n = v.cfg.n;
  row.s = v.cfg.s;
  row.m = v.cfg.m;
  row.lambda_s = v.cfg.lambda_s;
  row.lambda_e = v.homogeneous() ? v.lambda_e() : 0.0;
  row.population = pop;
  row.seed = seed;
  row.horizon_updates = horizon;
  AnalyticRef ref = analytic_reference(v, pop);
  row.analytic = ref.value;
  row.bounds = ref.bounds;
  row.hard_bound = ref.bounds.has_value() && pop == Population::Graph;
  if (cr.size > 0) {
    row.sim_mean = cr.mean;
    row.sim_ci_half = cr.ci_half;
    if (row.analytic && *row.analytic != 0.0)
      row.rel_error = std::fabs(*row.sim_mean - *row.analytic) / std::fabs(*row.analytic);
    if (row.bounds)
      row.containment = classify_containment(*row.bounds, *row.sim_mean, cr.ci_half);
  }
  return row;
}

} // namespace detail

/// Applies one case override to the sweep's base counts.
inline NetworkConfig apply_case(const NetworkConfig& base, const CaseOverride& c, double lambda_e,
                                Scheme scheme) {
  NetworkConfig cfg = base;
  if (c.k) cfg.k = *c.k;
  if (c.n) cfg.n = *c.n;
  if (c.s) cfg.s = *c.s;
  if (c.m) cfg.m = *c.m;
  cfg.edges = HomogeneousRates{lambda_e};
  cfg.scheme = scheme;
  return cfg;
}

/// Runs the full grid. Row order is deterministic: cases outermost, then the
/// lambda_e axis, then schemes, then populations (subscriber, nonsubscriber,
/// graph; empty classes are skipped). Each run gets its own seed stream
/// derived from the spec's base seed and the run's position. Any validation
/// or simulation error aborts the whole sweep.
inline std::vector<ComparisonRow> run_sweep(const SweepSpec& spec, unsigned threads = 0) {
  if (spec.lambda_e_grid.empty()) throw DomainError("sweep needs a lambda_e grid");
  if (spec.schemes.empty()) throw DomainError("sweep needs at least one scheme");
  if (!std::holds_alternative<HomogeneousRates>(spec.base.edges))
    throw DomainError("sweeps cover homogeneous networks only");
  std::vector<CaseOverride> cases = spec.cases;
  if (cases.empty()) cases.push_back(CaseOverride{});

  std::vector<ComparisonRow> rows;
  std::uint64_t run_index = 0;
  for (const auto& cs : cases) {
    for (double le : spec.lambda_e_grid) {
      for (Scheme scheme : spec.schemes) {
        ValidatedConfig v = validate_config(apply_case(spec.base, cs, le, scheme));
        SimOptions opt;
        opt.horizon = Horizon::updates(spec.updates);
        opt.seed = derive_stream_seed(spec.base_seed, run_index++);
        ReplicationResult rep = run_replications(v, opt, spec.replications, threads);
        std::uint64_t realized = rep.runs.front().counts.updates;
        if (v.cfg.s > 0)
          rows.push_back(detail::make_row(v, Population::Subscriber, rep.subscriber, opt.seed, realized));
        if (v.cfg.s < v.cfg.m)
          rows.push_back(detail::make_row(v, Population::Nonsubscriber, rep.nonsubscriber, opt.seed, realized));
        rows.push_back(detail::make_row(v, Population::Graph, rep.graph, opt.seed, realized));
      }
    }
  }
  return rows;
}

/// Outcome of checking every bound-carrying row of a sweep.
struct BoundAudit {
  std::size_t checked = 0;
  std::size_t contained = 0;
  std::size_t overlap = 0;
  std::size_t violated = 0;
  std::vector<std::size_t> violated_rows;  ///< hard rows beyond CI slack
  std::vector<std::size_t> warning_rows;   ///< advisory (per-class) rows beyond CI slack
  bool pass = true;                        ///< no hard row violated
};

inline BoundAudit audit_bounds(const std::vector<ComparisonRow>& rows) {
  BoundAudit a;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.containment == Containment::NotApplicable) continue;
    ++a.checked;
    switch (r.containment) {
      case Containment::Contained:
        ++a.contained;
        break;
      case Containment::ViolatedWithCiOverlap:
        ++a.overlap;
        break;
      default:
        ++a.violated;
        if (r.hard_bound) {
          a.violated_rows.push_back(i);
          a.pass = false;
        } else {
          a.warning_rows.push_back(i);
        }
        break;
    }
  }
  return a;
}

/// One network size of a finite-size-to-limit trend.
struct ConvergencePoint {
  int m = 0;
  double analytic = 0.0;
  double sim_mean = 0.0;
  double sim_ci_half = 0.0;
  double asymptote = 0.0;
  double gap = 0.0;  ///< |analytic - asymptote|
};

struct ConvergenceStudy {
  std::vector<ConvergencePoint> points;
  bool tail_monotone = false;  ///< gap shrinks over the final three points
};

/// Total-key growth sequence n = floor(alpha m), s = n, comparing finite-size
/// graph averages against the large-network limit.
inline ConvergenceStudy convergence_study(double alpha, int k, double lambda_s, double lambda_e,
                                          const std::vector<int>& m_sequence, Scheme scheme,
                                          std::uint64_t updates = 30000, unsigned replications = 2,
                                          std::uint64_t base_seed = 0, unsigned threads = 0) {
  if (m_sequence.empty()) throw DomainError("need at least one network size");
  ConvergenceStudy study;
  double limit = scheme == Scheme::Memory
                     ? asymptote_memory(k, alpha, lambda_s, lambda_e)
                     : asymptote_memoryless(k, alpha, lambda_s, lambda_e, Population::Graph);
  std::uint64_t run_index = 0;
  for (int m : m_sequence) {
    int n = static_cast<int>(std::floor(alpha * m));
    ValidatedConfig v =
        validate_config(make_homogeneous(k, n, n, m, lambda_s, lambda_e, scheme));
    ConvergencePoint p;
    p.m = m;
    p.asymptote = limit;
    p.analytic = *analytic_reference(v, Population::Graph).value;
    p.gap = std::fabs(p.analytic - limit);
    SimOptions opt;
    opt.horizon = Horizon::updates(updates);
    opt.seed = derive_stream_seed(base_seed, run_index++);
    ReplicationResult rep = run_replications(v, opt, replications, threads);
    p.sim_mean = rep.graph.mean;
    p.sim_ci_half = rep.graph.ci_half;
    study.points.push_back(p);
  }
  std::size_t np = study.points.size();
  study.tail_monotone = np < 3 || (study.points[np - 3].gap >= study.points[np - 2].gap &&
                                   study.points[np - 2].gap >= study.points[np - 1].gap);
  return study;
}

/// One (k, epsilon) cell of the critical-gossip-rate table.
struct MemoryValuePoint {
  int k = 0;
  double epsilon = 0.0;
  double rate = 0.0;
  double gap_at_rate = 0.0;
  double gap_below_rate = 0.0;  ///< gap at 0.99 x rate, expected above epsilon
};

/// Critical gossip rates over a k grid and a set of epsilon targets, for the
/// full-subscription network s = n = m.
inline std::vector<MemoryValuePoint> memory_value_study(const std::vector<int>& k_grid, int n,
                                                        double lambda_s,
                                                        const std::vector<double>& eps_set) {
  std::vector<MemoryValuePoint> table;
  for (double eps : eps_set) {
    for (int k : k_grid) {
      CriticalRateQuery q;
      q.k = k;
      q.n = n;
      q.s = n;
      q.m = n;
      q.lambda_s = lambda_s;
      q.epsilon = eps;
      CriticalRateResult res = critical_gossip_rate(q);
      MemoryValuePoint p;
      p.k = k;
      p.epsilon = eps;
      p.rate = res.rate;
      p.gap_at_rate = res.gap_at_rate;
      p.gap_below_rate =
          res.rate > 0.0
              ? detail::scheme_gap(q, NetworkType::FullSubscription, 0.99 * res.rate)
              : 0.0;
      table.push_back(p);
    }
  }
  return table;
}

/// Memoryless closed-form ages as a function of subscription level.
struct SubscriptionCostRow {
  int m = 0;
  int s = 0;
  double subscriber = 0.0;    ///< NaN when s = 0
  double nonsubscriber = 0.0;
  double graph = 0.0;
};

inline std::vector<SubscriptionCostRow> subscription_cost_study(int k, int n, double lambda_s,
                                                                double lambda_e,
                                                                const std::vector<int>& s_grid,
                                                                const std::vector<int>& m_grid) {
  std::vector<SubscriptionCostRow> rows;
  for (int m : m_grid) {
    for (int s : s_grid) {
      if (s > n || n >= m) throw DomainError("cost study needs s <= n < m");
      SubscriptionCostRow row;
      row.m = m;
      row.s = s;
      row.subscriber =
          s > 0 ? age_memoryless_partial(k, n, s, m, lambda_s, lambda_e, NodeClass::Subscriber)
                : std::numeric_limits<double>::quiet_NaN();
      row.nonsubscriber =
          age_memoryless_partial(k, n, s, m, lambda_s, lambda_e, NodeClass::Nonsubscriber);
      row.graph = graph_average(s > 0 ? row.subscriber : 0.0, row.nonsubscriber, s, m);
      rows.push_back(row);
    }
  }
  return rows;
}

} // namespace vaoi
