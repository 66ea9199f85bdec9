/// Acceptance gate: ten release criteria, one [PASS]/[FAIL] line each.
/// Exits nonzero when any criterion fails.

#include <vaoi/vaoi.hpp>

#include "reference_sim.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace vaoi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double rel_err(double got, double want) { return std::fabs(got - want) / std::fabs(want); }

std::string num(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// C1: memory scheme, every holder subscribed, simulated class averages vs
/// the closed forms at three gossip rates.
Outcome memory_class_averages() {
  Outcome out;
  double worst = 0.0;
  const double grid[] = {20.0, 60.0, 100.0};
  for (int i = 0; i < 3; ++i) {
    ValidatedConfig v =
        validate_config(make_homogeneous(2, 6, 6, 10, 10.0, grid[i], Scheme::Memory));
    SimOptions opt;
    opt.horizon = Horizon::updates(100000);
    opt.seed = derive_stream_seed(101, static_cast<std::uint64_t>(i));
    ReplicationResult rep = run_replications(v, opt, 4, env_threads());
    double sub = age_memory_total_key(2, 6, 10, 10.0, grid[i], NodeClass::Subscriber);
    double non = age_memory_total_key(2, 6, 10, 10.0, grid[i], NodeClass::Nonsubscriber);
    double graph = graph_average(sub, non, 6, 10);
    worst = std::max({worst, rel_err(rep.subscriber.mean, sub),
                      rel_err(rep.nonsubscriber.mean, non), rel_err(rep.graph.mean, graph)});
  }
  out.pass = worst <= 0.03;
  out.detail = "3 rates x 3 classes, max rel err " + num(worst) + ", tol 0.03";
  return out;
}

/// C2: memoryless scheme, partial subscription, simulated class averages vs
/// the closed forms, plus the subscriber < nonsubscriber ordering.
Outcome memoryless_class_averages() {
  Outcome out;
  double worst = 0.0;
  bool ordered = true;
  const int ms[] = {12, 18};
  const double grid[] = {20.0, 40.0, 60.0, 80.0, 100.0};
  std::uint64_t stream = 0;
  for (int m : ms) {
    for (double le : grid) {
      ValidatedConfig v =
          validate_config(make_homogeneous(4, 8, 3, m, 10.0, le, Scheme::Memoryless));
      SimOptions opt;
      opt.horizon = Horizon::updates(100000);
      opt.seed = derive_stream_seed(202, stream++);
      ReplicationResult rep = run_replications(v, opt, 4, env_threads());
      double sub = age_memoryless_partial(4, 8, 3, m, 10.0, le, NodeClass::Subscriber);
      double non = age_memoryless_partial(4, 8, 3, m, 10.0, le, NodeClass::Nonsubscriber);
      double graph = graph_average(sub, non, 3, m);
      worst = std::max({worst, rel_err(rep.subscriber.mean, sub),
                        rel_err(rep.nonsubscriber.mean, non), rel_err(rep.graph.mean, graph)});
      ordered = ordered && sub < non && rep.subscriber.mean < rep.nonsubscriber.mean;
    }
  }
  out.pass = worst <= 0.03 && ordered;
  out.detail = "10 points x 3 classes, max rel err " + num(worst) + ", tol 0.03, ordering " +
               (ordered ? "held" : "broken");
  return out;
}

/// C3: memory-scheme sweeps over partial-subscription grids; every graph
/// average must sit inside its analytic bound pair up to CI slack.
Outcome sweep_bounds() {
  Outcome out;
  SweepSpec varied_s_m;
  varied_s_m.name = "bounds-smaller-grid";
  varied_s_m.base = make_homogeneous(4, 8, 3, 12, 10.0, 20.0, Scheme::Memory);
  varied_s_m.lambda_e_grid = {20.0, 40.0, 60.0, 80.0, 100.0};
  varied_s_m.cases = {{{}, {}, 3, 12}, {{}, {}, 5, 12}, {{}, {}, 3, 18}, {{}, {}, 5, 18}};
  varied_s_m.base_seed = 301;

  SweepSpec wider_s = varied_s_m;
  wider_s.name = "bounds-wider-grid";
  wider_s.cases = {{{}, {}, 0, 12}, {{}, {}, 3, 12}, {{}, {}, 5, 12}, {{}, {}, 8, 12},
                   {{}, {}, 0, 18}, {{}, {}, 3, 18}, {{}, {}, 5, 18}, {{}, {}, 8, 18}};
  wider_s.base_seed = 302;

  std::size_t checked = 0, contained = 0, overlap = 0, hard = 0;
  bool pass = true;
  for (const SweepSpec* spec : {&varied_s_m, &wider_s}) {
    std::vector<ComparisonRow> rows = run_sweep(*spec, env_threads());
    BoundAudit audit = audit_bounds(rows);
    checked += audit.checked;
    contained += audit.contained;
    overlap += audit.overlap;
    hard += audit.violated_rows.size();
    pass = pass && audit.pass;
  }
  out.pass = pass;
  std::ostringstream os;
  os << checked << " bounded rows: " << contained << " contained, " << overlap
     << " within CI slack, " << hard << " hard violations";
  out.detail = os.str();
  return out;
}

/// C4: closed forms at m = n = 2000 land within 1% of the large-network
/// limits; simulations at m = n = 200 land within 5% of the same-size forms.
Outcome asymptote_approach() {
  Outcome out;
  const int k = 10;
  const double ls = 15.0, le = 50.0;
  double mem_big = age_memory_total_key(k, 2000, 2000, ls, le, NodeClass::Subscriber);
  double ml_big = age_memoryless_partial(k, 2000, 2000, 2000, ls, le, NodeClass::Subscriber);
  double e_mem = rel_err(mem_big, asymptote_memory(k, 1.0, ls, le));
  double e_ml = rel_err(ml_big, asymptote_memoryless(k, 1.0, ls, le, Population::Subscriber));

  double sim_err[2] = {0.0, 0.0};
  int idx = 0;
  for (Scheme sc : {Scheme::Memory, Scheme::Memoryless}) {
    ValidatedConfig v = validate_config(make_homogeneous(k, 200, 200, 200, ls, le, sc));
    SimOptions opt;
    opt.horizon = Horizon::updates(30000);
    opt.seed = derive_stream_seed(404, static_cast<std::uint64_t>(idx));
    ReplicationResult rep = run_replications(v, opt, 2, env_threads());
    double closed = sc == Scheme::Memory
                        ? age_memory_total_key(k, 200, 200, ls, le, NodeClass::Subscriber)
                        : age_memoryless_partial(k, 200, 200, 200, ls, le, NodeClass::Subscriber);
    sim_err[idx++] = rel_err(rep.graph.mean, closed);
  }
  out.pass = e_mem <= 0.01 && e_ml <= 0.01 && sim_err[0] <= 0.05 && sim_err[1] <= 0.05;
  out.detail = "limit gap " + num(e_mem) + "/" + num(e_ml) + " (tol 0.01), sim gap " +
               num(sim_err[0]) + "/" + num(sim_err[1]) + " (tol 0.05)";
  return out;
}

/// C5: decode-race helper values vs fresh Monte Carlo on a random grid.
Outcome race_helpers_match_mc() {
  Outcome out;
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(515151);
  double worst = 0.0;
  int points = 0;
  while (points < 20) {
    int k = 1 + static_cast<int>(rng.uniform_below(5));
    int n = k + 1 + static_cast<int>(rng.uniform_below(6));
    int m = n + static_cast<int>(rng.uniform_below(9));
    double ls = 5.0 + 10.0 * rng.uniform01();
    double le = ls * (3.0 + 9.0 * rng.uniform01());
    double p = prob_decode_before_update(k, n, m, ls, le);
    if (p < 0.15) continue;
    double e = expected_min_orderstat_update(k, n, m, ls, le);
    const int draws = 1000000;
    double sum = 0.0;
    long wins = 0;
    for (int d = 0; d < draws; ++d) {
      double t = 0.0;
      bool won = true;
      for (int i = 1; i <= k; ++i) {
        double gather = rng.exponential(le * coeff_B(n, m, i));
        double update = rng.exponential(ls);
        if (gather < update) {
          t += gather;
        } else {
          t += update;
          won = false;
          break;
        }
      }
      sum += t;
      if (won) ++wins;
    }
    worst = std::max({worst, rel_err(sum / draws, e),
                      rel_err(static_cast<double>(wins) / draws, p)});
    ++points;
  }
  double elapsed = seconds_since(t0);
  out.pass = worst <= 0.01 && elapsed < 30.0;
  out.detail = "20 points x 1e6 draws, max rel err " + num(worst) + ", tol 0.01, " +
               num(elapsed) + " s budget 30 s";
  return out;
}

/// C6: memoryless renewal cycles are geometric; per-node mean updates per
/// cycle match 1 / Pr(decode before update) within three standard errors.
Outcome cycle_length_geometry() {
  Outcome out;
  ValidatedConfig v =
      validate_config(make_homogeneous(2, 10, 10, 10, 10.0, 40.0, Scheme::Memoryless));
  SimOptions opt;
  opt.horizon = Horizon::updates(100000);
  opt.seed = 606;
  SimResult res = run_simulation(v, opt);
  double mu = prob_decode_before_update(2, 10, 10, 10.0, 40.0);
  double want = 1.0 / mu;
  double worst_z = 0.0;
  bool ok = true;
  for (const NodeResult& nd : res.node) {
    if (!(nd.se_cycle_updates > 0.0)) {
      ok = false;
      continue;
    }
    double z = std::fabs(nd.mean_cycle_updates - want) / nd.se_cycle_updates;
    worst_z = std::max(worst_z, z);
    ok = ok && z <= 3.0;
  }
  out.pass = ok;
  out.detail = "target " + num(want) + " updates per cycle, worst node |z| " + num(worst_z) +
               ", limit 3";
  return out;
}

/// C7: over random networks where every holder subscribes, the memoryless
/// age dominates the memory age, analytically and in paired simulations.
Outcome scheme_ordering() {
  Outcome out;
  Rng rng(707070);
  bool analytic_ok = true, sim_ok = true;
  int positive_margins = 0, sim_checks = 0;
  for (int t = 0; t < 200; ++t) {
    NetworkConfig mem_cfg = support::random_total_key(rng, Scheme::Memory);
    NetworkConfig ml_cfg = mem_cfg;
    ml_cfg.scheme = Scheme::Memoryless;
    ValidatedConfig vm = validate_config(mem_cfg);
    ValidatedConfig vl = validate_config(ml_cfg);

    for (Population pop : {Population::Subscriber, Population::Nonsubscriber, Population::Graph}) {
      AnalyticRef rm = analytic_reference(vm, pop);
      AnalyticRef rl = analytic_reference(vl, pop);
      if (rm.value && rl.value)
        analytic_ok =
            analytic_ok && *rl.value >= *rm.value - 1e-12 * std::max(1.0, std::fabs(*rm.value));
    }

    SimOptions opt;
    opt.horizon = Horizon::updates(8000);
    opt.seed = derive_stream_seed(707, static_cast<std::uint64_t>(t));
    ReplicationResult rep_m = run_replications(vm, opt, 2, env_threads());
    ReplicationResult rep_l = run_replications(vl, opt, 2, env_threads());
    double slack = 3.0 * (rep_m.graph.ci_half + rep_l.graph.ci_half);
    sim_ok = sim_ok && rep_l.graph.mean >= rep_m.graph.mean - slack;
    if (rep_l.graph.mean >= rep_m.graph.mean) ++positive_margins;
    ++sim_checks;
  }
  out.pass = analytic_ok && sim_ok;
  std::ostringstream os;
  os << "200 networks, analytic ordering " << (analytic_ok ? "held" : "broken")
     << ", simulated ordering " << (sim_ok ? "held" : "broken") << " (" << positive_margins << "/"
     << sim_checks << " positive margins)";
  out.detail = os.str();
  return out;
}

/// C8: critical gossip rates rise with k, rise as the target gap shrinks,
/// close the gap at the rate, and leave it open one percent below.
Outcome critical_rate_consistency() {
  Outcome out;
  std::vector<int> ks;
  for (int k = 2; k <= 12; ++k) ks.push_back(k);
  std::vector<MemoryValuePoint> table = memory_value_study(ks, 30, 15.0, {1.0, 0.1, 0.01});
  const std::size_t kc = ks.size();
  bool ok = table.size() == 3 * kc;
  if (ok) {
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t i = 1; i < kc; ++i)
        ok = ok && table[b * kc + i].rate > table[b * kc + i - 1].rate;
    for (std::size_t i = 0; i < kc; ++i) {
      ok = ok && table[kc + i].rate > table[i].rate;
      ok = ok && table[2 * kc + i].rate > table[kc + i].rate;
    }
    for (const MemoryValuePoint& p : table) {
      ok = ok && p.gap_at_rate <= p.epsilon * (1.0 + 1e-9);
      ok = ok && p.gap_below_rate > p.epsilon;
    }
  }
  out.pass = ok;
  double lo = table.empty() ? 0.0 : table.front().rate;
  double hi = 0.0;
  for (const MemoryValuePoint& p : table) {
    lo = std::min(lo, p.rate);
    hi = std::max(hi, p.rate);
  }
  out.detail = "33 solves, rates " + num(lo) + " to " + num(hi) +
               ", monotone in k and target, gap closed at rate, open at 0.99 x rate";
  if (!ok) out.detail = "monotonicity or gap condition broken";
  return out;
}

/// C9: structural invariants on random runs: the engine decodes at exactly
/// the instants a naive reference model does (so never below the key
/// threshold), the memory scheme with every holder subscribed abandons no
/// version, ages step up by one and drop only at decodes, and a repeated
/// seed reproduces the run bit for bit.
Outcome structural_invariants() {
  Outcome out;
  Rng rng(909090);
  bool ok = true;
  std::size_t checked_decodes = 0;
  int total_key_runs = 0;
  const std::uint64_t budgets[] = {1000, 2500, 5000, 10000};
  for (int trial = 0; trial < 14; ++trial) {
    Scheme scheme = trial % 2 ? Scheme::Memoryless : Scheme::Memory;
    NetworkConfig cfg = trial < 10 ? support::random_any(rng, scheme, 6)
                                   : support::random_total_key(rng, Scheme::Memory, 6);
    ValidatedConfig v = validate_config(cfg);
    SimOptions opt;
    opt.horizon = Horizon::updates(budgets[trial % 4]);
    opt.seed = derive_stream_seed(900, static_cast<std::uint64_t>(trial));

    std::vector<SimEvent> events;
    std::vector<TraceEntry> entries;
    vaoi::detail::Engine engine(v, opt);
    engine.set_record(&events);
    engine.set_trace(&entries, 20000000);
    SimResult res = engine.run();

    refsim::RefOutcome ref = refsim::run_reference(v, events, res.end_time);
    std::vector<const TraceEntry*> decodes;
    for (const TraceEntry& e : entries)
      if (e.kind == TraceKind::Decode) decodes.push_back(&e);
    ok = ok && decodes.size() == ref.decode_node.size();
    if (ok) {
      for (std::size_t i = 0; i < decodes.size(); ++i)
        ok = ok && decodes[i]->node == ref.decode_node[i] &&
             decodes[i]->time == ref.decode_time[i] &&
             decodes[i]->version == ref.decode_version[i];
    }
    checked_decodes += decodes.size();
    ok = ok && res.counts.misses == ref.misses;
    std::int64_t ref_stops = 0;
    for (std::int64_t d : ref.early_stops) ref_stops += d;
    ok = ok && res.counts.early_stops == static_cast<std::uint64_t>(ref_stops);

    if (cfg.scheme == Scheme::Memory && cfg.s == cfg.n) {
      ok = ok && res.counts.early_stops == 0;
      ++total_key_runs;
    }

    for (const TraceEntry& e : entries) {
      if (e.kind == TraceKind::AgeStep) ok = ok && e.age_after == e.age_before + 1;
      if (e.kind == TraceKind::Decode) ok = ok && e.age_after >= 0 && e.age_after < e.age_before;
    }

    SimResult again = run_simulation(v, opt);
    ok = ok && again.end_time == res.end_time && again.counts.events == res.counts.events &&
         again.counts.decodes == res.counts.decodes;
    for (int j = 0; j < cfg.m && ok; ++j)
      ok = ok && again.node[static_cast<std::size_t>(j)].avg_age ==
                     res.node[static_cast<std::size_t>(j)].avg_age;
  }
  ok = ok && checked_decodes > 500 && total_key_runs >= 4;
  out.pass = ok;
  std::ostringstream os;
  os << "14 runs, " << checked_decodes << " decode instants matched, " << total_key_runs
     << " no-abandon runs, determinism held";
  out.detail = os.str();
  return out;
}

/// C10: the reported per-node average equals measured area over measured
/// time to within 1e-9 relative.
Outcome renewal_identity() {
  Outcome out;
  Rng rng(101010);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Scheme scheme = trial % 2 ? Scheme::Memoryless : Scheme::Memory;
    ValidatedConfig v = validate_config(support::random_any(rng, scheme));
    SimOptions opt;
    opt.horizon = Horizon::updates(2000);
    opt.seed = derive_stream_seed(1000, static_cast<std::uint64_t>(trial));
    SimResult res = run_simulation(v, opt);
    for (const NodeResult& nd : res.node) {
      if (!(nd.measured_time > 0.0)) {
        worst = 1.0;
        continue;
      }
      double direct = nd.measured_area / nd.measured_time;
      double scale = std::max(1.0, std::fabs(direct));
      worst = std::max(worst, std::fabs(nd.avg_age - direct) / scale);
    }
  }
  out.pass = worst <= 1e-9;
  out.detail = "50 runs, max identity error " + num(worst) + ", tol 1e-9";
  return out;
}

} // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*fn)();
  };
  const Criterion list[] = {
      {"memory scheme matches closed-form class averages", memory_class_averages},
      {"memoryless scheme matches closed-form class averages", memoryless_class_averages},
      {"partial-subscription sweeps stay inside analytic bounds", sweep_bounds},
      {"large networks approach the asymptotic ages", asymptote_approach},
      {"decode-race helpers match Monte Carlo", race_helpers_match_mc},
      {"decode cycle lengths are geometric", cycle_length_geometry},
      {"memory scheme is never staler than memoryless", scheme_ordering},
      {"critical gossip rates are consistent and monotone", critical_rate_consistency},
      {"simulator structural invariants hold", structural_invariants},
      {"renewal accounting identity holds", renewal_identity},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : list) {
    ++index;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("unexpected exception: ") + e.what();
    }
    std::printf("[%s] C%d %s (%s) [%.1f s]\n", o.pass ? "PASS" : "FAIL", index, c.name,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  if (failed == 0)
    std::printf("acceptance: all 10 criteria passed\n");
  else
    std::printf("acceptance: %d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
