#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <vaoi/vaoi.hpp>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_other = 1;
constexpr int exit_usage = 2;
constexpr int exit_config = 3;
constexpr int exit_audit = 4;

std::string g_command;

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) out += " ";
    out += argv[i];
  }
  return out;
}

vaoi::OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return vaoi::OutputFormat::Csv;
  if (s == "json") return vaoi::OutputFormat::Json;
  throw vaoi::IoError("format must be csv or json");
}

void write_output(const std::string& path, vaoi::OutputFormat fmt, vaoi::EnvelopeMeta meta,
                  const vaoi::Table& table) {
  meta.command = g_command;
  if (path.empty() || path == "-") {
    vaoi::emit_table(std::cout, fmt, meta, table);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vaoi::IoError("cannot write '" + path + "'");
  vaoi::emit_table(out, fmt, meta, table);
}

vaoi::NetworkConfig load_network(const std::string& path, const std::string& scheme_override) {
  vaoi::NetworkConfig cfg = vaoi::parse_network_config(vaoi::load_kv_file(path));
  if (!scheme_override.empty())
    cfg.scheme = scheme_override == "memory" ? vaoi::Scheme::Memory : vaoi::Scheme::Memoryless;
  return cfg;
}

vaoi::Population parse_population(const std::string& s) {
  if (s == "subscriber") return vaoi::Population::Subscriber;
  if (s == "nonsubscriber") return vaoi::Population::Nonsubscriber;
  if (s == "graph") return vaoi::Population::Graph;
  throw vaoi::IoError("class must be subscriber, nonsubscriber, or graph");
}

struct CommonOpts {
  std::string config_path;
  std::string scheme;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 0;
};

void add_format_opts(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--out", c.out_path, "output path, - for stdout")->default_val("-");
  cmd->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->default_val("csv");
}

struct InlineQuery {
  int k = -1, n = -1, s = -1, m = -1;
  double lambda_s = 0.0, lambda_e = 0.0;
};

int run_analytic(const CommonOpts& c, const std::string& population, const InlineQuery& q) {
  vaoi::NetworkConfig cfg;
  if (!c.config_path.empty()) {
    cfg = load_network(c.config_path, c.scheme);
  } else {
    if (q.k < 0 || q.n < 0 || q.lambda_s <= 0 || q.lambda_e <= 0)
      throw vaoi::IoError("analytic needs --config or the full --k/--n/--s/--m/"
                          "--lambda-s/--lambda-e set");
    vaoi::Scheme scheme =
        c.scheme == "memoryless" ? vaoi::Scheme::Memoryless : vaoi::Scheme::Memory;
    cfg = vaoi::make_homogeneous(q.k, q.n, q.s < 0 ? q.n : q.s, q.m < 0 ? q.n : q.m, q.lambda_s,
                                 q.lambda_e, scheme);
  }
  vaoi::ValidatedConfig v = vaoi::validate_config(cfg);
  vaoi::Population pop = parse_population(population);
  vaoi::AnalyticRef ref = vaoi::analytic_reference(v, pop);
  if (!ref.value && !ref.bounds)
    throw vaoi::DomainError("no closed form for this configuration and class");

  if (c.out_path.empty() || c.out_path == "-") {
    if (ref.value)
      std::cout << vaoi::format_g12(*ref.value) << "\n";
    else
      std::cout << vaoi::format_g12(ref.bounds->lower) << " " << vaoi::format_g12(ref.bounds->upper)
                << "\n";
    return exit_ok;
  }

  std::vector<vaoi::ComparisonRow> rows;
  for (vaoi::Population p : {vaoi::Population::Subscriber, vaoi::Population::Nonsubscriber,
                             vaoi::Population::Graph}) {
    if (p == vaoi::Population::Subscriber && v.cfg.s == 0) continue;
    if (p == vaoi::Population::Nonsubscriber && v.cfg.s == v.cfg.m) continue;
    rows.push_back(vaoi::detail::make_row(v, p, vaoi::ClassResult{}, 0, 0));
  }
  vaoi::EnvelopeMeta meta;
  meta.seed = 0;
  meta.config_echo = vaoi::config_echo(v.cfg);
  meta.config_hash = vaoi::hash_hex(meta.config_echo);
  write_output(c.out_path, parse_format(c.format), meta, vaoi::comparison_table(rows));
  return exit_ok;
}

int run_simulate(const CommonOpts& c, std::uint64_t updates, double time_horizon,
                 unsigned replications) {
  vaoi::ValidatedConfig v = vaoi::validate_config(load_network(c.config_path, c.scheme));
  vaoi::SimOptions opt;
  opt.horizon = time_horizon > 0 ? vaoi::Horizon::duration(time_horizon)
                                 : vaoi::Horizon::updates(updates);
  opt.seed = c.seed;
  vaoi::ReplicationResult rep =
      vaoi::run_replications(v, opt, replications, vaoi::env_threads());

  std::uint64_t realized = rep.runs.front().counts.updates;
  std::vector<vaoi::ComparisonRow> rows;
  if (v.cfg.s > 0)
    rows.push_back(vaoi::detail::make_row(v, vaoi::Population::Subscriber, rep.subscriber, c.seed,
                                          realized));
  if (v.cfg.s < v.cfg.m)
    rows.push_back(vaoi::detail::make_row(v, vaoi::Population::Nonsubscriber, rep.nonsubscriber,
                                          c.seed, realized));
  rows.push_back(vaoi::detail::make_row(v, vaoi::Population::Graph, rep.graph, c.seed, realized));

  vaoi::EnvelopeMeta meta;
  meta.seed = c.seed;
  meta.config_echo = vaoi::config_echo(v.cfg);
  meta.config_hash = vaoi::hash_hex(meta.config_echo);
  meta.sim_end_time = rep.runs.front().end_time;
  meta.sim_updates = realized;
  write_output(c.out_path, parse_format(c.format), meta, vaoi::comparison_table(rows));
  return exit_ok;
}

int run_sweep_cmd(const CommonOpts& c, const std::string& preset_name, std::uint64_t updates,
                  unsigned replications, bool updates_set, bool replications_set, bool seed_set) {
  std::string path = !preset_name.empty() ? vaoi::find_preset_file(preset_name) : c.config_path;
  if (path.empty()) throw vaoi::IoError("sweep needs --preset NAME or --config PATH");
  std::string name = !preset_name.empty()
                         ? preset_name
                         : std::filesystem::path(path).stem().string();
  vaoi::PresetSpec preset = vaoi::parse_preset(vaoi::load_kv_file(path), name);

  vaoi::EnvelopeMeta meta;
  meta.config_echo = "preset=" + name;
  unsigned threads = vaoi::env_threads();

  if (preset.kind == vaoi::PresetSpec::Kind::Comparison) {
    vaoi::SweepSpec sw = preset.sweep;
    if (updates_set) sw.updates = updates;
    if (replications_set) sw.replications = replications;
    if (seed_set) sw.base_seed = c.seed;
    std::vector<vaoi::ComparisonRow> rows = vaoi::run_sweep(sw, threads);
    vaoi::BoundAudit audit = vaoi::audit_bounds(rows);

    meta.seed = sw.base_seed;
    meta.config_echo += ";" + vaoi::config_echo(sw.base);
    meta.config_hash = vaoi::hash_hex(meta.config_echo);
    write_output(c.out_path, parse_format(c.format), meta, vaoi::comparison_table(rows));

    if (audit.checked > 0) {
      std::cerr << "bound audit: " << audit.checked << " checked, " << audit.contained
                << " contained, " << audit.overlap << " within CI slack, " << audit.violated
                << " violated\n";
      for (std::size_t i : audit.warning_rows)
        std::cerr << "warning: advisory bound miss at row " << i << "\n";
      if (!audit.pass) {
        for (std::size_t i : audit.violated_rows)
          std::cerr << "error: hard bound violation at row " << i << "\n";
        return exit_audit;
      }
    }
    return exit_ok;
  }

  if (preset.kind == vaoi::PresetSpec::Kind::Convergence) {
    vaoi::ConvergenceSpec cs = preset.convergence;
    if (updates_set) cs.updates = updates;
    if (replications_set) cs.replications = replications;
    if (seed_set) cs.base_seed = c.seed;
    vaoi::Table table;
    std::uint64_t stream = 0;
    for (double le : cs.lambda_e_grid) {
      vaoi::ConvergenceStudy study = vaoi::convergence_study(
          cs.alpha, cs.k, cs.lambda_s, le, cs.m_sequence, cs.scheme, cs.updates, cs.replications,
          vaoi::derive_stream_seed(cs.base_seed, stream++), threads);
      vaoi::Table part = vaoi::convergence_table(study, cs.scheme, cs.alpha, cs.k, cs.lambda_s, le);
      if (table.columns.empty()) table.columns = part.columns;
      for (auto& row : part.rows) table.rows.push_back(std::move(row));
    }
    meta.seed = cs.base_seed;
    meta.config_hash = vaoi::hash_hex(meta.config_echo);
    write_output(c.out_path, parse_format(c.format), meta, table);
    return exit_ok;
  }

  if (preset.kind == vaoi::PresetSpec::Kind::CriticalRate) {
    const vaoi::MemoryValueSpec& mv = preset.memory_value;
    std::vector<vaoi::MemoryValuePoint> points =
        vaoi::memory_value_study(mv.k_grid, mv.n, mv.lambda_s, mv.eps_set);
    meta.config_hash = vaoi::hash_hex(meta.config_echo);
    write_output(c.out_path, parse_format(c.format), meta,
                 vaoi::memory_value_table(points, mv.n, mv.lambda_s));
    return exit_ok;
  }

  const vaoi::SubscriptionCostSpec& sc = preset.cost;
  std::vector<vaoi::SubscriptionCostRow> rows =
      vaoi::subscription_cost_study(sc.k, sc.n, sc.lambda_s, sc.lambda_e, sc.s_grid, sc.m_grid);
  meta.config_hash = vaoi::hash_hex(meta.config_echo);
  write_output(c.out_path, parse_format(c.format), meta,
               vaoi::subscription_cost_table(rows, sc.k, sc.n, sc.lambda_s, sc.lambda_e));
  return exit_ok;
}

int run_critical_rate(const CommonOpts& c, const vaoi::CriticalRateQuery& query) {
  vaoi::CriticalRateResult res = vaoi::critical_gossip_rate(query);
  if (c.out_path.empty() || c.out_path == "-") {
    std::cout << vaoi::format_g12(res.rate) << "\n";
    return exit_ok;
  }
  vaoi::Table t;
  t.columns = {"k", "n", "s", "m", "lambda_s", "epsilon", "critical_rate", "gap_at_rate",
               "bound_only"};
  t.rows.push_back({static_cast<std::int64_t>(query.k), static_cast<std::int64_t>(query.n),
                    static_cast<std::int64_t>(query.s), static_cast<std::int64_t>(query.m),
                    query.lambda_s, query.epsilon, res.rate, res.gap_at_rate,
                    static_cast<std::int64_t>(res.bound_only ? 1 : 0)});
  vaoi::EnvelopeMeta meta;
  std::ostringstream echo;
  echo << "critical_rate;k=" << query.k << ";n=" << query.n << ";s=" << query.s << ";m=" << query.m
       << ";lambda_s=" << vaoi::format_g12(query.lambda_s)
       << ";epsilon=" << vaoi::format_g12(query.epsilon);
  meta.config_echo = echo.str();
  meta.config_hash = vaoi::hash_hex(meta.config_echo);
  write_output(c.out_path, parse_format(c.format), meta, t);
  return exit_ok;
}

int run_validate(const CommonOpts& c) {
  vaoi::ValidatedConfig v = vaoi::validate_config(load_network(c.config_path, c.scheme));
  std::string echo = vaoi::config_echo(v.cfg);
  std::cout << "ok " << vaoi::to_string(v.type) << "\n";
  std::cout << "config " << echo << "\n";
  std::cout << "config_hash " << vaoi::hash_hex(echo) << "\n";
  return exit_ok;
}

int run_trace(const CommonOpts& c, std::uint64_t updates, double time_horizon) {
  vaoi::ValidatedConfig v = vaoi::validate_config(load_network(c.config_path, c.scheme));
  vaoi::SimOptions opt;
  opt.horizon = time_horizon > 0 ? vaoi::Horizon::duration(time_horizon)
                                 : vaoi::Horizon::updates(updates);
  opt.seed = c.seed;
  vaoi::TraceResult tr = vaoi::trace_events(v, opt);
  vaoi::EnvelopeMeta meta;
  meta.seed = c.seed;
  meta.config_echo = vaoi::config_echo(v.cfg);
  meta.config_hash = vaoi::hash_hex(meta.config_echo);
  meta.sim_end_time = tr.result.end_time;
  meta.sim_updates = tr.result.counts.updates;
  write_output(c.out_path, parse_format(c.format), meta, vaoi::trace_table(tr.entries));
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"version age of information in gossip networks: closed forms and simulation"};
  app.require_subcommand(1);

  CommonOpts copt;
  std::string population = "graph";
  std::uint64_t updates = 100000;
  double time_horizon = 0.0;
  unsigned replications = 4;
  std::string preset_name;
  vaoi::CriticalRateQuery query;
  query.s = -1;
  query.m = -1;

  InlineQuery iq;

  CLI::App* analytic = app.add_subcommand("analytic", "closed-form age values for one config");
  analytic->add_option("--config", copt.config_path, "network config file");
  analytic->add_option("--k", iq.k, "decoding threshold minus one");
  analytic->add_option("--n", iq.n, "key holders");
  analytic->add_option("--s", iq.s, "subscribers, defaults to n");
  analytic->add_option("--m", iq.m, "receivers, defaults to n");
  analytic->add_option("--lambda-s", iq.lambda_s, "source update rate");
  analytic->add_option("--lambda-e", iq.lambda_e, "total gossip rate per node");
  analytic->add_option("--scheme", copt.scheme, "memory or memoryless")
      ->check(CLI::IsMember({"memory", "memoryless"}));
  analytic->add_option("--class", population, "subscriber, nonsubscriber, or graph")
      ->default_val("graph");
  add_format_opts(analytic, copt);

  CLI::App* simulate = app.add_subcommand("simulate", "simulate one config");
  simulate->add_option("--config", copt.config_path, "network config file")->required();
  simulate->add_option("--scheme", copt.scheme, "override the configured scheme")
      ->check(CLI::IsMember({"memory", "memoryless"}));
  CLI::Option* sim_updates = simulate->add_option("--updates", updates, "source updates to run");
  simulate->add_option("--time", time_horizon, "time horizon")->excludes(sim_updates);
  simulate->add_option("--seed", copt.seed, "base seed")->default_val(0);
  simulate->add_option("--replications", replications, "independent replications")->default_val(4);
  add_format_opts(simulate, copt);

  CLI::App* sweep = app.add_subcommand("sweep", "run a preset or sweep config");
  CLI::Option* sweep_preset = sweep->add_option("--preset", preset_name, "preset name");
  sweep->add_option("--config", copt.config_path, "sweep config file")->excludes(sweep_preset);
  CLI::Option* sweep_updates = sweep->add_option("--updates", updates, "override updates per run");
  CLI::Option* sweep_reps =
      sweep->add_option("--replications", replications, "override replications");
  CLI::Option* sweep_seed = sweep->add_option("--seed", copt.seed, "override base seed");
  add_format_opts(sweep, copt);

  CLI::App* critical = app.add_subcommand("critical-rate", "smallest closing gossip rate");
  critical->add_option("--k", query.k, "decoding threshold minus one")->required();
  critical->add_option("--n", query.n, "key holders")->required();
  critical->add_option("--s", query.s, "subscribers, defaults to n");
  critical->add_option("--m", query.m, "receivers, defaults to n");
  critical->add_option("--lambda-s", query.lambda_s, "source update rate")->required();
  critical->add_option("--epsilon", query.epsilon, "age gap target")->required();
  add_format_opts(critical, copt);

  CLI::App* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", copt.config_path, "network config file")->required();
  validate->add_option("--scheme", copt.scheme, "override the configured scheme")
      ->check(CLI::IsMember({"memory", "memoryless"}));

  CLI::App* trace = app.add_subcommand("trace", "emit the event log of a short run");
  trace->add_option("--config", copt.config_path, "network config file")->required();
  trace->add_option("--scheme", copt.scheme, "override the configured scheme")
      ->check(CLI::IsMember({"memory", "memoryless"}));
  CLI::Option* trace_updates =
      trace->add_option("--updates", updates, "source updates to run")->default_val(20);
  trace->add_option("--time", time_horizon, "time horizon")->excludes(trace_updates);
  trace->add_option("--seed", copt.seed, "base seed")->default_val(0);
  add_format_opts(trace, copt);

  g_command = join_args(argc, argv);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*analytic) return run_analytic(copt, population, iq);
    if (*simulate) return run_simulate(copt, updates, time_horizon, replications);
    if (*sweep)
      return run_sweep_cmd(copt, preset_name, updates, replications,
                           sweep_updates->count() > 0, sweep_reps->count() > 0,
                           sweep_seed->count() > 0);
    if (*critical) {
      if (query.s < 0) query.s = query.n;
      if (query.m < 0) query.m = query.n;
      return run_critical_rate(copt, query);
    }
    if (*validate) return run_validate(copt);
    if (*trace) return run_trace(copt, updates, time_horizon);
  } catch (const vaoi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const vaoi::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_other;
  }
  return exit_other;
}
