#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "sweep.hpp"
#include "version.hpp"

namespace vaoi {

// ---------------------------------------------------------------------------
// Key/value document: `key = value` lines grouped by [section] headers,
// '#' comments, order preserved.
// ---------------------------------------------------------------------------

struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct KvSection {
  std::string name;  ///< "" for the top of the file
  std::vector<KvEntry> entries;

  const KvEntry* find(const std::string& key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
};

struct KvDoc {
  std::vector<KvSection> sections;  ///< front() is always the top-level section

  const KvSection* find(const std::string& name) const {
    for (const auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] inline void kv_fail(int line, const std::string& msg) {
  std::ostringstream os;
  os << "line " << line << ": " << msg;
  throw IoError(os.str());
}

inline long parse_long(const KvEntry& e) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(e.value, &pos);
  } catch (const std::exception&) {
    kv_fail(e.line, "expected an integer for '" + e.key + "', got '" + e.value + "'");
  }
  if (pos != e.value.size()) kv_fail(e.line, "trailing text after integer for '" + e.key + "'");
  return v;
}

inline double parse_double_str(const std::string& s, int line, const std::string& key) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    kv_fail(line, "expected a number for '" + key + "', got '" + s + "'");
  }
  if (pos != s.size()) kv_fail(line, "trailing text after number for '" + key + "'");
  return v;
}

inline double parse_double(const KvEntry& e) { return parse_double_str(e.value, e.line, e.key); }

inline Scheme parse_scheme_str(const std::string& s, int line) {
  if (s == "memory") return Scheme::Memory;
  if (s == "memoryless") return Scheme::Memoryless;
  kv_fail(line, "scheme must be 'memory' or 'memoryless', got '" + s + "'");
}

inline void reject_unknown(const KvSection& sec, const std::vector<std::string>& allowed) {
  for (const auto& e : sec.entries) {
    bool ok = false;
    for (const auto& a : allowed)
      if (e.key == a) {
        ok = true;
        break;
      }
    if (!ok && sec.name == "edge_rates" && e.key.rfind("row_", 0) == 0) ok = true;
    if (!ok)
      kv_fail(e.line, "unknown key '" + e.key + "'" +
                          (sec.name.empty() ? "" : " in section [" + sec.name + "]"));
  }
}

} // namespace detail

inline KvDoc parse_kv_text(const std::string& text) {
  KvDoc doc;
  doc.sections.push_back(KvSection{});
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string s = raw;
    std::size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') detail::kv_fail(line, "unterminated section header");
      doc.sections.push_back(KvSection{detail::trim(s.substr(1, s.size() - 2)), {}});
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) detail::kv_fail(line, "expected 'key = value'");
    KvEntry e;
    e.key = detail::trim(s.substr(0, eq));
    e.value = detail::trim(s.substr(eq + 1));
    e.line = line;
    if (e.key.empty()) detail::kv_fail(line, "empty key");
    doc.sections.back().entries.push_back(std::move(e));
  }
  return doc;
}

inline KvDoc load_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  try {
    return parse_kv_text(os.str());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Network configuration documents
// ---------------------------------------------------------------------------

/// Reads the network fields of a document (top-level counts and rates plus the
/// [edge_rates] section). Extension sections like [sweep] and [study] are
/// left for their own parsers; any other content is rejected.
inline NetworkConfig parse_network_config(const KvDoc& doc) {
  const KvSection& top = doc.sections.front();
  detail::reject_unknown(top, {"k", "n", "s", "m", "lambda_s", "scheme"});
  for (const auto& sec : doc.sections)
    if (!sec.name.empty() && sec.name != "edge_rates" && sec.name != "sweep" && sec.name != "study")
      detail::kv_fail(sec.entries.empty() ? 0 : sec.entries.front().line,
                      "unknown section [" + sec.name + "]");

  NetworkConfig cfg;
  auto need = [&](const char* key) -> const KvEntry& {
    const KvEntry* e = top.find(key);
    if (!e) throw IoError(std::string("missing required key '") + key + "'");
    return *e;
  };
  cfg.k = static_cast<int>(detail::parse_long(need("k")));
  cfg.n = static_cast<int>(detail::parse_long(need("n")));
  cfg.s = static_cast<int>(detail::parse_long(need("s")));
  cfg.m = static_cast<int>(detail::parse_long(need("m")));
  cfg.lambda_s = detail::parse_double(need("lambda_s"));
  if (const KvEntry* e = top.find("scheme")) cfg.scheme = detail::parse_scheme_str(e->value, e->line);

  const KvSection* er = doc.find("edge_rates");
  if (!er) throw IoError("missing [edge_rates] section");
  detail::reject_unknown(*er, {"type", "lambda_e"});
  const KvEntry* type = er->find("type");
  std::string type_name = type ? type->value : "homogeneous";
  if (type_name == "homogeneous") {
    const KvEntry* le = er->find("lambda_e");
    if (!le) throw IoError("[edge_rates] needs lambda_e for homogeneous type");
    cfg.edges = HomogeneousRates{detail::parse_double(*le)};
  } else if (type_name == "heterogeneous") {
    HeterogeneousRates h;
    for (int i = 0; i < cfg.m; ++i) {
      const KvEntry* row = er->find("row_" + std::to_string(i));
      if (!row) throw IoError("[edge_rates] missing row_" + std::to_string(i));
      std::vector<std::string> toks = detail::split_ws(row->value);
      if (static_cast<int>(toks.size()) != cfg.m)
        detail::kv_fail(row->line, "rate row needs exactly m entries");
      std::vector<double> vals;
      for (const auto& t : toks) vals.push_back(detail::parse_double_str(t, row->line, row->key));
      h.rate.push_back(std::move(vals));
    }
    cfg.edges = std::move(h);
  } else {
    detail::kv_fail(type->line, "edge_rates type must be 'homogeneous' or 'heterogeneous'");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Presets: a network document plus a [sweep] or [study] extension block
// ---------------------------------------------------------------------------

struct ConvergenceSpec {
  double alpha = 1.0;
  int k = 1;
  double lambda_s = 1.0;
  std::vector<double> lambda_e_grid;
  std::vector<int> m_sequence;
  Scheme scheme = Scheme::Memory;
  std::uint64_t updates = 30000;
  unsigned replications = 2;
  std::uint64_t base_seed = 0;
};

struct MemoryValueSpec {
  std::vector<int> k_grid;
  int n = 2;
  double lambda_s = 1.0;
  std::vector<double> eps_set;
};

struct SubscriptionCostSpec {
  int k = 1;
  int n = 2;
  double lambda_s = 1.0;
  double lambda_e = 1.0;
  std::vector<int> s_grid;
  std::vector<int> m_grid;
};

struct PresetSpec {
  enum class Kind { Comparison, Convergence, CriticalRate, SubscriptionCost };
  Kind kind = Kind::Comparison;
  std::string name;
  SweepSpec sweep;
  ConvergenceSpec convergence;
  MemoryValueSpec memory_value;
  SubscriptionCostSpec cost;
};

namespace detail {

inline std::vector<double> parse_double_list(const KvEntry& e) {
  std::vector<double> out;
  for (const auto& t : split_ws(e.value)) out.push_back(parse_double_str(t, e.line, e.key));
  if (out.empty()) kv_fail(e.line, "'" + e.key + "' needs at least one value");
  return out;
}

inline std::vector<int> parse_int_list(const KvEntry& e) {
  std::vector<int> out;
  for (const auto& t : split_ws(e.value)) {
    KvEntry tmp{e.key, t, e.line};
    out.push_back(static_cast<int>(parse_long(tmp)));
  }
  if (out.empty()) kv_fail(e.line, "'" + e.key + "' needs at least one value");
  return out;
}

inline std::vector<CaseOverride> parse_cases(const KvEntry& e) {
  std::vector<CaseOverride> out;
  std::istringstream is(e.value);
  std::string part;
  while (std::getline(is, part, '|')) {
    part = trim(part);
    if (part.empty()) kv_fail(e.line, "empty case in case list");
    CaseOverride c;
    std::istringstream ps(part);
    std::string field;
    while (std::getline(ps, field, ',')) {
      field = trim(field);
      std::size_t eq = field.find('=');
      if (eq == std::string::npos) kv_fail(e.line, "case fields look like k=2,n=6");
      std::string key = trim(field.substr(0, eq));
      KvEntry tmp{key, trim(field.substr(eq + 1)), e.line};
      int v = static_cast<int>(parse_long(tmp));
      if (key == "k")
        c.k = v;
      else if (key == "n")
        c.n = v;
      else if (key == "s")
        c.s = v;
      else if (key == "m")
        c.m = v;
      else
        kv_fail(e.line, "cases may override k, n, s, m only");
    }
    out.push_back(c);
  }
  return out;
}

} // namespace detail

inline PresetSpec parse_preset(const KvDoc& doc, const std::string& name) {
  PresetSpec preset;
  preset.name = name;

  const KvSection* sweep_sec = doc.find("sweep");
  const KvSection* study_sec = doc.find("study");
  if (sweep_sec && study_sec) throw IoError("a preset has either [sweep] or [study], not both");

  if (sweep_sec) {
    preset.kind = PresetSpec::Kind::Comparison;
    detail::reject_unknown(*sweep_sec,
                           {"lambda_e", "cases", "schemes", "updates", "replications", "seed"});
    SweepSpec& sw = preset.sweep;
    sw.name = name;
    sw.base = parse_network_config(doc);
    const KvEntry* grid = sweep_sec->find("lambda_e");
    if (!grid) throw IoError("[sweep] needs a lambda_e grid");
    sw.lambda_e_grid = detail::parse_double_list(*grid);
    if (const KvEntry* e = sweep_sec->find("cases")) sw.cases = detail::parse_cases(*e);
    if (const KvEntry* e = sweep_sec->find("schemes")) {
      sw.schemes.clear();
      for (const auto& t : detail::split_ws(e->value))
        sw.schemes.push_back(detail::parse_scheme_str(t, e->line));
    } else {
      sw.schemes = {sw.base.scheme};
    }
    if (const KvEntry* e = sweep_sec->find("updates"))
      sw.updates = static_cast<std::uint64_t>(detail::parse_long(*e));
    if (const KvEntry* e = sweep_sec->find("replications"))
      sw.replications = static_cast<unsigned>(detail::parse_long(*e));
    if (const KvEntry* e = sweep_sec->find("seed"))
      sw.base_seed = static_cast<std::uint64_t>(detail::parse_long(*e));
    return preset;
  }

  if (!study_sec) throw IoError("preset needs a [sweep] or [study] section");
  const KvEntry* kind = study_sec->find("kind");
  if (!kind) throw IoError("[study] needs a kind");
  const KvSection& top = doc.sections.front();

  if (kind->value == "convergence") {
    preset.kind = PresetSpec::Kind::Convergence;
    detail::reject_unknown(top, {"k", "lambda_s", "scheme"});
    detail::reject_unknown(*study_sec,
                           {"kind", "alpha", "lambda_e", "m", "updates", "replications", "seed"});
    ConvergenceSpec& c = preset.convergence;
    auto need_top = [&](const char* key) -> const KvEntry& {
      const KvEntry* e = top.find(key);
      if (!e) throw IoError(std::string("missing required key '") + key + "'");
      return *e;
    };
    c.k = static_cast<int>(detail::parse_long(need_top("k")));
    c.lambda_s = detail::parse_double(need_top("lambda_s"));
    if (const KvEntry* e = top.find("scheme")) c.scheme = detail::parse_scheme_str(e->value, e->line);
    if (const KvEntry* e = study_sec->find("alpha")) c.alpha = detail::parse_double(*e);
    const KvEntry* grid = study_sec->find("lambda_e");
    if (!grid) throw IoError("[study] convergence needs a lambda_e list");
    c.lambda_e_grid = detail::parse_double_list(*grid);
    const KvEntry* mseq = study_sec->find("m");
    if (!mseq) throw IoError("[study] convergence needs an m sequence");
    c.m_sequence = detail::parse_int_list(*mseq);
    if (const KvEntry* e = study_sec->find("updates"))
      c.updates = static_cast<std::uint64_t>(detail::parse_long(*e));
    if (const KvEntry* e = study_sec->find("replications"))
      c.replications = static_cast<unsigned>(detail::parse_long(*e));
    if (const KvEntry* e = study_sec->find("seed"))
      c.base_seed = static_cast<std::uint64_t>(detail::parse_long(*e));
    return preset;
  }

  if (kind->value == "critical_rate") {
    preset.kind = PresetSpec::Kind::CriticalRate;
    detail::reject_unknown(top, {"n", "lambda_s"});
    detail::reject_unknown(*study_sec, {"kind", "k", "epsilon"});
    MemoryValueSpec& mv = preset.memory_value;
    const KvEntry* nk = top.find("n");
    if (!nk) throw IoError("missing required key 'n'");
    mv.n = static_cast<int>(detail::parse_long(*nk));
    const KvEntry* ls = top.find("lambda_s");
    if (!ls) throw IoError("missing required key 'lambda_s'");
    mv.lambda_s = detail::parse_double(*ls);
    const KvEntry* kg = study_sec->find("k");
    if (!kg) throw IoError("[study] critical_rate needs a k grid");
    mv.k_grid = detail::parse_int_list(*kg);
    const KvEntry* eg = study_sec->find("epsilon");
    if (!eg) throw IoError("[study] critical_rate needs an epsilon list");
    mv.eps_set = detail::parse_double_list(*eg);
    return preset;
  }

  if (kind->value == "subscription_cost") {
    preset.kind = PresetSpec::Kind::SubscriptionCost;
    detail::reject_unknown(top, {"k", "n", "lambda_s", "lambda_e"});
    detail::reject_unknown(*study_sec, {"kind", "s", "m"});
    SubscriptionCostSpec& sc = preset.cost;
    auto need_top = [&](const char* key) -> const KvEntry& {
      const KvEntry* e = top.find(key);
      if (!e) throw IoError(std::string("missing required key '") + key + "'");
      return *e;
    };
    sc.k = static_cast<int>(detail::parse_long(need_top("k")));
    sc.n = static_cast<int>(detail::parse_long(need_top("n")));
    sc.lambda_s = detail::parse_double(need_top("lambda_s"));
    sc.lambda_e = detail::parse_double(need_top("lambda_e"));
    const KvEntry* sg = study_sec->find("s");
    if (!sg) throw IoError("[study] subscription_cost needs an s grid");
    sc.s_grid = detail::parse_int_list(*sg);
    const KvEntry* mg = study_sec->find("m");
    if (!mg) throw IoError("[study] subscription_cost needs an m grid");
    sc.m_grid = detail::parse_int_list(*mg);
    return preset;
  }

  detail::kv_fail(kind->line, "unknown study kind '" + kind->value + "'");
}

/// Resolves a preset name to a file. Search order: $AOI_PRESET_DIR, ./presets,
/// then the presets directory recorded at build time. A name containing a
/// path separator or ending in .cfg is treated as a direct path.
inline std::string find_preset_file(const std::string& name) {
  namespace fs = std::filesystem;
  auto looks_like_path = name.find('/') != std::string::npos ||
                         (name.size() > 4 && name.substr(name.size() - 4) == ".cfg");
  if (looks_like_path) {
    if (fs::exists(name)) return name;
    throw IoError("preset file '" + name + "' not found");
  }
  std::vector<std::string> dirs;
  if (const char* env = std::getenv("AOI_PRESET_DIR")) dirs.push_back(env);
  dirs.push_back("presets");
#ifdef VAOI_PRESET_FALLBACK_DIR
  dirs.push_back(VAOI_PRESET_FALLBACK_DIR);
#endif
  for (const auto& d : dirs) {
    fs::path p = fs::path(d) / (name + ".cfg");
    if (fs::exists(p)) return p.string();
  }
  std::ostringstream os;
  os << "preset '" << name << "' not found; searched";
  for (const auto& d : dirs) os << " " << d;
  throw IoError(os.str());
}

// ---------------------------------------------------------------------------
// Result envelopes
// ---------------------------------------------------------------------------

/// A table cell: absent, a number, an integer, or text. NaN never reaches a
/// cell; absent values stay empty (CSV) or null (JSON).
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Reproducibility header carried by every emitted file. Holds only
/// deterministic facts (no wall-clock), so reruns are byte-identical.
struct EnvelopeMeta {
  std::string version = version_string;
  std::string command;
  std::uint64_t seed = 0;
  std::string config_echo;
  std::string config_hash;
  std::optional<double> sim_end_time;
  std::optional<std::uint64_t> sim_updates;
};

inline std::string format_g12(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hash_hex(const std::string& s) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
  return buf;
}

inline std::string config_echo(const NetworkConfig& cfg) {
  std::ostringstream os;
  os << "k=" << cfg.k << ";n=" << cfg.n << ";s=" << cfg.s << ";m=" << cfg.m
     << ";lambda_s=" << format_g12(cfg.lambda_s) << ";scheme=" << to_string(cfg.scheme)
     << ";edges=";
  if (std::holds_alternative<HomogeneousRates>(cfg.edges)) {
    os << "homogeneous:" << format_g12(std::get<HomogeneousRates>(cfg.edges).lambda_e);
  } else {
    os << "heterogeneous:";
    const auto& rate = std::get<HeterogeneousRates>(cfg.edges).rate;
    for (const auto& row : rate)
      for (double rr : row) os << format_g12(rr) << ",";
  }
  return os.str();
}

namespace detail {

inline void append_cell_csv(std::ostream& out, const Cell& c) {
  if (std::holds_alternative<double>(c))
    out << format_g12(std::get<double>(c));
  else if (std::holds_alternative<std::int64_t>(c))
    out << std::get<std::int64_t>(c);
  else if (std::holds_alternative<std::string>(c))
    out << std::get<std::string>(c);
}

} // namespace detail

inline void emit_csv(std::ostream& out, const EnvelopeMeta& meta, const Table& table) {
  out << "# tool vaoi " << meta.version << "\n";
  out << "# command " << meta.command << "\n";
  out << "# seed " << meta.seed << "\n";
  out << "# config " << meta.config_echo << "\n";
  out << "# config_hash " << meta.config_hash << "\n";
  if (meta.sim_end_time) out << "# sim_end_time " << format_g12(*meta.sim_end_time) << "\n";
  if (meta.sim_updates) out << "# sim_updates " << *meta.sim_updates << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << table.columns[i] << (i + 1 < table.columns.size() ? "," : "");
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      detail::append_cell_csv(out, row[i]);
      if (i + 1 < row.size()) out << ",";
    }
    out << "\n";
  }
}

inline void emit_json(std::ostream& out, const EnvelopeMeta& meta, const Table& table) {
  nlohmann::json j;
  j["meta"]["tool"] = "vaoi";
  j["meta"]["version"] = meta.version;
  j["meta"]["command"] = meta.command;
  j["meta"]["seed"] = meta.seed;
  j["meta"]["config"] = meta.config_echo;
  j["meta"]["config_hash"] = meta.config_hash;
  if (meta.sim_end_time) j["meta"]["sim_end_time"] = *meta.sim_end_time;
  if (meta.sim_updates) j["meta"]["sim_updates"] = *meta.sim_updates;
  j["columns"] = table.columns;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& c : row) {
      if (std::holds_alternative<double>(c))
        jr.push_back(std::get<double>(c));
      else if (std::holds_alternative<std::int64_t>(c))
        jr.push_back(std::get<std::int64_t>(c));
      else if (std::holds_alternative<std::string>(c))
        jr.push_back(std::get<std::string>(c));
      else
        jr.push_back(nullptr);
    }
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  out << j.dump(2) << "\n";
}

namespace detail {

inline Cell opt_cell(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return std::monostate{};
  return *v;
}

inline Cell num_cell(double v) {
  if (!std::isfinite(v)) return std::monostate{};
  return v;
}

} // namespace detail

/// Fixed 16-column layout shared by analytic, simulate, and sweep outputs.
inline Table comparison_table(const std::vector<ComparisonRow>& rows) {
  Table t;
  t.columns = {"scheme",         "k",       "n",           "s",
               "m",              "lambda_s", "lambda_e",    "node_class",
               "analytic_value", "lower_bound", "upper_bound", "sim_mean",
               "sim_ci_half",    "rel_error",   "seed",        "horizon_updates"};
  for (const auto& r : rows) {
    std::vector<Cell> row;
    row.emplace_back(std::string(to_string(r.scheme)));
    row.emplace_back(static_cast<std::int64_t>(r.k));
    row.emplace_back(static_cast<std::int64_t>(r.n));
    row.emplace_back(static_cast<std::int64_t>(r.s));
    row.emplace_back(static_cast<std::int64_t>(r.m));
    row.emplace_back(r.lambda_s);
    row.emplace_back(r.lambda_e);
    row.emplace_back(std::string(to_string(r.population)));
    row.push_back(detail::opt_cell(r.analytic));
    row.push_back(r.bounds ? detail::num_cell(r.bounds->lower) : Cell{});
    row.push_back(r.bounds ? detail::num_cell(r.bounds->upper) : Cell{});
    row.push_back(detail::opt_cell(r.sim_mean));
    row.push_back(detail::opt_cell(r.sim_ci_half));
    row.push_back(detail::opt_cell(r.rel_error));
    row.emplace_back(static_cast<std::int64_t>(r.seed));
    row.emplace_back(static_cast<std::int64_t>(r.horizon_updates));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table convergence_table(const ConvergenceStudy& study, Scheme scheme, double alpha, int k,
                               double lambda_s, double lambda_e) {
  Table t;
  t.columns = {"scheme", "k",        "alpha",    "lambda_s",  "lambda_e", "m",
               "analytic_value", "sim_mean", "sim_ci_half", "asymptote", "gap"};
  for (const auto& p : study.points) {
    std::vector<Cell> row;
    row.emplace_back(std::string(to_string(scheme)));
    row.emplace_back(static_cast<std::int64_t>(k));
    row.emplace_back(alpha);
    row.emplace_back(lambda_s);
    row.emplace_back(lambda_e);
    row.emplace_back(static_cast<std::int64_t>(p.m));
    row.emplace_back(p.analytic);
    row.push_back(detail::num_cell(p.sim_mean));
    row.push_back(detail::num_cell(p.sim_ci_half));
    row.emplace_back(p.asymptote);
    row.emplace_back(p.gap);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table memory_value_table(const std::vector<MemoryValuePoint>& points, int n,
                                double lambda_s) {
  Table t;
  t.columns = {"n", "lambda_s", "k", "epsilon", "critical_rate", "gap_at_rate", "gap_below_rate"};
  for (const auto& p : points) {
    std::vector<Cell> row;
    row.emplace_back(static_cast<std::int64_t>(n));
    row.emplace_back(lambda_s);
    row.emplace_back(static_cast<std::int64_t>(p.k));
    row.emplace_back(p.epsilon);
    row.emplace_back(p.rate);
    row.emplace_back(p.gap_at_rate);
    row.push_back(detail::num_cell(p.gap_below_rate));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table subscription_cost_table(const std::vector<SubscriptionCostRow>& rows, int k, int n,
                                     double lambda_s, double lambda_e) {
  Table t;
  t.columns = {"scheme", "k", "n", "m", "s", "lambda_s", "lambda_e", "subscriber",
               "nonsubscriber", "graph"};
  for (const auto& r : rows) {
    std::vector<Cell> row;
    row.emplace_back(std::string("memoryless"));
    row.emplace_back(static_cast<std::int64_t>(k));
    row.emplace_back(static_cast<std::int64_t>(n));
    row.emplace_back(static_cast<std::int64_t>(r.m));
    row.emplace_back(static_cast<std::int64_t>(r.s));
    row.emplace_back(lambda_s);
    row.emplace_back(lambda_e);
    row.push_back(detail::num_cell(r.subscriber));
    row.emplace_back(r.nonsubscriber);
    row.emplace_back(r.graph);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table trace_table(const std::vector<TraceEntry>& entries) {
  Table t;
  t.columns = {"time", "event", "version", "from", "to", "node", "age_before", "age_after"};
  auto kind_name = [](TraceKind k) -> const char* {
    switch (k) {
      case TraceKind::SourceUpdate: return "update";
      case TraceKind::EdgeActivation: return "activation";
      case TraceKind::AgeStep: return "age_step";
      case TraceKind::Decode: return "decode";
      default: return "early_stop";
    }
  };
  auto int_or_null = [](std::int64_t v) -> Cell {
    if (v < 0) return std::monostate{};
    return v;
  };
  for (const auto& e : entries) {
    std::vector<Cell> row;
    row.emplace_back(e.time);
    row.emplace_back(std::string(kind_name(e.kind)));
    row.push_back(int_or_null(e.version));
    row.push_back(int_or_null(e.from));
    row.push_back(int_or_null(e.to));
    row.push_back(int_or_null(e.node));
    row.push_back(e.age_before < 0 ? Cell{} : Cell{e.age_before});
    row.push_back(e.age_after < 0 ? Cell{} : Cell{e.age_after});
    t.rows.push_back(std::move(row));
  }
  return t;
}

enum class OutputFormat { Csv, Json };

inline void emit_table(std::ostream& out, OutputFormat fmt, const EnvelopeMeta& meta,
                       const Table& table) {
  if (fmt == OutputFormat::Csv)
    emit_csv(out, meta, table);
  else
    emit_json(out, meta, table);
}

/// Reads AOI_THREADS; 0 means pick automatically.
inline unsigned env_threads() {
  if (const char* env = std::getenv("AOI_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return 0;
}

} // namespace vaoi
