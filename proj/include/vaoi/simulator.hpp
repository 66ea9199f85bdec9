#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>
#include <utility>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace vaoi {

/// Simulation stop rule: a fixed number of source updates or a fixed span of
/// simulated time.
struct Horizon {
  enum class Kind { Updates, Duration };
  Kind kind = Kind::Updates;
  std::uint64_t max_updates = 100000;
  double max_time = 0.0;

  static Horizon updates(std::uint64_t n) {
    Horizon h;
    h.kind = Kind::Updates;
    h.max_updates = n;
    return h;
  }
  static Horizon duration(double t) {
    Horizon h;
    h.kind = Kind::Duration;
    h.max_time = t;
    return h;
  }
};

/// Memory-scheme forwarding variant. SinceLastActivation pushes, per edge,
/// only the source-received keys that arrived after the edge last fired (the
/// protocol rule). AllHeldKeys pushes every held key and relies on receiver
/// dedup; observable behavior is identical and a differential test asserts so.
enum class ForwardRule { SinceLastActivation, AllHeldKeys };

struct SimOptions {
  Horizon horizon = Horizon::updates(100000);
  std::uint64_t seed = 0;
  ForwardRule forward_rule = ForwardRule::SinceLastActivation;
  int gc_interval = 64;  ///< source updates between key garbage-collection sweeps
};

struct NodeResult {
  double avg_age = 0.0;        ///< renewal estimator, total reward over total length
  double ci_half = 0.0;        ///< batch-means 95% half-width, NaN below 2 batches
  std::uint64_t cycles = 0;
  double mean_cycle_updates = 0.0;  ///< average updates per renewal cycle
  double se_cycle_updates = 0.0;
  double measured_area = 0.0;  ///< age integral over the measured window
  double measured_time = 0.0;  ///< measured window length (first to last boundary)
};

struct ClassResult {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double ci_half = std::numeric_limits<double>::quiet_NaN();
  int size = 0;
};

struct EventCounts {
  std::uint64_t events = 0;
  std::uint64_t updates = 0;
  std::uint64_t activations = 0;
  std::uint64_t decodes = 0;
  std::uint64_t misses = 0;       ///< memoryless: versions a node never decoded
  std::uint64_t early_stops = 0;  ///< memory: versions abandoned for a newer decode
};

struct SimResult {
  Scheme scheme = Scheme::Memory;
  std::uint64_t seed = 0;
  double end_time = 0.0;
  ClassResult subscriber, nonsubscriber, graph;
  std::vector<NodeResult> node;
  EventCounts counts;
};

enum class TraceKind { SourceUpdate, EdgeActivation, AgeStep, Decode, EarlyStop };

/// One line of the event log. Unused integer fields hold -1.
struct TraceEntry {
  double time = 0.0;
  TraceKind kind = TraceKind::SourceUpdate;
  std::int64_t version = -1;
  int from = -1;
  int to = -1;
  int node = -1;
  std::int64_t age_before = -1;
  std::int64_t age_after = -1;
};

/// One sampled event, sufficient to replay a run without a random source.
struct SimEvent {
  double dt = 0.0;
  bool is_update = false;
  int from = -1;
  int to = -1;
  std::vector<int> chosen;  ///< selected nonsubscribers, update events only
};

namespace detail {

/// Bitset over key ids 0 .. n - 1 with a distinct-insert counter.
class KeySet {
public:
  void reset(int id_capacity) {
    words_.assign(static_cast<std::size_t>((id_capacity + 63) / 64), 0);
    count_ = 0;
  }
  bool insert(int id) {
    std::uint64_t& w = words_[static_cast<std::size_t>(id >> 6)];
    std::uint64_t bit = 1ULL << (id & 63);
    if (w & bit) return false;
    w |= bit;
    ++count_;
    return true;
  }
  int count() const { return count_; }

private:
  std::vector<std::uint64_t> words_;
  int count_ = 0;
};

/// Per-node key collections for the contiguous undecoded version range
/// (decoded, current]. Slots are recycled to avoid allocation churn.
class PendingWindow {
public:
  void reset(std::int64_t base) {
    base_ = base;
    while (!slots_.empty()) {
      free_.push_back(std::move(slots_.front()));
      slots_.pop_front();
    }
  }
  void extend_to(std::int64_t version, int id_capacity) {
    while (base_ + static_cast<std::int64_t>(slots_.size()) <= version) {
      if (free_.empty()) {
        slots_.emplace_back();
      } else {
        slots_.push_back(std::move(free_.back()));
        free_.pop_back();
      }
      slots_.back().reset(id_capacity);
    }
  }
  void drop_through(std::int64_t decoded) {
    while (!slots_.empty() && base_ <= decoded) {
      free_.push_back(std::move(slots_.front()));
      slots_.pop_front();
      ++base_;
    }
  }
  KeySet& at(std::int64_t version) {
    return slots_[static_cast<std::size_t>(version - base_)];
  }

private:
  std::deque<KeySet> slots_;
  std::vector<KeySet> free_;
  std::int64_t base_ = 1;
};

class Engine {
public:
  Engine(const ValidatedConfig& v, const SimOptions& opt)
      : v_(v), opt_(opt), rng_(opt.seed) {
    const auto& c = v.cfg;
    k_ = c.k;
    n_ = c.n;
    s_ = c.s;
    m_ = c.m;
    threshold_ = v.threshold;
    memory_ = c.scheme == Scheme::Memory;
    lambda_s_ = c.lambda_s;
    if (v.homogeneous()) {
      homogeneous_ = true;
      total_edge_rate_ = static_cast<double>(m_) * v.lambda_e();
    } else {
      homogeneous_ = false;
      const auto& rate = v.rate_matrix();
      std::vector<double> weights;
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < m_; ++j)
          if (i != j && rate[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > 0.0) {
            edges_.emplace_back(i, j);
            weights.push_back(rate[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            total_edge_rate_ += weights.back();
          }
      edge_alias_ = AliasTable(weights);
    }
    total_rate_ = lambda_s_ + total_edge_rate_;
    nodes_.resize(static_cast<std::size_t>(m_));
    for (auto& nd : nodes_) {
      if (memory_) nd.window.reset(1);
      nd.cur_set.reset(n_);
    }
    if (memory_) watermark_.assign(static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_), 0);
    for (int g = s_; g < m_; ++g) nonsub_pool_.push_back(g);
  }

  void set_trace(std::vector<TraceEntry>* t, std::uint64_t guard) {
    trace_ = t;
    trace_guard_ = guard;
  }
  void set_record(std::vector<SimEvent>* r) { record_ = r; }
  void set_replay(const std::vector<SimEvent>* r) { replay_ = r; }

  SimResult run() {
    bool duration_mode = opt_.horizon.kind == Horizon::Kind::Duration;
    for (;;) {
      if (!duration_mode && counts_.updates >= opt_.horizon.max_updates) break;
      SimEvent ev = next_event();
      if (duration_mode && now_ + ev.dt > opt_.horizon.max_time) {
        now_ = opt_.horizon.max_time;
        break;
      }
      now_ += ev.dt;
      ++counts_.events;
      if (record_) record_->push_back(ev);
      if (ev.is_update)
        process_update(ev);
      else
        process_activation(ev.from, ev.to);
    }
    for (int j = 0; j < m_; ++j) integrate(j);
    return finalize();
  }

private:
  struct Node {
    std::int64_t decoded = 0;
    std::int64_t age = 0;
    double area = 0.0;
    double last_t = 0.0;
    PendingWindow window;                          // memory scheme
    std::deque<std::pair<std::int64_t, int>> direct;  // memory scheme: (version, key id)
    KeySet cur_set;                                // memoryless scheme
    int cur_key = -1;                              // memoryless scheme
    bool measuring = false;
    double cyc_start_t = 0.0, cyc_start_area = 0.0;
    std::uint64_t cyc_start_upd = 0;
    double first_b_t = 0.0, first_b_area = 0.0;
    double last_b_t = 0.0, last_b_area = 0.0;
    BatchMeans batches;
    RunningStats cyc_updates;
  };

  /// Draw order per event is fixed: interarrival time, then the event
  /// category, then the edge pair or the key-subset selection. Changing it
  /// would silently change every seeded run.
  SimEvent next_event() {
    if (replay_) {
      if (replay_pos_ >= replay_->size())
        throw DomainError("replay event list exhausted before the horizon");
      return (*replay_)[replay_pos_++];
    }
    SimEvent ev;
    ev.dt = rng_.exponential(total_rate_);
    double u = rng_.uniform01() * total_rate_;
    if (u <= lambda_s_) {
      ev.is_update = true;
      if (n_ > s_) {
        rng_.partial_shuffle(nonsub_pool_, static_cast<std::size_t>(n_ - s_));
        ev.chosen.assign(nonsub_pool_.begin(), nonsub_pool_.begin() + (n_ - s_));
      }
    } else if (homogeneous_) {
      std::uint64_t idx = rng_.uniform_below(
          static_cast<std::uint64_t>(m_) * static_cast<std::uint64_t>(m_ - 1));
      ev.from = static_cast<int>(idx / static_cast<std::uint64_t>(m_ - 1));
      int r = static_cast<int>(idx % static_cast<std::uint64_t>(m_ - 1));
      ev.to = r + (r >= ev.from ? 1 : 0);
    } else {
      auto [from, to] = edges_[edge_alias_.sample(rng_)];
      ev.from = from;
      ev.to = to;
    }
    return ev;
  }

  void integrate(int j) {
    Node& nd = nodes_[static_cast<std::size_t>(j)];
    nd.area += static_cast<double>(nd.age) * (now_ - nd.last_t);
    nd.last_t = now_;
  }

  void push_trace(TraceEntry e) {
    if (!trace_) return;
    e.time = now_;
    trace_->push_back(e);
    if (trace_->size() > trace_guard_) {
      std::ostringstream os;
      os << "event log exceeded " << trace_guard_ << " entries; shorten the horizon";
      throw SimError(SimFault::TraceTooLarge, os.str());
    }
  }

  void process_update(const SimEvent& ev) {
    ++version_;
    ++counts_.updates;
    if (trace_) push_trace({0.0, TraceKind::SourceUpdate, version_, -1, -1, -1, -1, -1});
    for (int j = 0; j < m_; ++j) {
      Node& nd = nodes_[static_cast<std::size_t>(j)];
      integrate(j);
      if (!memory_ && version_ >= 2 && nd.decoded < version_ - 1) ++counts_.misses;
      ++nd.age;
      if (trace_) push_trace({0.0, TraceKind::AgeStep, version_, -1, -1, j, nd.age - 1, nd.age});
      if (nd.age == 1) boundary(j);
      if (memory_) {
        nd.window.extend_to(version_, n_);
      } else {
        nd.cur_set.reset(n_);
        nd.cur_key = -1;
      }
    }
    int key_id = 0;
    for (int j = 0; j < s_; ++j) give_direct(j, key_id++);
    for (int g : ev.chosen) give_direct(g, key_id++);
    if (memory_ && opt_.gc_interval > 0 &&
        counts_.updates % static_cast<std::uint64_t>(opt_.gc_interval) == 0)
      collect_garbage();
  }

  void give_direct(int j, int id) {
    Node& nd = nodes_[static_cast<std::size_t>(j)];
    if (memory_) {
      nd.direct.emplace_back(version_, id);
      deliver_memory(j, version_, id);
    } else {
      nd.cur_key = id;
      deliver_memoryless(j, id);
    }
  }

  void process_activation(int i, int j) {
    ++counts_.activations;
    if (trace_) push_trace({0.0, TraceKind::EdgeActivation, version_, i, j, -1, -1, -1});
    if (memory_) {
      Node& src = nodes_[static_cast<std::size_t>(i)];
      std::int64_t& wm = watermark_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) +
                                    static_cast<std::size_t>(j)];
      std::int64_t start = opt_.forward_rule == ForwardRule::SinceLastActivation
                               ? std::max(wm, nodes_[static_cast<std::size_t>(j)].decoded) + 1
                               : nodes_[static_cast<std::size_t>(j)].decoded + 1;
      auto it = std::lower_bound(
          src.direct.begin(), src.direct.end(), start,
          [](const std::pair<std::int64_t, int>& e, std::int64_t v) { return e.first < v; });
      for (; it != src.direct.end(); ++it) deliver_memory(j, it->first, it->second);
      wm = version_;
    } else {
      if (nodes_[static_cast<std::size_t>(i)].cur_key >= 0)
        deliver_memoryless(j, nodes_[static_cast<std::size_t>(i)].cur_key);
    }
  }

  void deliver_memory(int j, std::int64_t ver, int id) {
    Node& nd = nodes_[static_cast<std::size_t>(j)];
    if (ver <= nd.decoded) return;
    KeySet& slot = nd.window.at(ver);
    if (slot.insert(id) && slot.count() == threshold_) decode_memory(j, ver);
  }

  void decode_memory(int j, std::int64_t ver) {
    Node& nd = nodes_[static_cast<std::size_t>(j)];
    integrate(j);
    std::int64_t skipped = ver - nd.decoded - 1;
    if (skipped > 0) {
      counts_.early_stops += static_cast<std::uint64_t>(skipped);
      if (trace_)
        for (std::int64_t sv = nd.decoded + 1; sv < ver; ++sv)
          push_trace({0.0, TraceKind::EarlyStop, sv, -1, -1, j, -1, -1});
    }
    nd.decoded = ver;
    nd.window.drop_through(ver);
    std::int64_t old_age = nd.age;
    nd.age = version_ - ver;
    ++counts_.decodes;
    if (trace_) push_trace({0.0, TraceKind::Decode, ver, -1, -1, j, old_age, nd.age});
  }

  void deliver_memoryless(int j, int id) {
    Node& nd = nodes_[static_cast<std::size_t>(j)];
    if (nd.decoded >= version_) return;
    if (nd.cur_set.insert(id) && nd.cur_set.count() == threshold_) {
      integrate(j);
      std::int64_t old_age = nd.age;
      nd.decoded = version_;
      nd.age = 0;
      ++counts_.decodes;
      if (trace_) push_trace({0.0, TraceKind::Decode, version_, -1, -1, j, old_age, 0});
    }
  }

  /// Renewal boundary: a source update left this node at age exactly 1.
  void boundary(int j) {
    Node& nd = nodes_[static_cast<std::size_t>(j)];
    if (nd.measuring) {
      double length = now_ - nd.cyc_start_t;
      double reward = nd.area - nd.cyc_start_area;
      auto updates_in_cycle = counts_.updates - nd.cyc_start_upd;
      nd.batches.add_cycle(reward, length);
      nd.cyc_updates.add(static_cast<double>(updates_in_cycle));
      nd.last_b_t = now_;
      nd.last_b_area = nd.area;
    } else {
      nd.measuring = true;
      nd.first_b_t = now_;
      nd.first_b_area = nd.area;
      nd.last_b_t = now_;
      nd.last_b_area = nd.area;
    }
    nd.cyc_start_t = now_;
    nd.cyc_start_area = nd.area;
    nd.cyc_start_upd = counts_.updates;
  }

  void collect_garbage() {
    for (int i = 0; i < m_; ++i) {
      Node& nd = nodes_[static_cast<std::size_t>(i)];
      if (nd.direct.empty()) continue;
      std::int64_t wm_min = std::numeric_limits<std::int64_t>::max();
      for (int j = 0; j < m_; ++j) {
        if (j == i) continue;
        wm_min = std::min(wm_min, watermark_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) +
                                             static_cast<std::size_t>(j)]);
      }
      while (!nd.direct.empty() && nd.direct.front().first <= wm_min) nd.direct.pop_front();
    }
  }

  SimResult finalize() {
    SimResult out;
    out.scheme = v_.cfg.scheme;
    out.seed = opt_.seed;
    out.end_time = now_;
    out.counts = counts_;
    out.node.resize(static_cast<std::size_t>(m_));
    for (int j = 0; j < m_; ++j) {
      Node& nd = nodes_[static_cast<std::size_t>(j)];
      if (nd.batches.cycles() == 0) {
        std::ostringstream os;
        os << "node " << j << " completed no renewal cycles within the horizon";
        throw SimError(SimFault::HorizonTooShort, os.str());
      }
      NodeResult& r = out.node[static_cast<std::size_t>(j)];
      r.avg_age = nd.batches.ratio();
      r.ci_half = nd.batches.half_width();
      r.cycles = nd.batches.cycles();
      r.mean_cycle_updates = nd.cyc_updates.mean();
      r.se_cycle_updates = nd.cyc_updates.standard_error();
      r.measured_area = nd.last_b_area - nd.first_b_area;
      r.measured_time = nd.last_b_t - nd.first_b_t;
    }
    out.subscriber = class_summary(out, 0, s_);
    out.nonsubscriber = class_summary(out, s_, m_);
    out.graph = class_summary(out, 0, m_);
    return out;
  }

  ClassResult class_summary(const SimResult& res, int begin, int end) const {
    ClassResult c;
    c.size = end - begin;
    if (c.size <= 0) return c;
    double sum = 0.0, var = 0.0;
    for (int j = begin; j < end; ++j) {
      sum += res.node[static_cast<std::size_t>(j)].avg_age;
      double h = res.node[static_cast<std::size_t>(j)].ci_half;
      var += h * h;
    }
    c.mean = sum / static_cast<double>(c.size);
    c.ci_half = std::sqrt(var) / static_cast<double>(c.size);
    return c;
  }

  const ValidatedConfig& v_;
  SimOptions opt_;
  Rng rng_;
  int k_ = 0, n_ = 0, s_ = 0, m_ = 0, threshold_ = 1;
  bool memory_ = true;
  bool homogeneous_ = true;
  double lambda_s_ = 0.0, total_edge_rate_ = 0.0, total_rate_ = 0.0;
  std::vector<std::pair<int, int>> edges_;
  AliasTable edge_alias_;
  std::vector<Node> nodes_;
  std::vector<std::int64_t> watermark_;
  std::vector<int> nonsub_pool_;
  double now_ = 0.0;
  std::int64_t version_ = 0;
  EventCounts counts_;
  std::vector<TraceEntry>* trace_ = nullptr;
  std::uint64_t trace_guard_ = 10000000;
  std::vector<SimEvent>* record_ = nullptr;
  const std::vector<SimEvent>* replay_ = nullptr;
  std::size_t replay_pos_ = 0;
};

} // namespace detail

inline SimResult run_simulation(const ValidatedConfig& cfg, const SimOptions& opt) {
  detail::Engine engine(cfg, opt);
  return engine.run();
}

/// Runs and also returns the sampled event sequence, so a second engine can
/// replay the exact same run.
inline SimResult run_simulation_recording(const ValidatedConfig& cfg, const SimOptions& opt,
                                          std::vector<SimEvent>& out_events) {
  detail::Engine engine(cfg, opt);
  engine.set_record(&out_events);
  return engine.run();
}

inline SimResult run_simulation_replaying(const ValidatedConfig& cfg, const SimOptions& opt,
                                          const std::vector<SimEvent>& events) {
  detail::Engine engine(cfg, opt);
  engine.set_replay(&events);
  return engine.run();
}

struct TraceResult {
  SimResult result;
  std::vector<TraceEntry> entries;
};

/// Full event log of a run. Refuses to materialize more than `guard` entries.
inline TraceResult trace_events(const ValidatedConfig& cfg, const SimOptions& opt,
                                std::uint64_t guard = 10000000) {
  TraceResult tr;
  detail::Engine engine(cfg, opt);
  engine.set_trace(&tr.entries, guard);
  tr.result = engine.run();
  return tr;
}

struct ReplicationResult {
  ClassResult subscriber, nonsubscriber, graph;
  std::vector<SimResult> runs;
  std::uint64_t base_seed = 0;
};

namespace detail {

inline void pool_class(ClassResult& out, const std::vector<SimResult>& runs,
                       ClassResult SimResult::*member) {
  out = ClassResult{};
  if (runs.empty()) return;
  out.size = (runs.front().*member).size;
  if (out.size == 0) return;
  if (runs.size() == 1) {
    out = runs.front().*member;
    return;
  }
  RunningStats rs;
  for (const auto& r : runs) rs.add((r.*member).mean);
  out.mean = rs.mean();
  out.ci_half = student_t_975(static_cast<long>(runs.size()) - 1) * rs.standard_error();
}

} // namespace detail

/// Independent replications with per-replication seeds derived from the base
/// seed. Replications may run on several threads; results and their pooling
/// order depend only on the replication index, never on scheduling. The
/// pooled mean is the arithmetic mean of the replication means and the
/// half-width is a Student-t standard-error interval across replications.
inline ReplicationResult run_replications(const ValidatedConfig& cfg, const SimOptions& opt,
                                          unsigned replications, unsigned threads = 0) {
  if (replications == 0) throw DomainError("need at least one replication");
  if (threads == 0) {
    unsigned hc = std::thread::hardware_concurrency();
    threads = hc ? std::min(hc, 8u) : 1u;
  }
  threads = std::min(threads, replications);

  ReplicationResult out;
  out.base_seed = opt.seed;
  out.runs.resize(replications);
  std::vector<std::exception_ptr> errors(replications);

  auto worker = [&](unsigned begin, unsigned step) {
    for (unsigned r = begin; r < replications; r += step) {
      try {
        SimOptions o = opt;
        o.seed = derive_stream_seed(opt.seed, r);
        out.runs[r] = run_simulation(cfg, o);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };

  if (threads <= 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  detail::pool_class(out.subscriber, out.runs, &SimResult::subscriber);
  detail::pool_class(out.nonsubscriber, out.runs, &SimResult::nonsubscriber);
  detail::pool_class(out.graph, out.runs, &SimResult::graph);
  return out;
}

} // namespace vaoi
