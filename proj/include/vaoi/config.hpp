#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace vaoi {

/// Forwarding discipline of the receiver nodes.
///
/// Memory: a node keeps every key it received from the source and, when one of
/// its edges fires, pushes all source-received keys not yet sent on that edge.
/// Memoryless: a node holds at most the current version's source-received key
/// and forwards only that; stale keys are dropped at every source update.
enum class Scheme { Memory, Memoryless };

enum class NodeClass { Subscriber, Nonsubscriber };

/// A result can describe one node class or the whole-graph average.
enum class Population { Subscriber, Nonsubscriber, Graph };

/// How the source's n keys per update relate to the receiver population.
enum class NetworkType {
  FullSubscription,     ///< m = n = s, every node gets a key on every update
  TotalKeySubscription, ///< m > n = s, only subscribers get keys
  PartialKeySubscription ///< m > n > s, leftover keys go to a random nonsubscriber subset
};

/// Fully connected receiver graph; every node gossips at total rate lambda_e,
/// split evenly over its m - 1 outgoing edges.
struct HomogeneousRates {
  double lambda_e = 0.0;
};

/// Explicit nonnegative rate matrix; rate[i][j] is the Poisson rate of the
/// directed edge i -> j. The diagonal must be zero. A zero entry means the
/// edge does not exist.
struct HeterogeneousRates {
  std::vector<std::vector<double>> rate;
};

using EdgeRates = std::variant<HomogeneousRates, HeterogeneousRates>;

/// One threshold-coded gossip network. Decoding an update needs k + 1 distinct
/// keys out of the n distributed per update; k counts the keys needed beyond
/// the first. Subscribers are nodes 0 .. s - 1.
struct NetworkConfig {
  int k = 0;
  int n = 1;
  int s = 1;
  int m = 1;
  double lambda_s = 1.0;
  EdgeRates edges = HomogeneousRates{1.0};
  Scheme scheme = Scheme::Memory;
};

inline const char* to_string(Scheme s) {
  return s == Scheme::Memory ? "memory" : "memoryless";
}

inline const char* to_string(NodeClass c) {
  return c == NodeClass::Subscriber ? "subscriber" : "nonsubscriber";
}

inline const char* to_string(Population p) {
  switch (p) {
    case Population::Subscriber: return "subscriber";
    case Population::Nonsubscriber: return "nonsubscriber";
    default: return "graph";
  }
}

inline const char* to_string(NetworkType t) {
  switch (t) {
    case NetworkType::FullSubscription: return "FullSubscription";
    case NetworkType::TotalKeySubscription: return "TotalKeySubscription";
    default: return "PartialKeySubscription";
  }
}

namespace detail {

inline void check_counts(int k, int n, int s, int m) {
  auto fail = [&](const std::string& msg) {
    std::ostringstream os;
    os << msg << " (k=" << k << " n=" << n << " s=" << s << " m=" << m << ")";
    throw ConfigError(ConfigFault::InvalidCounts, os.str());
  };
  if (m < 1) fail("need at least one receiver node");
  if (n < 1) fail("need at least one key per update");
  if (s < 0) fail("subscriber count cannot be negative");
  if (s > n) fail("subscriber count cannot exceed keys per update");
  if (n > m) fail("keys per update cannot exceed node count");
  if (k < 0) fail("extra-key count cannot be negative");
  if (k >= n) fail("decode threshold k + 1 cannot exceed keys per update");
  if (n == m && s < n) fail("n = m requires s = n, otherwise every node is effectively subscribed");
}

inline bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

} // namespace detail

/// Classifies a count triple into its network type. Counts must already be
/// consistent (use validate_config for a full check).
inline NetworkType classify_network(int n, int s, int m) {
  if (m == n && n == s) return NetworkType::FullSubscription;
  if (m > n && n == s) return NetworkType::TotalKeySubscription;
  if (m > n && n > s) return NetworkType::PartialKeySubscription;
  std::ostringstream os;
  os << "counts match no network type (n=" << n << " s=" << s << " m=" << m << ")";
  throw ConfigError(ConfigFault::InvalidCounts, os.str());
}

/// A NetworkConfig that passed validation, plus derived facts the rest of the
/// library relies on.
struct ValidatedConfig {
  NetworkConfig cfg;
  NetworkType type = NetworkType::FullSubscription;
  int threshold = 1;               ///< distinct keys needed to decode, k + 1
  std::vector<int> in_degree;      ///< per node, edges arriving from other receivers

  bool homogeneous() const { return std::holds_alternative<HomogeneousRates>(cfg.edges); }
  double lambda_e() const { return std::get<HomogeneousRates>(cfg.edges).lambda_e; }
  const std::vector<std::vector<double>>& rate_matrix() const {
    return std::get<HeterogeneousRates>(cfg.edges).rate;
  }
  NodeClass node_class(int j) const {
    return j < cfg.s ? NodeClass::Subscriber : NodeClass::Nonsubscriber;
  }
};

/// Checks counts, rates, and threshold feasibility. Feasibility requires every
/// receiver's in-degree from other receivers (the source's edges do not count)
/// to be at least k + 1; in the homogeneous fully connected case that is
/// m - 1 >= k + 1.
inline ValidatedConfig validate_config(const NetworkConfig& cfg) {
  detail::check_counts(cfg.k, cfg.n, cfg.s, cfg.m);
  if (!detail::positive_finite(cfg.lambda_s))
    throw ConfigError(ConfigFault::NonpositiveRate, "source rate lambda_s must be positive and finite");

  ValidatedConfig v;
  v.cfg = cfg;
  v.type = classify_network(cfg.n, cfg.s, cfg.m);
  v.threshold = cfg.k + 1;
  v.in_degree.assign(static_cast<std::size_t>(cfg.m), 0);

  if (std::holds_alternative<HomogeneousRates>(cfg.edges)) {
    double le = std::get<HomogeneousRates>(cfg.edges).lambda_e;
    if (!detail::positive_finite(le))
      throw ConfigError(ConfigFault::NonpositiveRate, "gossip rate lambda_e must be positive and finite");
    for (auto& d : v.in_degree) d = cfg.m - 1;
  } else {
    const auto& rate = std::get<HeterogeneousRates>(cfg.edges).rate;
    if (static_cast<int>(rate.size()) != cfg.m)
      throw ConfigError(ConfigFault::NonpositiveRate, "rate matrix must be m x m");
    for (int i = 0; i < cfg.m; ++i) {
      if (static_cast<int>(rate[static_cast<std::size_t>(i)].size()) != cfg.m)
        throw ConfigError(ConfigFault::NonpositiveRate, "rate matrix must be m x m");
      for (int j = 0; j < cfg.m; ++j) {
        double r = rate[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        if (!std::isfinite(r) || r < 0.0)
          throw ConfigError(ConfigFault::NonpositiveRate, "rate matrix entries must be finite and nonnegative");
        if (i == j && r != 0.0)
          throw ConfigError(ConfigFault::NonpositiveRate, "rate matrix diagonal must be zero");
        if (i != j && r > 0.0) ++v.in_degree[static_cast<std::size_t>(j)];
      }
    }
  }

  for (int j = 0; j < cfg.m; ++j) {
    if (v.in_degree[static_cast<std::size_t>(j)] < v.threshold) {
      std::ostringstream os;
      os << "node " << j << " has in-degree " << v.in_degree[static_cast<std::size_t>(j)]
         << ", below the decode threshold " << v.threshold;
      throw ConfigError(ConfigFault::InfeasibleTopology, os.str());
    }
  }
  return v;
}

/// Convenience builder for the common fully connected homogeneous case.
inline NetworkConfig make_homogeneous(int k, int n, int s, int m, double lambda_s,
                                      double lambda_e, Scheme scheme) {
  NetworkConfig cfg;
  cfg.k = k;
  cfg.n = n;
  cfg.s = s;
  cfg.m = m;
  cfg.lambda_s = lambda_s;
  cfg.edges = HomogeneousRates{lambda_e};
  cfg.scheme = scheme;
  return cfg;
}

} // namespace vaoi
