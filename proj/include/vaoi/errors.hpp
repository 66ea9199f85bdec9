#pragma once

#include <stdexcept>
#include <string>

namespace vaoi {

/// Why a network configuration was rejected.
enum class ConfigFault {
  InvalidCounts,       ///< k, n, s, m violate 0 <= s <= n <= m, 0 <= k < n, or n = m with s < n
  NonpositiveRate,     ///< a rate is zero, negative, or not finite where a positive one is required
  InfeasibleTopology,  ///< some receiver's in-degree from other receivers is below k + 1
};

class ConfigError : public std::runtime_error {
public:
  ConfigError(ConfigFault fault, const std::string& what)
      : std::runtime_error(what), fault_(fault) {}
  ConfigFault fault() const noexcept { return fault_; }

private:
  ConfigFault fault_;
};

/// An argument outside a function's stated domain (bad index range, k out of
/// bounds for an order statistic, nonpositive tolerance).
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class SimFault {
  HorizonTooShort,  ///< some node completed zero renewal cycles, statistics undefined
  TraceTooLarge,    ///< event log would exceed the trace entry guard
};

class SimError : public std::runtime_error {
public:
  SimError(SimFault fault, const std::string& what)
      : std::runtime_error(what), fault_(fault) {}
  SimFault fault() const noexcept { return fault_; }

private:
  SimFault fault_;
};

enum class SolverFault {
  NoBracket,     ///< no gossip rate below the search cap closes the gap to epsilon
  NotMonotone,   ///< the scheme gap failed the monotonicity scan, bisection unsafe
};

class SolverError : public std::runtime_error {
public:
  SolverError(SolverFault fault, const std::string& what)
      : std::runtime_error(what), fault_(fault) {}
  SolverFault fault() const noexcept { return fault_; }

private:
  SolverFault fault_;
};

/// Config file, preset, or output-path problem.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace vaoi
