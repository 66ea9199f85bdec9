#pragma once

#include <vaoi/config.hpp>
#include <vaoi/rng.hpp>

#include <algorithm>

namespace support {

/// Random network where every key holder subscribes (s = n), so both schemes
/// have exact closed forms. Sizes stay small enough for quick simulation.
inline vaoi::NetworkConfig random_total_key(vaoi::Rng& rng, vaoi::Scheme scheme,
                                            int max_m = 8) {
  int m = 3 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(max_m - 2)));
  int n = 2 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(m - 1)));
  int k = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(std::min(n, m - 1))));
  double lambda_s = 5.0 + 10.0 * rng.uniform01();
  double ratio = 3.0 + 9.0 * rng.uniform01();
  return vaoi::make_homogeneous(k, n, n, m, lambda_s, ratio * lambda_s, scheme);
}

/// Random valid network of any subscription pattern, small sizes.
inline vaoi::NetworkConfig random_any(vaoi::Rng& rng, vaoi::Scheme scheme, int max_m = 7) {
  int m = 3 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(max_m - 2)));
  int n = 2 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(m - 1)));
  int k = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(std::min(n, m - 1))));
  int s = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n + 1)));
  if (n == m) s = n;
  double lambda_s = 5.0 + 10.0 * rng.uniform01();
  double ratio = 3.0 + 9.0 * rng.uniform01();
  return vaoi::make_homogeneous(k, n, s, m, lambda_s, ratio * lambda_s, scheme);
}

inline bool close_rel(double a, double b, double tol) {
  double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= tol * scale;
}

} // namespace support
