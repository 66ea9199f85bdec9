#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "errors.hpp"

namespace vaoi {

/// SplitMix64 finalizer, used to spread seeds for replication streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for stream `stream` derived from a base seed. Pure function, so
/// replications can run in any order or thread and still use fixed streams.
inline std::uint64_t derive_stream_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(mix64(base) ^ mix64(stream + 1));
}

/// Deterministic random source. All variate transforms are written out here
/// rather than taken from <random> distribution classes, whose output is
/// implementation defined; this keeps runs bit-identical for a given seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform on (0, 1]; never returns 0, so log() below is safe.
  double uniform01() {
    return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  /// Unbiased integer in [0, n) via Lemire's multiply-with-rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    for (;;) {
      std::uint64_t x = eng_();
      __uint128_t prod = static_cast<__uint128_t>(x) * n;
      std::uint64_t low = static_cast<std::uint64_t>(prod);
      if (low >= n) return static_cast<std::uint64_t>(prod >> 64);
      std::uint64_t threshold = (0ULL - n) % n;
      if (low >= threshold) return static_cast<std::uint64_t>(prod >> 64);
    }
  }

  /// Fisher-Yates prefix: after the call, data[0 .. count-1] is a uniform
  /// random `count`-subset of the array in random order. The tail keeps the
  /// remaining elements, so the same array can be reused across calls.
  template <class T>
  void partial_shuffle(std::vector<T>& data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t j = i + static_cast<std::size_t>(uniform_below(data.size() - i));
      std::swap(data[i], data[j]);
    }
  }

private:
  std::mt19937_64 eng_;
};

/// Walker alias table for O(1) sampling from a fixed discrete distribution.
/// Construction is deterministic (index worklists, no hashing).
class AliasTable {
public:
  AliasTable() = default;

  explicit AliasTable(const std::vector<double>& weights) {
    std::size_t n = weights.size();
    if (n == 0) throw DomainError("alias table needs at least one weight");
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("alias weights must be finite and nonnegative");
      total += w;
    }
    if (!(total > 0.0)) throw DomainError("alias weights must not all be zero");
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total;
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
    while (!small.empty() && !large.empty()) {
      std::size_t s = small.back();
      small.pop_back();
      std::size_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::size_t i : large) prob_[i] = 1.0;
    for (std::size_t i : small) prob_[i] = 1.0;
  }

  std::size_t sample(Rng& rng) const {
    std::size_t i = static_cast<std::size_t>(rng.uniform_below(prob_.size()));
    return rng.uniform01() <= prob_[i] ? i : alias_[i];
  }

  std::size_t size() const { return prob_.size(); }

private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

} // namespace vaoi
