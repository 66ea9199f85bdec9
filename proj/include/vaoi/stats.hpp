#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace vaoi {

/// Two-sided 95% Student-t quantile, saturating to the normal value for large
/// degrees of freedom.
inline double student_t_975(long df) {
  static const double table[] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return std::numeric_limits<double>::quiet_NaN();
  if (df <= 30) return table[df - 1];
  if (df <= 40) return 2.021;
  if (df <= 60) return 2.000;
  if (df <= 120) return 1.980;
  return 1.960;
}

/// Welford accumulator for mean and sample variance.
class RunningStats {
public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::uint64_t count() const { return n_; }
  double mean() const { return n_ ? mean_ : std::numeric_limits<double>::quiet_NaN(); }
  double sample_variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : std::numeric_limits<double>::quiet_NaN();
  }
  double standard_error() const {
    return n_ > 1 ? std::sqrt(sample_variance() / static_cast<double>(n_))
                  : std::numeric_limits<double>::quiet_NaN();
  }

private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Batch-means accumulator over renewal cycles. Cycles are grouped into
/// equal-size batches; when 64 batches fill up, adjacent pairs merge and the
/// batch capacity doubles, keeping the count in [32, 64) once enough cycles
/// exist. The point estimate is the ratio of total reward to total length
/// over all completed cycles; the confidence half-width comes from the
/// spread of the per-batch ratios.
class BatchMeans {
public:
  void add_cycle(double reward, double length) {
    total_reward_ += reward;
    total_length_ += length;
    ++cycles_;
    cur_reward_ += reward;
    cur_length_ += length;
    if (++cur_fill_ == capacity_) {
      batches_.emplace_back(cur_reward_, cur_length_);
      cur_reward_ = cur_length_ = 0.0;
      cur_fill_ = 0;
      if (batches_.size() == 64) {
        for (std::size_t i = 0; i < 32; ++i) {
          batches_[i].first = batches_[2 * i].first + batches_[2 * i + 1].first;
          batches_[i].second = batches_[2 * i].second + batches_[2 * i + 1].second;
        }
        batches_.resize(32);
        capacity_ *= 2;
      }
    }
  }

  std::uint64_t cycles() const { return cycles_; }
  double total_reward() const { return total_reward_; }
  double total_length() const { return total_length_; }

  double ratio() const {
    return cycles_ ? total_reward_ / total_length_ : std::numeric_limits<double>::quiet_NaN();
  }

  double half_width() const {
    if (batches_.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    RunningStats rs;
    for (const auto& [r, l] : batches_) rs.add(r / l);
    return student_t_975(static_cast<long>(batches_.size()) - 1) * rs.standard_error();
  }

  std::size_t batch_count() const { return batches_.size(); }

private:
  std::vector<std::pair<double, double>> batches_;
  std::uint64_t capacity_ = 1;
  std::uint64_t cur_fill_ = 0;
  double cur_reward_ = 0.0;
  double cur_length_ = 0.0;
  double total_reward_ = 0.0;
  double total_length_ = 0.0;
  std::uint64_t cycles_ = 0;
};

} // namespace vaoi
