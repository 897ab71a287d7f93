// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace contrast {

/// Nearest-rank percentile, q in (0, 1]. percentile(xs, 0.5) is the lower
/// median for even-sized inputs.
inline double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("percentile of empty sample");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("percentile rank outside (0, 1]");
  std::sort(samples.begin(), samples.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
  return samples[std::max<std::size_t>(rank, 1) - 1];
}

/// Wall-time samples in milliseconds.
class LatencyHistogram {
 public:
  void record(double ms) { samples_.push_back(ms); }
  void clear() noexcept { samples_.clear(); }

  std::size_t count() const noexcept { return samples_.size(); }
  const std::vector<double>& samples() const noexcept { return samples_; }

  double total() const noexcept { return std::accumulate(samples_.begin(), samples_.end(), 0.0); }
  double min() const { return *std::min_element(samples_.begin(), samples_.end()); }
  double median() const { return percentile(samples_, 0.5); }
  double p95() const { return percentile(samples_, 0.95); }

 private:
  std::vector<double> samples_;
};

}  // namespace contrast
