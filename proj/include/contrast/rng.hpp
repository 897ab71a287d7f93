// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

#include <cstdint>
#include <random>

namespace contrast {

/// Seedable generator used for every sampling decision.
///
/// The engine is MT19937-64 (std::mt19937_64, whose output sequence is fixed
/// by the C++ standard). Uniform doubles take the top 53 bits of one draw, so
/// sampled sequences are identical across platforms and standard libraries;
/// std::uniform_real_distribution is deliberately not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace contrast
