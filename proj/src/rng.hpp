// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <cstdint>
#include <string_view>

namespace lorafa {

/// Counter-based random stream.
///
/// Draw k of a stream is `splitmix64(seed + (k + 1) * golden)`: a pure
/// function of (seed, position), so any two streams with equal state yield
/// equal sequences regardless of platform. Normals use Box-Muller over
/// consecutive uniform pairs and advance the position by two per pair.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t position = 0)
      : seed_(seed), position_(position) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t position() const noexcept { return position_; }

  std::uint64_t next_u64();
  /// Uniform on (0, 1]; never returns 0 so log() is safe.
  double next_uniform();
  /// Two independent standard normals from one uniform pair.
  void next_normal_pair(double& z0, double& z1);
  /// Uniform integer in [0, bound).
  std::uint64_t next_below(std::uint64_t bound);

  /// Independent child stream keyed by a tag (position 0).
  Rng derive(std::string_view tag) const;
  Rng derive(std::uint64_t key) const;

 private:
  std::uint64_t seed_;
  std::uint64_t position_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);
std::uint64_t fnv1a(std::string_view text);

}  // namespace lorafa
