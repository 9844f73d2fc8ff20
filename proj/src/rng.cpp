// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "rng.hpp"

#include <cmath>
#include <numbers>

namespace lorafa {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (splitmix64(b) + kGolden + (a << 6) + (a >> 2)));
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Rng::next_u64() {
  ++position_;
  return splitmix64(seed_ + position_ * kGolden);
}

double Rng::next_uniform() {
  // 53 random mantissa bits, shifted to (0, 1].
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

void Rng::next_normal_pair(double& z0, double& z1) {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  z0 = radius * std::cos(angle);
  z1 = radius * std::sin(angle);
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x < limit) return x % bound;
  }
}

Rng Rng::derive(std::string_view tag) const { return derive(fnv1a(tag)); }

Rng Rng::derive(std::uint64_t key) const { return Rng(hash_combine(seed_, key)); }

}  // namespace lorafa
