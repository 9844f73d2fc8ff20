// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "model.hpp"

namespace lorafa {

enum class TaskKind { Copy, Reverse, CharLm };

std::string_view to_string(TaskKind kind);
TaskKind parse_task(std::string_view text);

// Reserved token ids; payload symbols are [kFirstPayload, vocab).
constexpr std::int32_t kBos = 0;
constexpr std::int32_t kSep = 1;
constexpr std::int32_t kEos = 2;
constexpr std::int32_t kFirstPayload = 3;

/// Fixed-length examples. Copy and reverse pack
///   [BOS, x_1..x_m, SEP, y_1..y_m] (+ EOS if s is odd), m = (s - 2) / 2,
/// and score next-token predictions of y only. Char-lm is a walk over a
/// seeded sparse Markov chain with every next-token prediction scored.
struct Dataset {
  TaskKind kind = TaskKind::Copy;
  std::size_t vocab = 0;
  std::size_t seq = 0;
  std::size_t count = 0;
  std::vector<std::int32_t> tokens;   // [count * seq]
  std::vector<std::int32_t> targets;  // [count * seq], -1 = not scored

  /// `b` consecutive examples starting at `first`, wrapping around.
  TokenBatch batch(std::size_t first, std::size_t b) const;
};

Dataset gen_task(TaskKind kind, std::size_t vocab, std::size_t seq, std::size_t n_examples,
                 std::uint64_t seed);

}  // namespace lorafa
