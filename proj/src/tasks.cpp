// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "tasks.hpp"

#include <algorithm>
#include <string>

#include "errors.hpp"
#include "rng.hpp"

namespace lorafa {

namespace {

constexpr std::size_t kChainFanout = 3;  // successors per char-lm state

void gen_seq2seq(Dataset& ds, Rng& rng) {
  const std::size_t s = ds.seq, m = (s - 2) / 2;
  const auto payload = static_cast<std::uint64_t>(ds.vocab) - kFirstPayload;
  std::vector<std::int32_t> src(m);
  for (std::size_t n = 0; n < ds.count; ++n) {
    std::int32_t* tok = ds.tokens.data() + n * s;
    std::int32_t* tgt = ds.targets.data() + n * s;
    for (auto& x : src) x = kFirstPayload + static_cast<std::int32_t>(rng.next_below(payload));
    tok[0] = kBos;
    std::copy(src.begin(), src.end(), tok + 1);
    tok[m + 1] = kSep;
    if (ds.kind == TaskKind::Reverse) std::reverse(src.begin(), src.end());
    std::copy(src.begin(), src.end(), tok + m + 2);
    if (2 * m + 2 < s) tok[s - 1] = kEos;
    std::fill(tgt, tgt + s, -1);
    for (std::size_t t = m + 1; t < 2 * m + 1; ++t) tgt[t] = tok[t + 1];
  }
}

void gen_char_lm(Dataset& ds, Rng& rng) {
  const std::size_t payload = ds.vocab - kFirstPayload;
  // Each state has a few successors with skewed weights.
  Rng chain_rng = rng.derive("chain");
  std::vector<std::int32_t> next(payload * kChainFanout);
  for (auto& x : next)
    x = kFirstPayload + static_cast<std::int32_t>(chain_rng.next_below(payload));
  const std::uint64_t weights[kChainFanout] = {4, 2, 1};
  const std::uint64_t total = 7;

  Rng walk = rng.derive("walk");
  const std::size_t s = ds.seq;
  for (std::size_t n = 0; n < ds.count; ++n) {
    std::int32_t* tok = ds.tokens.data() + n * s;
    std::int32_t* tgt = ds.targets.data() + n * s;
    tok[0] = kBos;
    std::int32_t state = kFirstPayload + static_cast<std::int32_t>(walk.next_below(payload));
    for (std::size_t t = 1; t < s; ++t) {
      tok[t] = state;
      std::uint64_t u = walk.next_below(total);
      std::size_t pick = 0;
      while (u >= weights[pick]) u -= weights[pick++];
      state = next[static_cast<std::size_t>(state - kFirstPayload) * kChainFanout + pick];
    }
    for (std::size_t t = 0; t + 1 < s; ++t) tgt[t] = tok[t + 1];
    tgt[s - 1] = -1;
  }
}

}  // namespace

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Copy: return "copy";
    case TaskKind::Reverse: return "reverse";
    case TaskKind::CharLm: return "char-lm";
  }
  return "?";
}

TaskKind parse_task(std::string_view text) {
  if (text == "copy") return TaskKind::Copy;
  if (text == "reverse") return TaskKind::Reverse;
  if (text == "char-lm") return TaskKind::CharLm;
  fail(ErrorKind::Parameter, "unknown task '" + std::string(text) + "'");
}

TokenBatch Dataset::batch(std::size_t first, std::size_t b) const {
  require(count >= 1 && b >= 1, ErrorKind::Data, "batch from an empty dataset");
  TokenBatch out{b, seq, {}, {}};
  out.tokens.reserve(b * seq);
  out.targets.reserve(b * seq);
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t n = (first + i) % count;
    out.tokens.insert(out.tokens.end(), tokens.begin() + n * seq, tokens.begin() + (n + 1) * seq);
    out.targets.insert(out.targets.end(), targets.begin() + n * seq,
                       targets.begin() + (n + 1) * seq);
  }
  return out;
}

Dataset gen_task(TaskKind kind, std::size_t vocab, std::size_t seq, std::size_t n_examples,
                 std::uint64_t seed) {
  require(vocab >= 4, ErrorKind::Parameter, "vocab must be >= 4 (three ids are reserved)");
  require(seq >= 4, ErrorKind::Parameter, "sequence length must be >= 4");
  require(n_examples >= 1, ErrorKind::Parameter, "n_examples must be >= 1");
  Dataset ds{kind, vocab, seq, n_examples, std::vector<std::int32_t>(n_examples * seq),
             std::vector<std::int32_t>(n_examples * seq)};
  Rng rng = Rng(seed).derive(to_string(kind));
  if (kind == TaskKind::CharLm)
    gen_char_lm(ds, rng);
  else
    gen_seq2seq(ds, rng);
  return ds;
}

}  // namespace lorafa
