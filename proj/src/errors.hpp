// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lorafa {

enum class ErrorKind {
  Dimension,       // shape mismatch
  Parameter,       // invalid hyper-parameter or construction argument
  Retention,       // backward asked for an activation the forward did not keep
  Mode,            // operation not valid for the layer's adaptation mode
  Data,            // token id out of range, malformed dataset
  State,           // optimizer state does not match the parameters
  Numeric,         // NaN / Inf produced
  Reconciliation,  // analytic and measured accounting disagree
  Config,          // run configuration rejected
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + " error: " + what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace lorafa
