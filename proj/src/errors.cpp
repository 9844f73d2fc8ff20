// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "errors.hpp"

namespace lorafa {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Retention: return "retention-policy";
    case ErrorKind::Mode: return "mode";
    case ErrorKind::Data: return "data";
    case ErrorKind::State: return "state";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Reconciliation: return "reconciliation";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace lorafa
