// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <string>

#include <json.hpp>

#include "harness.hpp"

namespace lorafa {

using Json = nlohmann::ordered_json;

// Non-finite doubles are written as null and read back as NaN.

Json to_json(const ModelConfig& cfg);
Json to_json(const RunConfig& cfg);
Json to_json(const MemoryBreakdown& m);
Json to_json(const MeasuredActivations& m);
Json to_json(const ReconcileReport& r);
Json to_json(const RunReport& rep);
Json to_json(const SweepGrid& grid);
Json to_json(const MemReport& rep);
Json to_json(const GradCheckReport& rep);
Json to_json(const std::vector<CheckVerdict>& verdicts);

/// Overlays the keys present in `j` onto `base`. Unknown keys and wrong
/// types are config errors.
RunConfig run_config_from_json(const Json& j, const RunConfig& base = {});
MemoryBreakdown memory_breakdown_from_json(const Json& j);
RunReport run_report_from_json(const Json& j);

/// Every parameter (trainable or not) plus the config header.
Json checkpoint_to_json(const TransformerModel& model);
TransformerModel checkpoint_from_json(const Json& j);

/// Parses text, mapping syntax errors to config errors.
Json parse_json(const std::string& text);
std::string dump(const Json& j);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace lorafa
