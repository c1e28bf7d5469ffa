#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace dupviper::schema {

// Structural checks for the JSON documents this library emits. Each returns a list
// of "path: problem" strings, empty when the document conforms.

// {"doc": string, "b": uint, "e": uint, "text": string} with b <= e.
std::vector<std::string> check_fragment(const nlohmann::json& j);

// heatmap_to_json output.
std::vector<std::string> check_heatmap(const nlohmann::json& j);

// result_set_to_json output; timings_ms is optional.
std::vector<std::string> check_result_set(const nlohmann::json& j);

// group_to_json output.
std::vector<std::string> check_group(const nlohmann::json& j);

// Session export bundle from the service.
std::vector<std::string> check_export(const nlohmann::json& j);

// ground_truth_to_json output.
std::vector<std::string> check_ground_truth(const nlohmann::json& j);

// sweep_report_summary output.
std::vector<std::string> check_sweep_summary(const nlohmann::json& j);

}  // namespace dupviper::schema
