#pragma once

#include <string>

#include <json.hpp>

#include "spinsense/crossing_fit.hpp"

namespace spinsense::io {

/// Model parameters with units in the key names.
nlohmann::json model_to_json(const CrossingModel& model);
nlohmann::json fit_result_to_json(const FitResult& result);

void write_json(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::string& path);

}  // namespace spinsense::io
