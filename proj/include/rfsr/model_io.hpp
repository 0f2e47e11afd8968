#pragma once

#include <filesystem>

#include <json.hpp>

#include "rfsr/estimator.hpp"

namespace rfsr {

/// {map, filter, lambda, iterations, fit_path, theta (base64 LE float64),
///  theta_size, train_fingerprint}
nlohmann::json model_to_json(const RfModel& model);
RfModel model_from_json(const nlohmann::json& j);

void save_model(const RfModel& model, const std::filesystem::path& path);
RfModel load_model(const std::filesystem::path& path);

}  // namespace rfsr
