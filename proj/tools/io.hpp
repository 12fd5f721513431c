#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwlimit/gwmodel.hpp"
#include "gwlimit/reconstruct.hpp"

namespace gwlimit::cli {

/// Thrown for unreadable or malformed input files; maps to exit code 1.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// {"type":"polynomial","p":[...]} or {"type":"linear_fractional","b":..,"c":..}
Pgf pgf_from_json(const nlohmann::json& doc);
nlohmann::json pgf_to_json(const Pgf& pgf);

/// {"q":..,"alpha":..,"beta":..,"coeffs":[...]}
DensityModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const DensityModel& model);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

/// Header line plus one row per entry of the equally long columns.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

}  // namespace gwlimit::cli
