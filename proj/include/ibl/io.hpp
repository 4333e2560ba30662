#pragma once

// JSON encodings of datasets, run configurations and solver results.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ibl/fixedpoint.hpp"
#include "ibl/optim.hpp"

namespace ibl {

using Json = nlohmann::json;

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// {"kind", "seed", "n", "d", "x"}.
Json dataset_to_json(const Dataset& data);
/// Checks shape, nonzero entries and separability; violations of the
/// standing assumptions raise AssumptionError naming the assumption.
Dataset dataset_from_json(const Json& j);

Json margin_solution_to_json(const MarginSolution& sol);
Json linf_margin_to_json(const LinfMargin& sol);
Json fixed_point_to_json(const FixedPointResult& res);

/// Every field is optional on input; missing fields keep RunConfig defaults.
Json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const Json& j);

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncate + write, throws on error.
void write_text_file(const std::filesystem::path& path, const std::string& text);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

}  // namespace ibl
