#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "radcal/calibration.hpp"

namespace radcal {

// Dataset file, version 1 (JSON):
//
//   {
//     "header": {"format_version": 1, "units": "mm"},
//     "target": {"points": [[X, Y], ...]},
//     "views": [{"name": "view1", "corners": [[u, v] | null, ...]}, ...],
//     "ground_truth": {...}            // optional, written by `synth`
//   }
//
// corners[j] pairs with target.points[j]; null marks a corner that was not
// extracted.
inline constexpr int kDatasetFormatVersion = 1;

struct DatasetFile {
  std::string units = "mm";
  CalibrationDataset dataset;
  std::optional<CalibrationResult> ground_truth;
};

DatasetFile parse_dataset(std::istream& in);
DatasetFile load_dataset_file(const std::string& path);
CalibrationDataset load_dataset(const std::string& path);

void write_dataset(std::ostream& out, const DatasetFile& file);
void save_dataset(const std::string& path, const DatasetFile& file);

// Full-precision JSON form of a result (the machine-readable block of reports).
nlohmann::json result_to_json(const CalibrationResult& result);
CalibrationResult result_from_json(const nlohmann::json& j);

}  // namespace radcal
