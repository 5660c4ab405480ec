#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "radcal/calibration.hpp"

namespace radcal {

// Line that separates the human-readable table from the JSON block.
inline constexpr const char* kMachineBlockMarker = "#--- machine-readable ---";

// One row per model: Model | J | alpha | gamma | u0 | beta | v0 | k1 | k2,
// four decimals, "-" for a coefficient the model does not have.
std::string format_comparison_table(std::span<const CalibrationResult> results);

// Text table, per-view RMS, then the marker and the full-precision JSON block
// {"dataset": ..., "results": [...]}.
void write_report(std::ostream& out, std::span<const CalibrationResult> results, const std::string& dataset_label);

// JSON block of a report written by write_report.
nlohmann::json read_machine_block(std::istream& in);

}  // namespace radcal
