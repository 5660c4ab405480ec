#include "radcal/report.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "radcal/dataset_io.hpp"
#include "radcal/error.hpp"

namespace radcal {

namespace {

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

}  // namespace

std::string format_comparison_table(std::span<const CalibrationResult> results) {
  static constexpr const char* kHeader[] = {"Model", "J", "alpha", "gamma", "u0", "beta", "v0", "k1", "k2"};
  constexpr std::size_t kCols = std::size(kHeader);

  std::vector<std::array<std::string, kCols>> rows;
  rows.push_back({});
  for (std::size_t c = 0; c < kCols; ++c) rows.back()[c] = kHeader[c];
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const auto k = coefficients(r.distortion);
    const auto& a = r.intrinsics;
    rows.push_back({"#" + std::to_string(i + 1) + " " + std::string(model_name(kind_of(r.distortion))),
                    fixed4(r.final_j), fixed4(a.alpha), fixed4(a.gamma), fixed4(a.u0), fixed4(a.beta), fixed4(a.v0),
                    fixed4(k[0]), k.size() > 1 ? fixed4(k[1]) : std::string("-")});
  }

  std::array<std::size_t, kCols> width{};
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < kCols; ++c) width[c] = std::max(width[c], row[c].size());
  }

  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < kCols; ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << rows[i][c];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << rows[i][c];
      }
    }
    out << '\n';
    if (i == 0) {
      std::size_t total = width[0];
      for (std::size_t c = 1; c < kCols; ++c) total += 2 + width[c];
      out << std::string(total, '-') << '\n';
    }
  }
  return out.str();
}

void write_report(std::ostream& out, std::span<const CalibrationResult> results, const std::string& dataset_label) {
  out << "Distortion model comparison\n";
  out << "dataset: " << dataset_label << '\n';
  if (!results.empty()) out << "views: " << results.front().poses.size() << '\n';
  out << '\n' << format_comparison_table(results) << '\n';

  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out << "#" << i + 1 << " " << model_name(kind_of(r.distortion)) << ": " << r.iterations << " iterations";
    if (r.termination) out << ", stopped on " << to_string(*r.termination);
    out << "; per-view RMS (px):";
    for (double rms : r.per_view_rms) out << ' ' << fixed4(rms);
    out << '\n';
  }

  nlohmann::json block;
  block["dataset"] = dataset_label;
  block["results"] = nlohmann::json::array();
  for (const auto& r : results) block["results"].push_back(result_to_json(r));
  out << '\n' << kMachineBlockMarker << '\n' << block.dump(1) << '\n';
}

nlohmann::json read_machine_block(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (line == kMachineBlockMarker) {
      try {
        return nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("machine-readable block: ") + e.what());
      }
    }
  }
  throw Error(ErrorCode::ParseError, "report has no machine-readable block");
}

}  // namespace radcal
