#include "radcal/dataset_io.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "radcal/error.hpp"

namespace radcal {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::SchemaError, "field '" + field + "' " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(path + key, "is missing");
  return obj.at(key);
}

Point2 read_pair(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    schema_error(field, "must be a pair of numbers");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

// Line and column of a byte offset, 1-based.
std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

DatasetFile parse_dataset(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, locate(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }

  DatasetFile out;
  const json& header = require(doc, "header", "");
  const json& version = require(header, "format_version", "header.");
  if (!version.is_number_integer() || version.get<int>() != kDatasetFormatVersion) {
    schema_error("header.format_version", "must be " + std::to_string(kDatasetFormatVersion));
  }
  const json& units = require(header, "units", "header.");
  if (!units.is_string()) schema_error("header.units", "must be a string");
  out.units = units.get<std::string>();

  const json& points = require(require(doc, "target", ""), "points", "target.");
  if (!points.is_array()) schema_error("target.points", "must be an array");
  for (std::size_t j = 0; j < points.size(); ++j) {
    const Point2 p = read_pair(points[j], "target.points[" + std::to_string(j) + "]");
    out.dataset.target_points.emplace_back(p.x(), p.y(), 0.0);
  }

  const json& views = require(doc, "views", "");
  if (!views.is_array()) schema_error("views", "must be an array");
  for (std::size_t i = 0; i < views.size(); ++i) {
    const std::string path = "views[" + std::to_string(i) + "].";
    CalibrationView view;
    const json& name = require(views[i], "name", path);
    if (!name.is_string()) schema_error(path + "name", "must be a string");
    view.name = name.get<std::string>();
    const json& corners = require(views[i], "corners", path);
    if (!corners.is_array()) schema_error(path + "corners", "must be an array");
    if (corners.size() != points.size()) {
      std::ostringstream msg;
      msg << "view '" << view.name << "': expected " << points.size() << " corners, got " << corners.size();
      throw Error(ErrorCode::CountMismatch, msg.str());
    }
    for (std::size_t j = 0; j < corners.size(); ++j) {
      if (corners[j].is_null()) {
        view.corners.emplace_back(std::nullopt);
      } else {
        view.corners.emplace_back(read_pair(corners[j], path + "corners[" + std::to_string(j) + "]"));
      }
    }
    out.dataset.views.push_back(std::move(view));
  }

  if (doc.contains("ground_truth")) {
    try {
      out.ground_truth = result_from_json(doc.at("ground_truth"));
    } catch (const json::exception& e) {
      schema_error("ground_truth", std::string("is malformed: ") + e.what());
    }
  }
  return out;
}

DatasetFile load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return parse_dataset(in);
}

CalibrationDataset load_dataset(const std::string& path) { return load_dataset_file(path).dataset; }

void write_dataset(std::ostream& out, const DatasetFile& file) {
  json doc;
  doc["header"] = {{"format_version", kDatasetFormatVersion}, {"units", file.units}};
  json points = json::array();
  for (const auto& p : file.dataset.target_points) points.push_back({p.x(), p.y()});
  doc["target"] = {{"points", points}};
  json views = json::array();
  for (const auto& view : file.dataset.views) {
    json corners = json::array();
    for (const auto& c : view.corners) {
      if (c) {
        corners.push_back({c->x(), c->y()});
      } else {
        corners.push_back(nullptr);
      }
    }
    views.push_back({{"name", view.name}, {"corners", corners}});
  }
  doc["views"] = views;
  if (file.ground_truth) doc["ground_truth"] = result_to_json(*file.ground_truth);
  out << doc.dump(1) << '\n';
}

void save_dataset(const std::string& path, const DatasetFile& file) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  write_dataset(out, file);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

json result_to_json(const CalibrationResult& result) {
  const auto& a = result.intrinsics;
  json j;
  j["model"] = std::string(model_name(kind_of(result.distortion)));
  j["J"] = result.final_j;
  j["intrinsics"] = {{"alpha", a.alpha}, {"gamma", a.gamma}, {"u0", a.u0}, {"beta", a.beta}, {"v0", a.v0}};
  j["k"] = coefficients(result.distortion);
  json poses = json::array();
  for (const auto& pose : result.poses) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) rows.push_back(vec_json(pose.rotation.row(i).transpose()));
    poses.push_back({{"axis_angle", vec_json(pose.axis_angle())},
                     {"rotation", rows},
                     {"translation", vec_json(pose.translation)}});
  }
  j["poses"] = poses;
  j["per_view_rms"] = result.per_view_rms;
  j["iterations"] = result.iterations;
  return j;
}

CalibrationResult result_from_json(const json& j) {
  CalibrationResult r;
  const auto kind = parse_model_kind(j.at("model").get<std::string>());
  if (!kind) schema_error("model", "names an unknown distortion model");
  const auto k = j.at("k").get<std::vector<double>>();
  r.distortion = make_model(*kind, k);
  const json& a = j.at("intrinsics");
  r.intrinsics = CameraIntrinsics{a.at("alpha").get<double>(), a.at("beta").get<double>(), a.at("gamma").get<double>(),
                                  a.at("u0").get<double>(), a.at("v0").get<double>()};
  for (const auto& p : j.at("poses")) {
    const auto w = p.at("axis_angle").get<std::vector<double>>();
    const auto t = p.at("translation").get<std::vector<double>>();
    if (w.size() != 3 || t.size() != 3) schema_error("poses", "entries need 3-vectors");
    PoseRT pose = PoseRT::from_axis_angle(Vec3(w[0], w[1], w[2]), Vec3(t[0], t[1], t[2]));
    // The stored matrix is exact; the axis-angle form is for reading.
    if (p.contains("rotation")) {
      const auto rows = p.at("rotation").get<std::vector<std::vector<double>>>();
      if (rows.size() != 3) schema_error("poses.rotation", "must be 3x3");
      for (int i = 0; i < 3; ++i) {
        if (rows[i].size() != 3) schema_error("poses.rotation", "must be 3x3");
        for (int c = 0; c < 3; ++c) pose.rotation(i, c) = rows[i][c];
      }
    }
    r.poses.push_back(pose);
  }
  r.final_j = j.at("J").get<double>();
  r.initial_j = r.final_j;
  if (j.contains("per_view_rms")) r.per_view_rms = j.at("per_view_rms").get<std::vector<double>>();
  if (j.contains("iterations")) r.iterations = j.at("iterations").get<int>();
  return r;
}

}  // namespace radcal
