#include "radcal/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "radcal/dataset_io.hpp"
#include "radcal/error.hpp"
#include "radcal/report.hpp"
#include "radcal/synth.hpp"

namespace radcal::cli {

namespace {

const std::vector<std::string> kFitModels = {"poly24", "poly2", "quadcubic"};

struct OptimizerFlags {
  int max_iters = LmOptions{}.max_iters;
  double tolx = LmOptions{}.param_tol;
  double tolfun = LmOptions{}.fn_tol;

  void add_to(CLI::App& app) {
    app.add_option("--max-iters", max_iters, "Maximum optimizer iterations")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--tolx", tolx, "Step-size tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--tolfun", tolfun, "Relative cost-change tolerance")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  LmOptions options() const {
    LmOptions o;
    o.max_iters = max_iters;
    o.param_tol = tolx;
    o.fn_tol = tolfun;
    return o;
  }
};

struct IntrinsicFlags {
  CameraIntrinsics intr;

  void add_to(CLI::App& app) {
    app.add_option("--alpha", intr.alpha, "Focal scale along x (px)")->capture_default_str();
    app.add_option("--beta", intr.beta, "Focal scale along y (px)")->capture_default_str();
    app.add_option("--gamma", intr.gamma, "Skew (px)")->capture_default_str();
    app.add_option("--u0", intr.u0, "Principal point x (px)")->capture_default_str();
    app.add_option("--v0", intr.v0, "Principal point y (px)")->capture_default_str();
  }
};

// Parses "u,v" (or "u v").
std::optional<Point2> parse_pixel(std::string text) {
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  double u, v;
  if (!(in >> u >> v)) return std::nullopt;
  std::string rest;
  if (in >> rest) return std::nullopt;
  return Point2(u, v);
}

// Writes to --out when given, stdout otherwise.
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  write(file);
}

int run_calibrate(const std::string& dataset_path, const std::string& model, const std::string& out_path,
                  const OptimizerFlags& flags, std::ostream& out) {
  const CalibrationDataset dataset = load_dataset(dataset_path);
  const CalibrationResult result = calibrate(dataset, *parse_model_kind(model), flags.options());
  const std::vector<CalibrationResult> results{result};
  emit(out_path, out, [&](std::ostream& os) { write_report(os, results, dataset_path); });
  if (!out_path.empty()) {
    out << format_comparison_table(results) << "report written to " << out_path << '\n';
  }
  return kExitOk;
}

int run_compare(const std::string& dataset_path, const std::string& out_path, const OptimizerFlags& flags,
                std::ostream& out) {
  const CalibrationDataset dataset = load_dataset(dataset_path);
  const Initialization init = initialize(dataset);
  std::vector<CalibrationResult> results;
  for (const auto& name : kFitModels) {
    results.push_back(calibrate_from(init, dataset, *parse_model_kind(name), flags.options()));
  }
  emit(out_path, out, [&](std::ostream& os) { write_report(os, results, dataset_path); });
  if (!out_path.empty()) {
    out << format_comparison_table(results) << "report written to " << out_path << '\n';
  }
  return kExitOk;
}

int run_undistort(double k1, double k2, const std::string& model, const IntrinsicFlags& intr_flags,
                  const std::string& points_path, const std::vector<std::string>& inline_pixels, std::ostream& out,
                  std::ostream& err) {
  const CameraIntrinsics& intr = intr_flags.intr;
  if (!intr.valid()) throw Error(ErrorCode::InvalidArgument, "intrinsics need alpha > 0 and beta > 0");
  const std::array<double, 2> k{k1, k2};
  const DistortionModel m = make_model(*parse_model_kind(model), k);

  std::vector<std::string> entries;
  if (!points_path.empty()) {
    std::ifstream in(points_path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + points_path + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
      entries.push_back(line);
    }
  }
  entries.insert(entries.end(), inline_pixels.begin(), inline_pixels.end());

  int failures = 0;
  out << std::setprecision(17);
  for (const auto& entry : entries) {
    const auto pd = parse_pixel(entry);
    if (!pd) {
      err << "cannot parse pixel '" << entry << "'\n";
      ++failures;
      continue;
    }
    try {
      const Point2 p = undistort_pixel(m, intr, *pd);
      out << pd->x() << ' ' << pd->y() << " -> " << p.x() << ' ' << p.y() << '\n';
    } catch (const Error& e) {
      out << pd->x() << ' ' << pd->y() << " -> " << to_string(e.code()) << '\n';
      err << e.what() << '\n';
      ++failures;
    }
  }
  return failures == 0 ? kExitOk : kExitFailure;
}

struct SynthFlags {
  std::string out_path;
  std::uint64_t seed = 1;
  double noise_sigma = 0.0;
  int views = 5;
  std::string grid = "8x8";
  double square_size = 30.0;
  std::string model = "quadcubic";
  double k1 = -0.12;
  double k2 = -0.14;
  IntrinsicFlags intr{CameraIntrinsics{832.5, 832.5, 0.2, 304.0, 206.5}};
};

std::pair<int, int> parse_grid(const std::string& text) {
  int rows = 0, cols = 0;
  char sep = 0;
  std::istringstream in(text);
  if (!(in >> rows >> sep >> cols) || (sep != 'x' && sep != 'X') || rows < 2 || cols < 2) {
    throw CLI::ValidationError("--grid", "expected ROWSxCOLS with both >= 2, got '" + text + "'");
  }
  return {rows, cols};
}

int run_synth(const SynthFlags& flags, std::ostream& out) {
  SynthSpec spec;
  std::tie(spec.grid_rows, spec.grid_cols) = parse_grid(flags.grid);
  spec.square_size = flags.square_size;
  spec.intrinsics = flags.intr.intr;
  const std::array<double, 2> k{flags.k1, flags.k2};
  spec.distortion = make_model(*parse_model_kind(flags.model), k);
  spec.recipe.views = flags.views;
  spec.noise_sigma = flags.noise_sigma;
  spec.rng_seed = flags.seed;

  auto [dataset, truth] = synth_views(spec);
  DatasetFile file;
  file.dataset = std::move(dataset);
  file.ground_truth = std::move(truth);
  save_dataset(flags.out_path, file);
  out << "wrote " << file.dataset.views.size() << " views x " << file.dataset.target_points.size()
      << " points to " << flags.out_path << " (J at ground truth " << std::setprecision(10)
      << file.ground_truth->final_j << ")\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Planar camera calibration with closed-form radial undistortion", "radcal"};
  app.require_subcommand(1);
  std::function<int()> action;

  std::string dataset_path;
  std::string model = "quadcubic";
  std::string out_path;
  OptimizerFlags opt;

  auto* cal = app.add_subcommand("calibrate", "Calibrate one distortion model on a dataset file");
  cal->add_option("dataset", dataset_path, "Dataset file")->required();
  cal->add_option("--model", model, "Distortion model")->capture_default_str()->check(CLI::IsMember(kFitModels));
  cal->add_option("--out", out_path, "Report file (stdout when omitted)");
  opt.add_to(*cal);
  cal->callback([&] { action = [&] { return run_calibrate(dataset_path, model, out_path, opt, out); }; });

  auto* cmp = app.add_subcommand("compare", "Fit poly24, poly2 and quadcubic with shared initialization");
  cmp->add_option("dataset", dataset_path, "Dataset file")->required();
  cmp->add_option("--out", out_path, "Report file (stdout when omitted)");
  opt.add_to(*cmp);
  cmp->callback([&] { action = [&] { return run_compare(dataset_path, out_path, opt, out); }; });

  double k1 = 0.0;
  double k2 = 0.0;
  std::string points_path;
  std::vector<std::string> pixels;
  IntrinsicFlags intr;
  auto* und = app.add_subcommand("undistort", "Map distorted pixels to undistorted pixels");
  und->add_option("k1", k1, "First distortion coefficient")->required();
  und->add_option("k2", k2, "Second distortion coefficient (ignored by poly2)")->required();
  und->add_option("pixels", pixels, "Distorted pixels as u,v");
  und->add_option("--model", model, "Distortion model")
      ->capture_default_str()
      ->check(CLI::IsMember({"poly24", "poly2", "quadcubic", "du"}));
  und->add_option("--points", points_path, "File with one 'u v' or 'u,v' pixel per line");
  intr.add_to(*und);
  und->callback([&] {
    action = [&] { return run_undistort(k1, k2, model, intr, points_path, pixels, out, err); };
  });

  SynthFlags syn_flags;
  auto* syn = app.add_subcommand("synth", "Write a synthetic dataset with ground truth");
  syn->add_option("--out", syn_flags.out_path, "Dataset file to write")->required();
  syn->add_option("--seed", syn_flags.seed, "Random seed")->capture_default_str();
  syn->add_option("--noise-sigma", syn_flags.noise_sigma, "Pixel noise standard deviation")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  syn->add_option("--views", syn_flags.views, "Number of views")->capture_default_str()->check(CLI::PositiveNumber);
  syn->add_option("--grid", syn_flags.grid, "Target corners as ROWSxCOLS")->capture_default_str();
  syn->add_option("--square-size", syn_flags.square_size, "Target square size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  syn->add_option("--model", syn_flags.model, "Distortion model used to generate the data")
      ->capture_default_str()
      ->check(CLI::IsMember({"poly24", "poly2", "quadcubic", "du"}));
  syn->add_option("--k1", syn_flags.k1, "First distortion coefficient")->capture_default_str();
  syn->add_option("--k2", syn_flags.k2, "Second distortion coefficient")->capture_default_str();
  syn_flags.intr.add_to(*syn);
  syn->callback([&] {
    parse_grid(syn_flags.grid);
    action = [&] { return run_synth(syn_flags, out); };
  });

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::InsufficientViews) {
      err << "note: calibration needs at least 3 views of the target\n";
    }
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace radcal::cli
