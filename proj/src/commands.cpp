#include "gea/commands.hpp"

#include "gea/anchor.hpp"
#include "gea/benchmark.hpp"
#include "gea/dataset.hpp"
#include "gea/energy.hpp"
#include "gea/error.hpp"
#include "gea/image_io.hpp"
#include "gea/metrics.hpp"
#include "gea/registration.hpp"
#include "gea/serialize.hpp"
#include "gea/wavelet.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace gea {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, Family> kFamilyMap{{"scalar", Family::Scalar},
                                               {"diag_bias", Family::DiagBias},
                                               {"linear9", Family::Linear9},
                                               {"affine12", Family::Affine12}};

const std::map<std::string, MotionModel> kModelMap{{"translation", MotionModel::Translation},
                                                   {"euclidean", MotionModel::Euclidean},
                                                   {"affine", MotionModel::Affine}};

void require_same_shape(const ImageBuffer& low, const ImageBuffer& gt) {
  if (!low.same_shape(gt))
    throw DataError("low is " + std::to_string(low.width()) + "x" + std::to_string(low.height()) +
                    " but gt is " + std::to_string(gt.width()) + "x" +
                    std::to_string(gt.height()));
}

std::string fallback_for(Family f) {
  switch (f) {
    case Family::Affine12: return "linear9 or diag_bias";
    case Family::Linear9: return "diag_bias or scalar";
    case Family::DiagBias: return "scalar";
    case Family::Scalar: break;
  }
  return "none (input has no signal)";
}

int default_threads() {
  if (const char* env = std::getenv("GEA_THREADS")) {
    int n = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [p, ec] = std::from_chars(env, end, n);
    if (ec != std::errc() || p != end || n < 1)
      throw InvalidInput(std::string("GEA_THREADS must be a positive integer, got '") + env + "'");
    return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void print_diagnostics(std::ostream& out, const FitResult& fit, double residual,
                       const ImageBuffer& low) {
  const MatrixDiagnostics d = diagnostics(fit, low);
  out << "family: " << family_name(fit.matrix.family) << "\n"
      << "fit_residual: " << format_double(residual) << "\n"
      << "condition: " << format_double(fit.condition) << "\n"
      << "diag_mean: " << format_double(d.diag_mean) << "\n"
      << "offdiag_mean: " << format_double(d.offdiag_mean) << "\n"
      << "bias_mean: " << format_double(d.bias_mean) << "\n"
      << "diagonal_dominant: " << (d.diagonal_dominant ? "true" : "false") << "\n"
      << "input_mean_luma: " << format_double(d.input_mean_luma) << "\n";
  if (d.min_norm_solution) out << "min_norm_solution: true\n";
}

// --- fit ---------------------------------------------------------------

struct FitArgs {
  std::string low, gt, out;
  Family family = Family::Affine12;
  bool allow_min_norm = false;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const ImageBuffer low = load_rgb(a.low);
  const ImageBuffer gt = load_rgb(a.gt);
  require_same_shape(low, gt);
  FitOptions opts;
  opts.allow_min_norm = a.allow_min_norm;
  const FitResult fit = fit_anchor_detailed(low, gt, a.family, opts);
  write_text_file(a.out, dump(to_json(fit.matrix)));
  print_diagnostics(out, fit, fit_residual(fit.matrix, low, gt), low);
  return kExitOk;
}

// --- apply -------------------------------------------------------------

struct ApplyArgs {
  std::string low, matrix, out;
  bool clamp = false;
};

int cmd_apply(const ApplyArgs& a, std::ostream& out, std::ostream& err) {
  const AnchorMatrix m = anchor_from_json(read_json_file(a.matrix));
  const ImageBuffer low = load_rgb(a.low);
  const ImageBuffer aligned = apply_anchor(m, low);
  const std::size_t clipped = count_out_of_range(aligned);
  if (clipped > 0)
    err << "warning: " << clipped << " of " << aligned.sample_count()
        << " samples fall outside [0,1] and were clipped for 8-bit export"
        << (a.clamp ? "" : " (pass --clamp to make this explicit)") << "\n";
  // 8-bit export clamps regardless; --clamp only changes the warning.
  save_png(a.out, clamp01(aligned));
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

// --- analyze -----------------------------------------------------------

struct AnalyzeArgs {
  std::string low, gt, out;
  Family family = Family::Affine12;
  double gamma_l = kDefaultGammaL;
  std::string hist_dir;
  int bins = kDefaultHistogramBins;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const ImageBuffer low = load_rgb(a.low);
  const ImageBuffer gt = load_rgb(a.gt);
  require_same_shape(low, gt);
  FitResult fit;
  try {
    fit = fit_anchor_detailed(low, gt, a.family);
  } catch (const DegenerateFit& e) {
    err << "error: " << e.what() << "\n"
        << "hint: retry with --family " << fallback_for(a.family) << "\n";
    return kExitNumerical;
  }
  const ImageBuffer aligned = apply_anchor(fit.matrix, low);
  const PairScore pre = pair_score(low, gt);
  const PairScore post = pair_score(aligned, gt);
  const auto range = kDefaultHistogramRange;
  const ResidualHistogram h_pre = residual_histogram(low, gt, ResidualChannel::Y, a.bins, range);
  const ResidualHistogram h_post =
      residual_histogram(aligned, gt, ResidualChannel::Y, a.bins, range);
  const ImageBuffer y_gt = to_grayscale(gt);
  const ImageBuffer y_low = to_grayscale(low);
  const ImageBuffer y_al = to_grayscale(aligned);
  const double ratio = luminance_error_ratio(low, aligned, gt);

  Json j;
  j["config"] = convention_header();
  j["config"]["family"] = std::string(family_name(a.family));
  j["config"]["gamma_l"] = number(a.gamma_l);
  j["matrix"] = to_json(fit.matrix);
  j["condition"] = number(fit.condition);
  j["fit_residual"] = number(fit_residual(fit.matrix, low, gt));
  j["diagnostics"] = to_json(diagnostics(fit, low));
  j["luminance_error_ratio"] = number(ratio);
  j["pre"]["score"] = to_json(pre);
  j["pre"]["energy"] = to_json(decompose_energy(low, gt));
  j["pre"]["hf_freq_loss"] = number(hf_freq_loss(y_low, y_gt));
  j["pre"]["histogram"] = to_json(h_pre);
  j["post"]["score"] = to_json(post);
  j["post"]["energy"] = to_json(decompose_energy(aligned, gt));
  j["post"]["hf_freq_loss"] = number(hf_freq_loss(y_al, y_gt));
  j["post"]["ll_gap"] = number(lum_preservation_loss(dwt_haar(y_al).ll, dwt_haar(y_gt).ll));
  j["post"]["histogram"] = to_json(h_post);
  write_text_file(a.out, dump(j));
  if (!a.hist_dir.empty()) {
    write_text_file(fs::path(a.hist_dir) / "hist_pre.csv", histogram_csv(h_pre));
    write_text_file(fs::path(a.hist_dir) / "hist_post.csv", histogram_csv(h_post));
  }
  out << "psnr_db: " << format_double(pre.psnr_db) << " -> " << format_double(post.psnr_db)
      << "\n"
      << "luminance_error_ratio: " << format_double(ratio) << "\n";
  return kExitOk;
}

// --- register ----------------------------------------------------------

struct RegisterArgs {
  std::string low, gt, out_dir;
  int margin = 4;
  EccOptions ecc;
};

int cmd_register(const RegisterArgs& a, std::ostream& out, std::ostream& err) {
  const ImageBuffer low = load_rgb(a.low);
  const ImageBuffer gt = load_rgb(a.gt);
  require_same_shape(low, gt);
  const RegisteredPair reg = register_pair(low, gt, a.margin, a.ecc);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  save_png(dir / "low.png", clamp01(reg.low));
  save_png(dir / "gt.png", clamp01(reg.gt));
  Json j;
  j["warp"] = to_json(reg.ecc.warp, a.ecc.model);
  j["crop"] = to_json(reg.crop);
  j["margin"] = a.margin;
  j["final_ecc"] = number(reg.ecc.final_ecc);
  j["iterations"] = reg.ecc.iterations;
  j["converged"] = reg.ecc.converged;
  write_text_file(dir / "warp.json", dump(j));
  out << "final_ecc: " << format_double(reg.ecc.final_ecc) << "\n"
      << "iterations: " << reg.ecc.iterations << "\n"
      << "crop: " << reg.crop.row0 << "," << reg.crop.col0 << "," << reg.crop.rows << ","
      << reg.crop.cols << "\n";
  if (!reg.ecc.converged) {
    err << "error: ECC did not converge in " << a.ecc.max_iters
        << " iterations; best-seen warp written and flagged\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// --- benchmark ---------------------------------------------------------

struct BenchArgs {
  std::string dir, report, csv, manifest;
  std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
  bool register_pairs = false;
  int margin = 4;
  MotionModel model = MotionModel::Affine;
  double gamma_l = kDefaultGammaL;
  int threads = 0;
};

int cmd_benchmark(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  BenchmarkConfig cfg;
  cfg.families = a.families;
  cfg.register_pairs = a.register_pairs;
  cfg.margin = a.margin;
  cfg.ecc.model = a.model;
  cfg.gamma_l = a.gamma_l;
  cfg.threads = a.threads > 0 ? a.threads : default_threads();

  std::optional<fs::path> manifest;
  if (!a.manifest.empty()) manifest = a.manifest;
  const Discovery d = discover_pairs(a.dir, manifest);
  const BenchmarkOutput res =
      run_benchmark(d, cfg, [&](const std::string& msg) { err << "warning: " << msg << "\n"; });
  write_text_file(a.report, dump(res.report));
  const std::string csv_path =
      a.csv.empty() ? fs::path(a.report).replace_extension(".csv").string() : a.csv;
  write_text_file(csv_path, res.csv);
  out << "rows: " << res.rows << "\n"
      << "skipped: " << res.skipped << "\n";
  if (res.rows == 0) {
    err << "error: no usable pairs in " << a.dir << "\n";
    return kExitData;
  }
  return kExitOk;
}

template <class F>
int guarded(F&& body, std::ostream& err) {
  try {
    return body();
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Global energy anchoring toolkit for low-light image pairs", "gea"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Least-squares anchor matrix for one pair");
  fit_cmd->add_option("low", fit.low, "Low-light input image")->required();
  fit_cmd->add_option("gt", fit.gt, "Reference image")->required();
  fit_cmd->add_option("-o,--out", fit.out, "Output matrix JSON")->required();
  fit_cmd->add_option("--family", fit.family, "Matrix family")
      ->transform(CLI::CheckedTransformer(kFamilyMap, CLI::ignore_case));
  fit_cmd->add_flag("--allow-min-norm", fit.allow_min_norm,
                    "Return a minimum-norm solution instead of failing on rank deficiency");

  ApplyArgs apply;
  auto* apply_cmd = app.add_subcommand("apply", "Apply an anchor matrix to an image");
  apply_cmd->add_option("low", apply.low, "Input image")->required();
  apply_cmd->add_option("matrix", apply.matrix, "Matrix JSON")->required();
  apply_cmd->add_option("-o,--out", apply.out, "Output PNG")->required();
  apply_cmd->add_flag("--clamp", apply.clamp, "Clamp to [0,1] (8-bit export always clamps)");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Energy analysis before and after anchoring");
  analyze_cmd->add_option("low", analyze.low, "Low-light input image")->required();
  analyze_cmd->add_option("gt", analyze.gt, "Reference image")->required();
  analyze_cmd->add_option("-o,--out", analyze.out, "Output JSON")->required();
  analyze_cmd->add_option("--family", analyze.family, "Matrix family")
      ->transform(CLI::CheckedTransformer(kFamilyMap, CLI::ignore_case));
  analyze_cmd->add_option("--gamma-l", analyze.gamma_l, "CLU amplitude recorded in the header")
      ->check(CLI::NonNegativeNumber);
  analyze_cmd->add_option("--bins", analyze.bins, "Histogram bins")->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--hist-csv", analyze.hist_dir,
                          "Directory for hist_pre.csv and hist_post.csv");

  RegisterArgs reg;
  auto* reg_cmd = app.add_subcommand("register", "ECC-register a pair and crop to the shared region");
  reg_cmd->add_option("low", reg.low, "Low-light input image")->required();
  reg_cmd->add_option("gt", reg.gt, "Reference image")->required();
  reg_cmd->add_option("-o,--out-dir", reg.out_dir, "Output directory")->required();
  reg_cmd->add_option("--margin", reg.margin, "Crop margin in pixels")->check(CLI::NonNegativeNumber);
  reg_cmd->add_option("--model", reg.ecc.model, "Motion model")
      ->transform(CLI::CheckedTransformer(kModelMap, CLI::ignore_case));
  reg_cmd->add_option("--max-iters", reg.ecc.max_iters, "ECC iteration cap")
      ->check(CLI::PositiveNumber);
  reg_cmd->add_option("--eps", reg.ecc.eps, "ECC convergence threshold")
      ->check(CLI::PositiveNumber);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Ideal anchoring over a dataset directory");
  bench_cmd->add_option("dataset", bench.dir, "Directory with low/ and high/")->required();
  bench_cmd->add_option("-o,--out", bench.report, "Report JSON")->required();
  bench_cmd->add_option("--csv", bench.csv, "Per-pair CSV (default: report path with .csv)");
  bench_cmd->add_option("--manifest", bench.manifest, "CSV with header id,low,gt");
  bench_cmd->add_option("--families", bench.families, "Comma-separated matrix families")
      ->delimiter(',')
      ->transform(CLI::CheckedTransformer(kFamilyMap, CLI::ignore_case));
  bench_cmd->add_flag("--register", bench.register_pairs, "ECC-register each pair first");
  bench_cmd->add_option("--margin", bench.margin, "Crop margin when registering")
      ->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--model", bench.model, "Motion model when registering")
      ->transform(CLI::CheckedTransformer(kModelMap, CLI::ignore_case));
  bench_cmd->add_option("--gamma-l", bench.gamma_l, "CLU amplitude")
      ->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (default: $GEA_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*fit_cmd) return guarded([&] { return cmd_fit(fit, out); }, err);
  if (*apply_cmd) return guarded([&] { return cmd_apply(apply, out, err); }, err);
  if (*analyze_cmd) return guarded([&] { return cmd_analyze(analyze, out, err); }, err);
  if (*reg_cmd) return guarded([&] { return cmd_register(reg, out, err); }, err);
  if (*bench_cmd) {
    if (bench.families.empty()) {
      err << "error: --families needs at least one family\n";
      return kExitUsage;
    }
    return guarded([&] { return cmd_benchmark(bench, out, err); }, err);
  }
  return kExitUsage;
}

}  // namespace gea
