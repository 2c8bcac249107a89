#include "gea/benchmark.hpp"

#include "gea/error.hpp"
#include "gea/image_io.hpp"
#include "gea/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <variant>

namespace gea {

namespace {

// PSNR rows may lose this much to rounding in the fitted matrix before the
// never-worse check fires.
constexpr double kPsnrSlackDb = 1e-9;

struct PairOutcome {
  Json row;
  ResidualHistogram hist_pre;
  ResidualHistogram hist_post;
  std::vector<std::pair<std::string, double>> columns;
};

struct PairFailure {
  std::string reason;
};

Family post_family(const BenchmarkConfig& config) {
  Family best = config.families.front();
  for (Family f : config.families)
    if (degrees_of_freedom(f) > degrees_of_freedom(best)) best = f;
  return best;
}

void flatten(const Json& j, const std::string& prefix,
             std::vector<std::pair<std::string, double>>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const Json& v = it.value();
    if (v.is_object()) {
      flatten(v, key, out);
    } else if (v.is_number()) {
      out.emplace_back(key, v.get<double>());
    } else if (v.is_string() && (v == "inf" || v == "-inf")) {
      out.emplace_back(key, number_from(v));
    }
  }
}

Json family_block(const ImageBuffer& low, const ImageBuffer& gt, const FitResult& fit,
                  const BenchmarkConfig& config, const PairScore& pre, ImageBuffer& aligned) {
  aligned = apply_anchor(fit.matrix, low);
  const PairScore post = pair_score(aligned, gt);
  const EnergyReport energy = decompose_energy(aligned, gt);

  // Luminance planes for the wavelet-domain columns.
  const ImageBuffer y_al = to_grayscale(aligned);
  const ImageBuffer y_gt = to_grayscale(gt);
  const WaveletBands b_al = dwt_haar(y_al);
  const WaveletBands b_gt = dwt_haar(y_gt);
  // Best LL correction a gamma-bounded update can make toward the reference.
  ImageBuffer target = b_gt.ll;
  {
    auto t = target.samples();
    auto s = b_al.ll.samples();
    const double scale = config.gamma_l > 0.0 ? 1.0 / config.gamma_l : 1.0;
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = (t[i] - s[i]) * scale;
  }
  const ImageBuffer clu_ll = clu_apply(b_al.ll, target, config.gamma_l);

  Json j;
  j["matrix"] = to_json(fit.matrix);
  j["condition"] = number(fit.condition);
  j["min_norm"] = fit.min_norm;
  j["diagnostics"] = to_json(diagnostics(fit, low));
  j["fit_residual"] = number(fit_residual(fit.matrix, low, gt));
  j["score"] = to_json(post);
  j["psnr_gain_db"] = number(post.psnr_db - pre.psnr_db);
  j["energy"] = to_json(energy);
  j["luminance_error_ratio"] = number(luminance_error_ratio(low, aligned, gt));
  Json wave;
  wave["hf_freq_loss"] = number(hf_freq_loss(y_al, y_gt));
  wave["ll_gap"] = number(lum_preservation_loss(b_al.ll, b_gt.ll));
  wave["clu_ll_gap"] = number(lum_preservation_loss(clu_ll, b_gt.ll));
  wave["clu_lum_loss"] = number(lum_preservation_loss(clu_ll, b_al.ll));
  j["wavelet"] = std::move(wave);
  return j;
}

std::variant<PairOutcome, PairFailure> process_pair(const PairRecord& rec,
                                                    const BenchmarkConfig& config) {
  ImageBuffer low, gt;
  try {
    low = load_rgb(rec.low_path);
    gt = load_rgb(rec.gt_path);
  } catch (const Error& e) {
    return PairFailure{e.what()};
  }
  if (!low.same_shape(gt))
    return PairFailure{"dimension mismatch between low and gt"};

  Json row;
  row["id"] = rec.id;
  try {
    if (config.register_pairs) {
      const RegisteredPair reg = register_pair(low, gt, config.margin, config.ecc);
      Json r;
      r["warp"] = to_json(reg.ecc.warp, config.ecc.model);
      r["crop"] = to_json(reg.crop);
      r["final_ecc"] = number(reg.ecc.final_ecc);
      r["iterations"] = reg.ecc.iterations;
      r["converged"] = reg.ecc.converged;
      row["registration"] = std::move(r);
      low = reg.low;
      gt = reg.gt;
    }
    row["height"] = low.height();
    row["width"] = low.width();

    const PairScore pre = pair_score(low, gt);
    Json pre_j;
    pre_j["score"] = to_json(pre);
    pre_j["energy"] = to_json(decompose_energy(low, gt));
    pre_j["hf_freq_loss"] = number(hf_freq_loss(to_grayscale(low), to_grayscale(gt)));
    row["pre"] = std::move(pre_j);

    PairOutcome out;
    const Family hist_family = post_family(config);
    Json fams;
    for (Family f : config.families) {
      const FitResult fit = fit_anchor_detailed(low, gt, f);
      ImageBuffer aligned;
      Json block = family_block(low, gt, fit, config, pre, aligned);
      if (f == Family::Affine12) {
        const double post_psnr = number_from(block["score"]["psnr_db"]);
        if (post_psnr < pre.psnr_db - kPsnrSlackDb)
          throw Error("PSNR-never-worse violated for pair '" + rec.id + "': pre " +
                      format_double(pre.psnr_db) + " dB, post " + format_double(post_psnr) +
                      " dB");
      }
      if (f == hist_family)
        out.hist_post = residual_histogram(aligned, gt, ResidualChannel::Y, config.histogram_bins,
                                           config.histogram_range);
      fams[std::string(family_name(f))] = std::move(block);
    }
    row["families"] = std::move(fams);
    out.hist_pre = residual_histogram(low, gt, ResidualChannel::Y, config.histogram_bins,
                                      config.histogram_range);
    out.row = std::move(row);
    out.columns = row_columns(out.row);
    return out;
  } catch (const DegenerateFit& e) {
    return PairFailure{e.what()};
  } catch (const DegenerateInput& e) {
    return PairFailure{e.what()};
  } catch (const EmptyRegion& e) {
    return PairFailure{e.what()};
  } catch (const InvalidInput& e) {
    return PairFailure{e.what()};
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Json pooled_fractions(const std::vector<Json>& rows, const std::vector<std::string>& path) {
  double lum = 0.0, chr = 0.0, tex = 0.0;
  for (const Json& r : rows) {
    const Json* e = &r;
    for (const auto& key : path) e = &(*e)[key];
    lum += number_from((*e)["e_lum"]);
    chr += number_from((*e)["e_chr"]);
    tex += number_from((*e)["e_tex"]);
  }
  EnergyReport pooled;
  pooled.e_lum = lum;
  pooled.e_chr = chr;
  pooled.e_tex = tex;
  update_fractions(pooled);
  Json j;
  j["f_lum"] = number(pooled.f_lum);
  j["f_chr"] = number(pooled.f_chr);
  j["f_tex"] = number(pooled.f_tex);
  return j;
}

}  // namespace

Json convention_header() {
  Json j;
  j["color_convention"] = "BT.601 full-range YUV (U,V centred on 0)";
  j["sample_scale"] = "[0,1]: 8-bit / 255, 16-bit / 65535";
  j["metric_space"] = "RGB, inputs clamped to [0,1], peak 1.0";
  j["ssim"] = "11x11 Gaussian sigma 1.5, K1 0.01, K2 0.03, per-channel RGB mean";
  j["texture_energy"] = "4-neighbour Laplacian of BT.601 gray in [0,1], reflect-101 borders";
  j["energy_reduction"] = "per-pixel means";
  j["wavelet"] = "single-level orthonormal Haar, half-sample symmetric padding";
  return j;
}

std::vector<std::pair<std::string, double>> row_columns(const Json& row) {
  std::vector<std::pair<std::string, double>> out;
  Json numeric;
  for (const char* key : {"registration", "pre", "families"})
    if (row.contains(key)) numeric[key] = row.at(key);
  flatten(numeric, "", out);
  return out;
}

Json aggregate_columns(const std::vector<std::vector<std::pair<std::string, double>>>& rows) {
  Json agg = Json::object();
  if (rows.empty()) return agg;
  std::vector<std::string> names;
  std::map<std::string, std::vector<double>> values;
  for (const auto& row : rows)
    for (const auto& [name, v] : row) {
      auto [it, inserted] = values.try_emplace(name);
      if (inserted) names.push_back(name);
      it->second.push_back(v);
    }
  for (const auto& name : names) {
    const auto& v = values[name];
    double total = 0.0;
    for (double x : v) total += x;
    Json col;
    col["n"] = v.size();
    col["mean"] = number(total / static_cast<double>(v.size()));
    col["median"] = number(median(v));
    agg[name] = std::move(col);
  }
  return agg;
}

BenchmarkOutput run_benchmark(const Discovery& discovery, const BenchmarkConfig& config,
                              const std::function<void(const std::string&)>& warn) {
  require(!config.families.empty(), "benchmark needs at least one matrix family");
  require(config.threads >= 1, "threads must be >= 1");
  require(config.margin >= 0, "margin must be >= 0");

  const std::size_t n = discovery.pairs.size();
  std::vector<std::variant<PairOutcome, PairFailure>> results(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = process_pair(discovery.pairs[i], config);
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads),
                                                    std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  // Single-threaded assembly in id order.
  std::vector<SkippedPair> skipped = discovery.skipped;
  std::vector<Json> rows;
  std::vector<std::vector<std::pair<std::string, double>>> columns;
  ResidualHistogram hist_pre, hist_post;
  for (std::size_t i = 0; i < n; ++i) {
    if (auto* fail = std::get_if<PairFailure>(&results[i])) {
      skipped.push_back({discovery.pairs[i].id, fail->reason});
      continue;
    }
    auto& ok = std::get<PairOutcome>(results[i]);
    merge_histogram(hist_pre, ok.hist_pre);
    merge_histogram(hist_post, ok.hist_post);
    columns.push_back(std::move(ok.columns));
    rows.push_back(std::move(ok.row));
  }
  std::stable_sort(skipped.begin(), skipped.end(),
                   [](const auto& a, const auto& b) { return a.id < b.id; });
  if (warn)
    for (const auto& s : skipped) warn("skipping pair '" + s.id + "': " + s.reason);

  Json config_j = convention_header();
  Json fam = Json::array();
  for (Family f : config.families) fam.push_back(std::string(family_name(f)));
  config_j["families"] = std::move(fam);
  config_j["gamma_l"] = number(config.gamma_l);
  config_j["register"] = config.register_pairs;
  config_j["margin"] = config.margin;
  Json ecc;
  ecc["model"] = std::string(model_name(config.ecc.model));
  ecc["max_iters"] = config.ecc.max_iters;
  ecc["eps"] = number(config.ecc.eps);
  ecc["smoothing_sigma"] = number(config.ecc.smoothing_sigma);
  ecc["pyramid_levels"] = config.ecc.pyramid_levels == 0 ? Json("auto") : Json(config.ecc.pyramid_levels);
  config_j["ecc"] = std::move(ecc);
  Json hist;
  hist["channel"] = "Y";
  hist["bins"] = config.histogram_bins;
  hist["range"] = Json::array({number(config.histogram_range.first), number(config.histogram_range.second)});
  hist["post_family"] = std::string(family_name(post_family(config)));
  config_j["histogram"] = std::move(hist);
  config_j["seeds"] = Json::array();

  Json report;
  report["config"] = std::move(config_j);
  report["discovered"] = discovery.discovered;
  report["row_count"] = rows.size();
  report["skipped_count"] = skipped.size();
  Json skipped_j = Json::array();
  for (const auto& s : skipped) skipped_j.push_back(Json{{"id", s.id}, {"reason", s.reason}});
  report["skipped"] = std::move(skipped_j);
  report["aggregates"] = aggregate_columns(columns);
  if (!rows.empty()) {
    Json pooled;
    pooled["pre"] = pooled_fractions(rows, {"pre", "energy"});
    for (Family f : config.families) {
      const std::string name(family_name(f));
      pooled[name] = pooled_fractions(rows, {"families", name, "energy"});
    }
    report["pooled_energy_fractions"] = std::move(pooled);
    Json h;
    h["pre"] = to_json(hist_pre);
    h["post"] = to_json(hist_post);
    report["histograms"] = std::move(h);
  }
  report["rows"] = rows;

  // CSV: one line per pair, flattened columns in first-row order.
  std::string csv;
  if (!columns.empty()) {
    csv = "id";
    for (const auto& [name, v] : columns.front()) csv += "," + name;
    csv += "\r\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::string id = rows[i]["id"].get<std::string>();
      if (id.find_first_of(",\"\r\n") != std::string::npos) {
        std::string quoted = "\"";
        for (char c : id) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
        id = quoted + "\"";
      }
      csv += id;
      for (const auto& [name, v] : columns[i]) csv += "," + format_double(v);
      csv += "\r\n";
    }
  }

  BenchmarkOutput out;
  out.report = std::move(report);
  out.csv = std::move(csv);
  out.rows = rows.size();
  out.skipped = skipped.size();
  return out;
}

}  // namespace gea
