#pragma once

#include "gea/anchor.hpp"
#include "gea/dataset.hpp"
#include "gea/energy.hpp"
#include "gea/registration.hpp"
#include "gea/serialize.hpp"
#include "gea/wavelet.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gea {

struct BenchmarkConfig {
  std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
  bool register_pairs = false;
  int margin = 4;
  EccOptions ecc{};
  double gamma_l = kDefaultGammaL;
  int threads = 1;
  int histogram_bins = kDefaultHistogramBins;
  std::pair<double, double> histogram_range = kDefaultHistogramRange;
};

struct BenchmarkOutput {
  Json report;
  std::string csv;
  std::size_t rows = 0;
  std::size_t skipped = 0;
};

// Conventions recorded in every report header.
Json convention_header();

// Runs ideal anchoring (and optional registration) over every pair. Pairs
// that fail to decode, mismatch in size, or hit a degenerate fit are skipped
// and listed. Output bytes depend only on the inputs and the config, never on
// `threads`. Throws gea::Error if any Affine12 row ends with a lower PSNR than
// its input.
BenchmarkOutput run_benchmark(const Discovery& discovery, const BenchmarkConfig& config,
                              const std::function<void(const std::string&)>& warn = {});

// Mean and median per flattened numeric column, in row order. Exposed so the
// report invariant (aggregates recomputable from rows) can be checked.
Json aggregate_columns(const std::vector<std::vector<std::pair<std::string, double>>>& rows);

// Flattened numeric columns of one serialised report row.
std::vector<std::pair<std::string, double>> row_columns(const Json& row);

}  // namespace gea
