// Copyright (c) the TXSK Project Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Dataset-level evaluation: runs the full codec over an image set,
// collects per-image rate/fidelity rows plus per-mode realism scores,
// and renders the CSV / summary / rate-quality plot artifacts.

#ifndef TXSK_HARNESS_H_
#define TXSK_HARNESS_H_

#include <span>
#include <string>
#include <vector>

#include "txsk/metrics.h"
#include "txsk/pipeline.h"
#include "txsk/types.h"

namespace txsk {

struct BenchmarkItem {
  std::string id;
  Image image;
};

struct BenchmarkConfig {
  std::vector<Mode> modes = {Mode::kPic, Mode::kPics};
  TokenCoding token_coding = TokenCoding::kFixedWidth;
  PiConfig inversion;
  uint64_t generation_seed = 0;
  GenParams generation;
};

struct BenchmarkFailure {
  std::string image_id;
  std::string mode;
  std::string message;
};

// Realism scores for one reconstruction set against its originals.
// fid/kid are NaN when fewer than two pairs survived.
struct ModeSummary {
  std::string mode;
  int sample_count = 0;
  double fid = 0.0;
  double kid = 0.0;
  double mean_bpp = 0.0;
  double mean_d_clip = 0.0;
  double mean_ms_ssim = 0.0;
  double mean_psnr = 0.0;
};

struct BenchmarkResult {
  std::vector<RateReport> reports;
  std::vector<BenchmarkFailure> failures;
  std::vector<ModeSummary> summaries;
  std::string feature_extractor_id;
  std::string embedder_id;
  int image_count = 0;
};

// Compress -> serialized roundtrip -> decompress -> metrics for every
// image and mode. Per-image failures land in `failures` and never abort
// the run. Prompt inversion runs once per image and is shared across
// modes. Throws kData on an empty dataset.
BenchmarkResult RunBenchmark(std::span<const BenchmarkItem> items,
                             const Embedder& embedder,
                             const Tokenizer& tokenizer, Backend& backend,
                             const NtcModel* sketch_model,
                             const EdgeDetector* detector,
                             const FeatureExtractor& extractor,
                             const BenchmarkConfig& config);

struct PairItem {
  std::string id;
  Image original;
  Image reconstruction;
};

// Metrics over precomputed reconstructions; rows carry zero bits and
// mode "pairs".
BenchmarkResult EvalPairs(std::span<const PairItem> items,
                          const Embedder& embedder,
                          const FeatureExtractor& extractor);

// Header line plus one row per report: image_id, mode, total_bits, bpp,
// d_clip, ms_ssim, psnr. Fixed six-decimal formatting keeps reruns
// byte-identical.
std::string RateReportCsv(std::span<const RateReport> reports);

// Machine-readable run summary (per-mode realism, failures, variant
// ids) as pretty-printed JSON with sorted keys.
std::string SummaryJson(const BenchmarkResult& result);

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
};

struct PlotSeries {
  std::string label;
  std::vector<PlotPoint> points;
};

// Self-contained scatter plot; non-finite points are dropped.
std::string ScatterPlotSvg(const std::vector<PlotSeries>& series,
                           const std::string& x_label,
                           const std::string& y_label,
                           const std::string& title);

// One rate-vs-metric plot for `metric` in {d_clip, ms_ssim, psnr},
// one series per mode.
std::string RatePlotSvg(std::span<const RateReport> reports,
                        const std::string& metric);

// Writes rate_quality.csv, summary.json and the three rate plots into
// `out_dir` (created when absent).
void WriteBenchmarkOutputs(const BenchmarkResult& result,
                           const std::string& out_dir);

}  // namespace txsk

#endif  // TXSK_HARNESS_H_
