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

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "support.h"
#include "txsk/backend.h"
#include "txsk/error.h"
#include "txsk/harness.h"
#include "txsk/metrics.h"
#include "txsk/ntc.h"
#include "txsk/toy_embedder.h"
#include "txsk/types.h"

namespace {

txsk::NtcModel FrozenModel() {
  txsk::NtcModel model(4, 99);
  model.RoundParamsToF32();
  model.FreezeTables();
  return model;
}

std::vector<txsk::BenchmarkItem> Dataset(int count, int extent,
                                         uint64_t seed) {
  std::vector<txsk::BenchmarkItem> items;
  for (int i = 0; i < count; ++i) {
    items.push_back({"img" + std::to_string(i),
                     txsk::test::SyntheticScene(seed + i, extent, extent)});
  }
  return items;
}

txsk::BenchmarkConfig SmallConfig() {
  txsk::BenchmarkConfig config;
  config.inversion.prompt_length = 4;
  config.inversion.step_count = 25;
  config.inversion.restart_count = 2;
  config.inversion.random_seed = 9;
  config.generation_seed = 3;
  return config;
}

// A complete small run shared by several cases.
txsk::BenchmarkResult RunSmall(const std::vector<txsk::BenchmarkItem>& items) {
  txsk::ToyEmbedder embedder({.vocab_size = 256, .embed_dim = 16, .seed = 13});
  txsk::ToyTokenizer tokenizer(256);
  txsk::MockBackend backend;
  txsk::RandomProjectionExtractor extractor(12, 41);
  const txsk::NtcModel model = FrozenModel();
  return txsk::RunBenchmark(items, embedder, tokenizer, backend, &model,
                            nullptr, extractor, SmallConfig());
}

std::string ReadFileOrEmpty(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return {};
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

size_t CountOccurrences(const std::string& haystack,
                        const std::string& needle) {
  size_t count = 0;
  for (size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("benchmark emits one row per image and mode with consistent rates") {
  const auto items = Dataset(4, 48, 500);
  const txsk::BenchmarkResult result = RunSmall(items);

  CHECK(result.failures.empty());
  CHECK(result.image_count == 4);
  REQUIRE(result.reports.size() == 8);
  CHECK(result.embedder_id == "toy-v1/seed13/V256/d16");
  CHECK(result.feature_extractor_id == "randproj-v1/seed41/d12");

  std::map<std::string, std::map<std::string, txsk::RateReport>> by_image;
  for (const txsk::RateReport& row : result.reports) {
    CHECK(row.bpp > 0.0);
    CHECK(row.total_bits > 0);
    CHECK(row.d_clip >= 0.0);
    CHECK(row.d_clip <= 2.0);
    CHECK(std::isfinite(row.ms_ssim));
    by_image[row.image_id][row.mode] = row;
  }
  REQUIRE(by_image.size() == 4);
  for (const auto& [id, rows] : by_image) {
    REQUIRE(rows.count("pic") == 1);
    REQUIRE(rows.count("pics") == 1);
    // The sketch stream always costs extra bits.
    CHECK(rows.at("pic").bpp < rows.at("pics").bpp);
    CHECK(rows.at("pic").sketch_bits == 0);
    CHECK(rows.at("pics").sketch_bits > 0);
  }

  REQUIRE(result.summaries.size() == 2);
  CHECK(result.summaries[0].mode == "pic");
  CHECK(result.summaries[1].mode == "pics");
  for (const txsk::ModeSummary& s : result.summaries) {
    CHECK(s.sample_count == 4);
    CHECK(std::isfinite(s.fid));
    CHECK(std::isfinite(s.kid));
    CHECK(s.mean_bpp > 0.0);
  }

  // Transmitting the sketch pulls reconstructions toward the original
  // in embedding space, at least on average.
  CHECK(result.summaries[1].mean_d_clip <=
        result.summaries[0].mean_d_clip + 1e-12);
}

TEST_CASE("benchmark reruns reproduce byte-identical artifacts") {
  const auto items = Dataset(3, 48, 520);
  const txsk::BenchmarkResult a = RunSmall(items);
  const txsk::BenchmarkResult b = RunSmall(items);
  CHECK(txsk::RateReportCsv(a.reports) == txsk::RateReportCsv(b.reports));
  CHECK(txsk::SummaryJson(a) == txsk::SummaryJson(b));
  CHECK(txsk::RatePlotSvg(a.reports, "d_clip") ==
        txsk::RatePlotSvg(b.reports, "d_clip"));
}

TEST_CASE("per-image failures are recorded without aborting the run") {
  txsk::ToyEmbedder embedder({.vocab_size = 256, .embed_dim = 16, .seed = 13});
  txsk::ToyTokenizer tokenizer(256);
  txsk::MockBackend backend;
  txsk::RandomProjectionExtractor extractor(12, 41);
  const txsk::NtcModel model = FrozenModel();

  // One item is too small to be a valid image; its rows become failure
  // records while the healthy items complete.
  std::vector<txsk::BenchmarkItem> items = Dataset(2, 48, 540);
  txsk::Image broken;
  broken.width = 4;
  broken.height = 4;
  broken.data.assign(4 * 4 * 3, 0.5f);
  items.insert(items.begin() + 1, {"broken", broken});

  const txsk::BenchmarkResult result =
      txsk::RunBenchmark(items, embedder, tokenizer, backend, &model, nullptr,
                         extractor, SmallConfig());
  CHECK(result.reports.size() == 4);
  REQUIRE(result.failures.size() == 2);
  for (const txsk::BenchmarkFailure& f : result.failures) {
    CHECK(f.image_id == "broken");
    CHECK(!f.message.empty());
  }
  for (const txsk::ModeSummary& s : result.summaries) {
    CHECK(s.sample_count == 2);
  }
}

TEST_CASE("a missing sketch model fails only the sketch rows") {
  txsk::ToyEmbedder embedder({.vocab_size = 256, .embed_dim = 16, .seed = 13});
  txsk::ToyTokenizer tokenizer(256);
  txsk::MockBackend backend;
  txsk::RandomProjectionExtractor extractor(12, 41);

  const auto items = Dataset(2, 48, 560);
  const txsk::BenchmarkResult result =
      txsk::RunBenchmark(items, embedder, tokenizer, backend, nullptr, nullptr,
                         extractor, SmallConfig());

  CHECK(result.reports.size() == 2);
  for (const txsk::RateReport& row : result.reports) {
    CHECK(row.mode == "pic");
  }
  REQUIRE(result.failures.size() == 2);
  for (const txsk::BenchmarkFailure& f : result.failures) {
    CHECK(f.mode == "pics");
  }

  // The starved mode still appears in the summary, with no realism
  // scores to report.
  REQUIRE(result.summaries.size() == 2);
  CHECK(result.summaries[1].mode == "pics");
  CHECK(result.summaries[1].sample_count == 0);
  CHECK(std::isnan(result.summaries[1].fid));
  CHECK(std::isnan(result.summaries[1].kid));

  // NaN realism scores serialize as JSON null.
  const nlohmann::json summary =
      nlohmann::json::parse(txsk::SummaryJson(result));
  CHECK(summary["modes"]["pics"]["fid"].is_null());
  CHECK(summary["modes"]["pics"]["kid"].is_null());
  CHECK(summary["modes"]["pic"]["fid"].is_number());
}

TEST_CASE("empty benchmark inputs are rejected") {
  txsk::ToyEmbedder embedder({.vocab_size = 256, .embed_dim = 16, .seed = 13});
  txsk::ToyTokenizer tokenizer(256);
  txsk::MockBackend backend;
  txsk::RandomProjectionExtractor extractor(12, 41);

  try {
    txsk::RunBenchmark({}, embedder, tokenizer, backend, nullptr, nullptr,
                       extractor, SmallConfig());
    FAIL("empty dataset accepted");
  } catch (const txsk::Error& e) {
    CHECK(e.code() == txsk::ErrorCode::kData);
  }

  txsk::BenchmarkConfig no_modes = SmallConfig();
  no_modes.modes.clear();
  const auto items = Dataset(1, 48, 580);
  try {
    txsk::RunBenchmark(items, embedder, tokenizer, backend, nullptr, nullptr,
                       extractor, no_modes);
    FAIL("empty mode list accepted");
  } catch (const txsk::Error& e) {
    CHECK(e.code() == txsk::ErrorCode::kConfig);
  }

  try {
    txsk::EvalPairs({}, embedder, extractor);
    FAIL("empty pair list accepted");
  } catch (const txsk::Error& e) {
    CHECK(e.code() == txsk::ErrorCode::kData);
  }
}

TEST_CASE("pair evaluation of identical sets scores perfectly") {
  txsk::ToyEmbedder embedder({.vocab_size = 256, .embed_dim = 16, .seed = 13});
  txsk::RandomProjectionExtractor extractor(12, 41);

  // More samples than feature dimensions keeps the Gaussian fits full
  // rank; the identical-set distances then vanish to solver precision.
  std::vector<txsk::PairItem> pairs;
  for (int i = 0; i < 14; ++i) {
    const txsk::Image img = txsk::test::SyntheticScene(600 + i, 44, 44);
    pairs.push_back({"p" + std::to_string(i), img, img});
  }
  const txsk::BenchmarkResult result =
      txsk::EvalPairs(pairs, embedder, extractor);

  CHECK(result.failures.empty());
  REQUIRE(result.reports.size() == 14);
  for (const txsk::RateReport& row : result.reports) {
    CHECK(row.mode == "pairs");
    CHECK(row.total_bits == 0);
    CHECK(row.bpp == 0.0);
    CHECK(row.d_clip == 0.0);
    CHECK(row.ms_ssim == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isinf(row.psnr));
  }
  REQUIRE(result.summaries.size() == 1);
  const txsk::ModeSummary& s = result.summaries[0];
  CHECK(s.mode == "pairs");
  CHECK(s.sample_count == 14);
  CHECK(std::abs(s.fid) <= 1e-9);
  CHECK(std::abs(s.kid) <= 1e-9);

  // Infinite psnr shows up as the literal "inf" in the CSV and as null
  // in the JSON summary.
  const std::string csv = txsk::RateReportCsv(result.reports);
  CHECK(csv.find(",inf\n") != std::string::npos);
  const nlohmann::json summary =
      nlohmann::json::parse(txsk::SummaryJson(result));
  CHECK(summary["modes"]["pairs"]["mean_psnr"].is_null());
  CHECK(summary["modes"]["pairs"]["mean_ms_ssim"].is_number());
}

TEST_CASE("csv formatting is fixed-width and total") {
  txsk::RateReport row;
  row.image_id = "img1";
  row.mode = "pic";
  row.total_bits = 352;
  row.bpp = 0.5;
  row.d_clip = 0.25;
  row.ms_ssim = std::numeric_limits<double>::quiet_NaN();
  row.psnr = std::numeric_limits<double>::infinity();

  const std::string csv = txsk::RateReportCsv({&row, 1});
  CHECK(csv ==
        "image_id,mode,total_bits,bpp,d_clip,ms_ssim,psnr\n"
        "img1,pic,352,0.500000,0.250000,nan,inf\n");

  CHECK(txsk::RateReportCsv({}) ==
        "image_id,mode,total_bits,bpp,d_clip,ms_ssim,psnr\n");
}

TEST_CASE("scatter plots drop non-finite points and keep the legend") {
  txsk::PlotSeries finite;
  finite.label = "good";
  finite.points = {{0.1, 1.0}, {0.2, 2.0}, {0.3, 1.5}};
  txsk::PlotSeries holed;
  holed.label = "holed";
  holed.points = {{0.15, std::numeric_limits<double>::quiet_NaN()},
                  {0.25, 1.2}};

  const std::string svg = txsk::ScatterPlotSvg({finite, holed}, "rate",
                                               "quality", "demo");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>\n") == svg.size() - 7);
  CHECK(svg.find("demo") != std::string::npos);
  CHECK(svg.find("rate") != std::string::npos);
  CHECK(svg.find("quality") != std::string::npos);
  // Four finite data points plus one legend marker per series.
  CHECK(CountOccurrences(svg, "<circle") == 6);

  // All-empty input still renders a frame.
  const std::string empty = txsk::ScatterPlotSvg({}, "x", "y", "empty");
  CHECK(empty.rfind("<svg", 0) == 0);
  CHECK(CountOccurrences(empty, "<circle") == 0);
}

TEST_CASE("rate plots group rows by mode and reject unknown metrics") {
  const auto items = Dataset(2, 48, 620);
  const txsk::BenchmarkResult result = RunSmall(items);

  const std::string svg = txsk::RatePlotSvg(result.reports, "ms_ssim");
  CHECK(svg.find(">pic</text>") != std::string::npos);
  CHECK(svg.find(">pics</text>") != std::string::npos);
  CHECK(svg.find("rate vs ms_ssim") != std::string::npos);

  try {
    txsk::RatePlotSvg(result.reports, "vibes");
    FAIL("unknown metric accepted");
  } catch (const txsk::Error& e) {
    CHECK(e.code() == txsk::ErrorCode::kArgument);
  }
}

TEST_CASE("benchmark outputs land on disk and match the golden artifacts") {
  const auto items = Dataset(3, 48, 640);
  const txsk::BenchmarkResult result = RunSmall(items);

  txsk::test::TempDir dir("harness");
  txsk::WriteBenchmarkOutputs(result, dir.file("out"));

  const std::filesystem::path out = dir.file("out");
  const std::vector<std::string> names = {"rate_quality.csv", "summary.json",
                                          "plot_d_clip.svg",
                                          "plot_ms_ssim.svg",
                                          "plot_psnr.svg"};
  for (const std::string& name : names) {
    CAPTURE(name);
    REQUIRE(std::filesystem::exists(out / name));
  }
  CHECK(ReadFileOrEmpty(out / "rate_quality.csv") ==
        txsk::RateReportCsv(result.reports));
  CHECK(ReadFileOrEmpty(out / "summary.json") == txsk::SummaryJson(result));
  CHECK(ReadFileOrEmpty(out / "plot_psnr.svg") ==
        txsk::RatePlotSvg(result.reports, "psnr"));

  // Golden comparison keeps the schema honest across refactors. Set
  // TXSK_REGEN_GOLDEN=1 to refresh after an intentional change.
  const std::filesystem::path golden =
      std::filesystem::path(TXSK_TEST_DATA_DIR) / "harness";
  if (std::getenv("TXSK_REGEN_GOLDEN") != nullptr) {
    std::filesystem::create_directories(golden);
    for (const std::string& name : names) {
      std::ofstream f(golden / name, std::ios::binary);
      const std::string content = ReadFileOrEmpty(out / name);
      f.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
  }
  for (const std::string& name : names) {
    CAPTURE(name);
    REQUIRE(std::filesystem::exists(golden / name));
    CHECK(ReadFileOrEmpty(out / name) == ReadFileOrEmpty(golden / name));
  }
}
