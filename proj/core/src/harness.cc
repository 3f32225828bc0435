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

#include "txsk/harness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <utility>

#include <nlohmann/json.hpp>

#include "txsk/container.h"
#include "txsk/error.h"
#include "txsk/ms_ssim.h"

namespace txsk {
namespace {

std::string FormatFixed(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string FormatShort(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double MeanOf(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

// Accumulates per-mode rows and the feature pairs behind fid/kid.
struct ModeAccumulator {
  std::vector<Eigen::VectorXd> original_features;
  std::vector<Eigen::VectorXd> reconstruction_features;
  std::vector<double> bpp, d_clip, ms_ssim, psnr;
};

Eigen::MatrixXd StackRows(const std::vector<Eigen::VectorXd>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i];
  return m;
}

ModeSummary Summarize(const std::string& mode, const ModeAccumulator& acc) {
  ModeSummary s;
  s.mode = mode;
  s.sample_count = static_cast<int>(acc.reconstruction_features.size());
  if (s.sample_count >= 2) {
    Eigen::MatrixXd fa = StackRows(acc.original_features);
    Eigen::MatrixXd fb = StackRows(acc.reconstruction_features);
    s.fid = Fid(fa, fb);
    s.kid = Kid(fa, fb);
  } else {
    s.fid = std::numeric_limits<double>::quiet_NaN();
    s.kid = std::numeric_limits<double>::quiet_NaN();
  }
  s.mean_bpp = MeanOf(acc.bpp);
  s.mean_d_clip = MeanOf(acc.d_clip);
  s.mean_ms_ssim = MeanOf(acc.ms_ssim);
  s.mean_psnr = MeanOf(acc.psnr);
  return s;
}

void PushRow(ModeAccumulator* acc, const RateReport& row,
             const Eigen::VectorXd& orig_feat,
             const Eigen::VectorXd& recon_feat) {
  acc->original_features.push_back(orig_feat);
  acc->reconstruction_features.push_back(recon_feat);
  acc->bpp.push_back(row.bpp);
  acc->d_clip.push_back(row.d_clip);
  acc->ms_ssim.push_back(row.ms_ssim);
  acc->psnr.push_back(row.psnr);
}

nlohmann::json NumberOrNull(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

BenchmarkResult RunBenchmark(std::span<const BenchmarkItem> items,
                             const Embedder& embedder,
                             const Tokenizer& tokenizer, Backend& backend,
                             const NtcModel* sketch_model,
                             const EdgeDetector* detector,
                             const FeatureExtractor& extractor,
                             const BenchmarkConfig& config) {
  if (items.empty()) {
    throw Error(ErrorCode::kData, "evaluation dataset is empty");
  }
  if (config.modes.empty()) {
    throw Error(ErrorCode::kConfig, "no evaluation modes selected");
  }

  BenchmarkResult result;
  result.feature_extractor_id = extractor.VariantId();
  result.embedder_id = embedder.VariantId();
  result.image_count = static_cast<int>(items.size());

  std::map<std::string, ModeAccumulator> accumulators;
  for (Mode mode : config.modes) accumulators[ModeName(mode)];

  for (const BenchmarkItem& item : items) {
    // One inversion per image; every mode transmits the same prompt.
    PiResult inversion;
    bool inverted = false;
    for (Mode mode : config.modes) {
      const std::string mode_name = ModeName(mode);
      try {
        if (!inverted) {
          inversion =
              InvertPromptForImage(embedder, item.image, config.inversion);
          inverted = true;
        }
        CompressOptions opts;
        opts.mode = mode;
        opts.token_coding = config.token_coding;
        opts.inversion = config.inversion;
        CompressResult compressed = CompressWithTokens(
            item.image, inversion.tokens, tokenizer, opts, sketch_model,
            detector);

        // Decode from the serialized bytes, not the in-memory struct,
        // so the whole wire path is exercised.
        Container reread = ReadContainer(compressed.bytes);
        DecompressOptions dopts;
        dopts.seed = config.generation_seed;
        dopts.prompt_length = config.inversion.prompt_length;
        dopts.generation = config.generation;
        DecompressResult decoded =
            DecompressContainer(reread, tokenizer, backend, sketch_model,
                                static_cast<uint32_t>(embedder.vocab_size()),
                                dopts);

        RateReport row;
        row.image_id = item.id;
        row.mode = mode_name;
        row.total_bits = compressed.total_bits;
        row.bpp = compressed.bpp;
        row.token_bits = compressed.token_bits;
        row.sketch_bits = compressed.sketch_bits;
        row.header_bits = compressed.header_bits;
        row.d_clip = DClip(embedder, item.image, decoded.image);
        row.ms_ssim = MsSsim(item.image, decoded.image);
        row.psnr = Psnr(item.image, decoded.image);
        result.reports.push_back(row);
        PushRow(&accumulators[mode_name], row, extractor.Extract(item.image),
                extractor.Extract(decoded.image));
      } catch (const std::exception& e) {
        result.failures.push_back({item.id, mode_name, e.what()});
      }
    }
  }

  for (const auto& [mode_name, acc] : accumulators) {
    result.summaries.push_back(Summarize(mode_name, acc));
  }
  return result;
}

BenchmarkResult EvalPairs(std::span<const PairItem> items,
                          const Embedder& embedder,
                          const FeatureExtractor& extractor) {
  if (items.empty()) {
    throw Error(ErrorCode::kData, "evaluation dataset is empty");
  }
  BenchmarkResult result;
  result.feature_extractor_id = extractor.VariantId();
  result.embedder_id = embedder.VariantId();
  result.image_count = static_cast<int>(items.size());

  ModeAccumulator acc;
  for (const PairItem& item : items) {
    try {
      RateReport row;
      row.image_id = item.id;
      row.mode = "pairs";
      row.d_clip = DClip(embedder, item.original, item.reconstruction);
      row.ms_ssim = MsSsim(item.original, item.reconstruction);
      row.psnr = Psnr(item.original, item.reconstruction);
      result.reports.push_back(row);
      PushRow(&acc, row, extractor.Extract(item.original),
              extractor.Extract(item.reconstruction));
    } catch (const std::exception& e) {
      result.failures.push_back({item.id, "pairs", e.what()});
    }
  }
  result.summaries.push_back(Summarize("pairs", acc));
  return result;
}

std::string RateReportCsv(std::span<const RateReport> reports) {
  std::string out = "image_id,mode,total_bits,bpp,d_clip,ms_ssim,psnr\n";
  for (const RateReport& r : reports) {
    out += r.image_id;
    out += ',';
    out += r.mode;
    out += ',';
    out += std::to_string(r.total_bits);
    out += ',';
    out += FormatFixed(r.bpp);
    out += ',';
    out += FormatFixed(r.d_clip);
    out += ',';
    out += FormatFixed(r.ms_ssim);
    out += ',';
    out += FormatFixed(r.psnr);
    out += '\n';
  }
  return out;
}

std::string SummaryJson(const BenchmarkResult& result) {
  nlohmann::json root;
  root["embedder"] = result.embedder_id;
  root["feature_extractor"] = result.feature_extractor_id;
  root["image_count"] = result.image_count;
  root["row_count"] = result.reports.size();

  nlohmann::json modes = nlohmann::json::object();
  for (const ModeSummary& s : result.summaries) {
    nlohmann::json entry;
    entry["sample_count"] = s.sample_count;
    entry["fid"] = NumberOrNull(s.fid);
    entry["kid"] = NumberOrNull(s.kid);
    entry["mean_bpp"] = NumberOrNull(s.mean_bpp);
    entry["mean_d_clip"] = NumberOrNull(s.mean_d_clip);
    entry["mean_ms_ssim"] = NumberOrNull(s.mean_ms_ssim);
    entry["mean_psnr"] = NumberOrNull(s.mean_psnr);
    modes[s.mode] = entry;
  }
  root["modes"] = modes;

  nlohmann::json failures = nlohmann::json::array();
  for (const BenchmarkFailure& f : result.failures) {
    failures.push_back({{"image_id", f.image_id},
                        {"mode", f.mode},
                        {"message", f.message}});
  }
  root["failures"] = failures;
  return root.dump(2) + "\n";
}

std::string ScatterPlotSvg(const std::vector<PlotSeries>& series,
                           const std::string& x_label,
                           const std::string& y_label,
                           const std::string& title) {
  constexpr int kWidth = 640, kHeight = 480;
  constexpr int kLeft = 70, kRight = 24, kTop = 40, kBottom = 56;
  const int plot_w = kWidth - kLeft - kRight;
  const int plot_h = kHeight - kTop - kBottom;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  size_t usable = 0;
  for (const PlotSeries& s : series) {
    for (const PlotPoint& p : s.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
      ++usable;
    }
  }
  if (usable == 0) {
    xmin = 0.0;
    xmax = 1.0;
    ymin = 0.0;
    ymax = 1.0;
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double xspan = xmax - xmin, yspan = ymax - ymin;
  xmin -= 0.05 * xspan;
  xmax += 0.05 * xspan;
  ymin -= 0.05 * yspan;
  ymax += 0.05 * yspan;

  auto sx = [&](double v) {
    return kLeft + (v - xmin) / (xmax - xmin) * plot_w;
  };
  auto sy = [&](double v) {
    return kTop + plot_h - (v - ymin) / (ymax - ymin) * plot_h;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) +
         "\" viewBox=\"0 0 " + std::to_string(kWidth) + " " +
         std::to_string(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(kWidth / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" +
         title + "</text>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / kTicks;
    const double px = sx(fx);
    svg += "<line x1=\"" + FormatShort(px) + "\" y1=\"" +
           std::to_string(kTop) + "\" x2=\"" + FormatShort(px) + "\" y2=\"" +
           std::to_string(kTop + plot_h) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + FormatShort(px) + "\" y=\"" +
           std::to_string(kTop + plot_h + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           FormatShort(fx) + "</text>\n";
    const double fy = ymin + (ymax - ymin) * i / kTicks;
    const double py = sy(fy);
    svg += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" +
           FormatShort(py) + "\" x2=\"" + std::to_string(kLeft + plot_w) +
           "\" y2=\"" + FormatShort(py) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + std::to_string(kLeft - 8) + "\" y=\"" +
           FormatShort(py + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           FormatShort(fy) + "</text>\n";
  }

  // Axes on top of the grid.
  svg += "<rect x=\"" + std::to_string(kLeft) + "\" y=\"" +
         std::to_string(kTop) + "\" width=\"" + std::to_string(plot_w) +
         "\" height=\"" + std::to_string(plot_h) +
         "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + std::to_string(kLeft + plot_w / 2) + "\" y=\"" +
         std::to_string(kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">" +
         x_label + "</text>\n";
  svg += "<text x=\"18\" y=\"" + std::to_string(kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 " +
         std::to_string(kTop + plot_h / 2) + ")\">" + y_label + "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    for (const PlotPoint& p : series[si].points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      svg += "<circle cx=\"" + FormatShort(sx(p.x)) + "\" cy=\"" +
             FormatShort(sy(p.y)) + "\" r=\"4\" fill=\"" + color +
             "\" fill-opacity=\"0.8\"/>\n";
    }
    const int ly = kTop + 14 + static_cast<int>(si) * 18;
    svg += "<circle cx=\"" + std::to_string(kLeft + plot_w - 110) +
           "\" cy=\"" + std::to_string(ly) + "\" r=\"4\" fill=\"" + color +
           "\"/>\n";
    svg += "<text x=\"" + std::to_string(kLeft + plot_w - 100) + "\" y=\"" +
           std::to_string(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           series[si].label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string RatePlotSvg(std::span<const RateReport> reports,
                        const std::string& metric) {
  auto pick = [&](const RateReport& r) -> double {
    if (metric == "d_clip") return r.d_clip;
    if (metric == "ms_ssim") return r.ms_ssim;
    if (metric == "psnr") return r.psnr;
    throw Error(ErrorCode::kArgument, "unknown plot metric: " + metric);
  };
  std::map<std::string, PlotSeries> by_mode;
  for (const RateReport& r : reports) {
    PlotSeries& s = by_mode[r.mode];
    s.label = r.mode;
    s.points.push_back({r.bpp, pick(r)});
  }
  std::vector<PlotSeries> series;
  for (auto& [_, s] : by_mode) series.push_back(std::move(s));
  return ScatterPlotSvg(series, "bits per pixel", metric,
                        "rate vs " + metric);
}

void WriteBenchmarkOutputs(const BenchmarkResult& result,
                           const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create output directory " + out_dir);
  }
  auto write = [&](const std::string& name, const std::string& content) {
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    f.write(content.data(),
            static_cast<std::streamsize>(content.size()));
    if (!f) {
      throw Error(ErrorCode::kIo, "cannot write " + path.string());
    }
  };
  write("rate_quality.csv", RateReportCsv(result.reports));
  write("summary.json", SummaryJson(result));
  for (const char* metric : {"d_clip", "ms_ssim", "psnr"}) {
    write(std::string("plot_") + metric + ".svg",
          RatePlotSvg(result.reports, metric));
  }
}

}  // namespace txsk
