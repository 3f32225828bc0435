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
// txsk: compress images into prompt(+sketch) containers, reconstruct
// them through a generative backend, train the sketch codec, and run
// dataset evaluations.
//
// Exit codes: 0 success, 2 configuration or usage, 3 file IO,
// 4 malformed or corrupted data, 5 backend failure, 6 dataset problem,
// 1 anything else.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "txsk/container.h"
#include "txsk/error.h"
#include "txsk/harness.h"
#include "txsk/image_io.h"
#include "txsk/ntc.h"
#include "txsk/numeric.h"
#include "txsk/pipeline.h"
#include "txsk/sketch.h"
#include "txsk/toy_embedder.h"

namespace {

namespace fs = std::filesystem;
using txsk::Error;
using txsk::ErrorCode;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kArgument:
      return 2;
    case ErrorCode::kIo:
      return 3;
    case ErrorCode::kFormat:
    case ErrorCode::kCorruption:
    case ErrorCode::kTruncation:
    case ErrorCode::kVersion:
    case ErrorCode::kDecode:
      return 4;
    case ErrorCode::kBackend:
    case ErrorCode::kTimeout:
    case ErrorCode::kCapability:
      return 5;
    case ErrorCode::kData:
      return 6;
    default:
      return 1;
  }
}

std::vector<fs::path> ListPngs(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "not a directory: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

txsk::Mode ParseMode(const std::string& name) {
  if (name == "pic") return txsk::Mode::kPic;
  if (name == "pics") return txsk::Mode::kPics;
  throw Error(ErrorCode::kConfig, "unknown mode: " + name);
}

// Options shared by every command that runs the embedding stage.
struct EmbedderOptions {
  uint64_t seed = 7;
  int vocab_size = 8192;
  int embed_dim = 32;

  txsk::ToyEmbedder Build() const {
    txsk::ToyEmbedderConfig cfg;
    cfg.vocab_size = vocab_size;
    cfg.embed_dim = embed_dim;
    cfg.seed = seed;
    return txsk::ToyEmbedder(cfg);
  }
};

void AddEmbedderOptions(CLI::App* cmd, EmbedderOptions* opts) {
  cmd->add_option("--embedder-seed", opts->seed,
                  "Seed of the built-in embedder");
  cmd->add_option("--vocab-size", opts->vocab_size, "Token vocabulary size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--embed-dim", opts->embed_dim, "Embedding dimension")
      ->check(CLI::PositiveNumber);
}

struct BackendOptions {
  std::string name = "mock";
  std::string endpoint;
};

void AddBackendOptions(CLI::App* cmd, BackendOptions* opts) {
  cmd->add_option("--backend", opts->name, "Reconstruction backend")
      ->check(CLI::IsMember({"mock", "remote"}));
  cmd->add_option("--endpoint", opts->endpoint,
                  "Remote backend URL (default: TXSK_BACKEND_ENDPOINT)");
}

std::unique_ptr<txsk::Backend> MakeBackend(const BackendOptions& opts) {
  if (opts.name == "mock") return std::make_unique<txsk::MockBackend>();
  std::string endpoint = opts.endpoint.empty()
                             ? txsk::RemoteBackend::EndpointFromEnv()
                             : opts.endpoint;
  return std::make_unique<txsk::RemoteBackend>(endpoint,
                                               /*accepts_sketch=*/true);
}

void AddInversionOptions(CLI::App* cmd, txsk::PiConfig* pi) {
  cmd->add_option("--tokens", pi->prompt_length, "Prompt length in tokens")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--pi-steps", pi->step_count,
                  "Optimization steps per restart")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--pi-restarts", pi->restart_count, "Restart count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--pi-lr", pi->learning_rate, "Optimizer step size");
}

// Runs fn(i) for every index with a bounded worker pool. Item failures
// are collected, not thrown, so one bad image never kills a batch.
std::vector<std::string> ParallelFor(
    size_t count, int jobs, const std::function<void(size_t)>& fn) {
  std::vector<std::string> failures(count);
  auto run_one = [&](size_t i) {
    try {
      fn(i);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  };
  if (jobs <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) run_one(i);
    return failures;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min<size_t>(jobs, count);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        run_one(i);
      }
    });
  }
  for (auto& t : pool) t.join();
  return failures;
}

int DefaultJobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// ---------------------------------------------------------------------------
// compress

struct CompressArgs {
  std::string input;
  std::string out;
  std::string mode = "pic";
  std::string token_coding = "fixed";
  std::string sketch_model_path;
  uint64_t seed = 0;
  txsk::PiConfig inversion;
  EmbedderOptions embedder;
  int jobs = DefaultJobs();
};

int CmdCompress(const CompressArgs& args) {
  txsk::CompressOptions opts;
  opts.mode = ParseMode(args.mode);
  opts.token_coding = args.token_coding == "text"
                          ? txsk::TokenCoding::kTextLossless
                          : txsk::TokenCoding::kFixedWidth;
  opts.inversion = args.inversion;
  opts.inversion.random_seed = args.seed;

  std::unique_ptr<txsk::NtcModel> model;
  if (opts.mode == txsk::Mode::kPics) {
    if (args.sketch_model_path.empty()) {
      throw Error(ErrorCode::kConfig,
                  "sketch mode needs --sketch-model <file>");
    }
    model = std::make_unique<txsk::NtcModel>(
        txsk::LoadNtcModel(args.sketch_model_path));
  }

  const txsk::ToyEmbedder embedder = args.embedder.Build();
  const txsk::ToyTokenizer tokenizer(
      static_cast<uint32_t>(args.embedder.vocab_size));

  const bool batch = fs::is_directory(args.input);
  std::vector<fs::path> inputs;
  fs::path out_dir;
  if (batch) {
    inputs = ListPngs(args.input);
    if (inputs.empty()) {
      throw Error(ErrorCode::kData, "no .png files in " + args.input);
    }
    if (args.out.empty()) {
      throw Error(ErrorCode::kConfig,
                  "batch compression needs --out <directory>");
    }
    out_dir = args.out;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
      throw Error(ErrorCode::kIo, "cannot create " + out_dir.string());
    }
  } else {
    inputs.push_back(args.input);
  }

  struct Row {
    std::string id;
    txsk::CompressResult result;
  };
  std::vector<Row> rows(inputs.size());
  auto compress_one = [&](size_t i) {
    const fs::path& in = inputs[i];
    txsk::Image image = txsk::ReadImageFile(in.string());
    txsk::CompressResult result = txsk::CompressImage(
        image, embedder, tokenizer, opts, model.get(), nullptr);
    fs::path out =
        batch ? out_dir / in.stem().concat(".tsk")
              : (args.out.empty()
                     ? fs::path(args.input).replace_extension(".tsk")
                     : fs::path(args.out));
    txsk::WriteFileBytes(out.string(), result.bytes);
    rows[i] = {in.stem().string(), std::move(result)};
    std::cout << in.string() << " -> " << out.string() << "  "
              << rows[i].result.total_bits << " bits  " << rows[i].result.bpp
              << " bpp  (tokens " << rows[i].result.token_bits << ", sketch "
              << rows[i].result.sketch_bits << ", header "
              << rows[i].result.header_bits << ")\n";
  };
  if (!batch) {
    // Single-image errors propagate so the exit code keeps its category.
    compress_one(0);
    return 0;
  }

  auto failures = ParallelFor(inputs.size(), args.jobs, compress_one);
  int failed = 0;
  int exit_code = 0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (failures[i].empty()) continue;
    ++failed;
    if (exit_code == 0) exit_code = 1;
    std::cerr << "failed: " << inputs[i].string() << ": " << failures[i]
              << "\n";
  }

  std::string csv =
      "image_id,mode,total_bits,bpp,token_bits,sketch_bits,header_bits\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!failures[i].empty()) continue;
    const Row& row = rows[i];
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", row.result.bpp);
    csv += row.id + "," + args.mode + "," +
           std::to_string(row.result.total_bits) + "," + buf + "," +
           std::to_string(row.result.token_bits) + "," +
           std::to_string(row.result.sketch_bits) + "," +
           std::to_string(row.result.header_bits) + "\n";
  }
  const fs::path csv_path = out_dir / "summary.csv";
  std::ofstream f(csv_path, std::ios::binary);
  f << csv;
  if (!f) {
    throw Error(ErrorCode::kIo, "cannot write " + csv_path.string());
  }
  std::cout << "wrote " << csv_path.string() << " (" << rows.size() - failed
            << " ok, " << failed << " failed)\n";
  return exit_code;
}

// ---------------------------------------------------------------------------
// decompress

struct DecompressArgs {
  std::string input;
  std::string out;
  std::string sketch_model_path;
  std::string sketch_out;
  BackendOptions backend;
  uint64_t seed = 0;
  int prompt_length = 16;
  int vocab_size = 8192;
  txsk::GenParams generation;
};

int CmdDecompress(const DecompressArgs& args) {
  const std::vector<uint8_t> bytes = txsk::ReadFileBytes(args.input);
  const txsk::Container container = txsk::ReadContainer(bytes);

  std::unique_ptr<txsk::NtcModel> model;
  if (container.mode == txsk::Mode::kPics) {
    if (args.sketch_model_path.empty()) {
      throw Error(ErrorCode::kConfig,
                  "this container has a sketch stream; pass --sketch-model");
    }
    model = std::make_unique<txsk::NtcModel>(
        txsk::LoadNtcModel(args.sketch_model_path));
  }

  std::unique_ptr<txsk::Backend> backend = MakeBackend(args.backend);
  const txsk::ToyTokenizer tokenizer(static_cast<uint32_t>(args.vocab_size));
  txsk::DecompressOptions opts;
  opts.seed = args.seed;
  opts.prompt_length = args.prompt_length;
  opts.generation = args.generation;

  txsk::DecompressResult result = txsk::DecompressContainer(
      container, tokenizer, *backend, model.get(),
      static_cast<uint32_t>(args.vocab_size), opts);

  const uint64_t total_bits = static_cast<uint64_t>(bytes.size()) * 8;
  const double bpp =
      txsk::ComputeBpp(total_bits, container.width, container.height);
  std::cout << "prompt: " << result.prompt_text << "\n";
  std::cout << "mode: " << txsk::ModeName(container.mode) << "  "
            << container.width << "x" << container.height << "\n";
  std::cout << "rate: " << total_bits << " bits  " << bpp << " bpp  (tokens "
            << result.token_bits << ", sketch " << result.sketch_bits
            << ", header "
            << total_bits - result.token_bits - result.sketch_bits << ")\n";

  const fs::path out = args.out.empty()
                           ? fs::path(args.input).replace_extension(".png")
                           : fs::path(args.out);
  txsk::WriteImageFile(out.string(), result.image);
  std::cout << "wrote " << out.string() << "\n";
  if (!args.sketch_out.empty()) {
    if (container.mode != txsk::Mode::kPics) {
      throw Error(ErrorCode::kConfig,
                  "--sketch-out is only valid for sketch containers");
    }
    txsk::WriteSketchFile(args.sketch_out, result.sketch);
    std::cout << "wrote " << args.sketch_out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train-sketch-codec

struct TrainArgs {
  std::string dataset_dir;
  std::string out = "sketch_codec.tnm";
  std::string log_path;
  bool extract = false;
  txsk::NtcTrainConfig config;
};

int CmdTrainSketch(const TrainArgs& args) {
  std::vector<fs::path> files = ListPngs(args.dataset_dir);
  if (files.empty()) {
    throw Error(ErrorCode::kData, "no .png files in " + args.dataset_dir);
  }
  std::vector<txsk::SketchMap> dataset;
  dataset.reserve(files.size());
  const txsk::EdgeDetector detector = txsk::EdgeDetector::FallbackGradient();
  for (const fs::path& f : files) {
    if (args.extract) {
      dataset.push_back(
          txsk::ExtractSketch(txsk::ReadImageFile(f.string()), detector));
    } else {
      dataset.push_back(txsk::ReadSketchFile(f.string()));
    }
  }
  if (args.config.lambda_grid.size() == 1) {
    std::cerr << "warning: single-point lambda grid, returning that model "
                 "regardless of the rate target\n";
  }

  txsk::NtcTrainReport report;
  txsk::NtcModel model = txsk::TrainNtc(args.config, dataset, &report);

  std::cout << "lambda      val_bpp   val_quality  selected\n";
  for (size_t i = 0; i < report.grid.size(); ++i) {
    const txsk::LambdaPoint& p = report.grid[i];
    char line[128];
    std::snprintf(line, sizeof(line), "%-10g  %-8.5f  %-11.5f  %s\n",
                  p.lambda, p.validation_bpp, p.validation_quality,
                  static_cast<int>(i) == report.selected_index ? "*" : "");
    std::cout << line;
  }

  txsk::SaveNtcModel(model, args.out);
  std::cout << "wrote " << args.out << "\n";

  const std::string log_path =
      args.log_path.empty() ? args.out + ".train.json" : args.log_path;
  std::string log = "{\n  \"grid\": [\n";
  for (size_t i = 0; i < report.grid.size(); ++i) {
    const txsk::LambdaPoint& p = report.grid[i];
    char line[256];
    std::snprintf(line, sizeof(line),
                  "    {\"lambda\": %g, \"validation_bpp\": %.8f, "
                  "\"validation_quality\": %.8f}%s\n",
                  p.lambda, p.validation_bpp, p.validation_quality,
                  i + 1 < report.grid.size() ? "," : "");
    log += line;
  }
  log += "  ],\n  \"selected_index\": " +
         std::to_string(report.selected_index) + "\n}\n";
  std::ofstream f(log_path, std::ios::binary);
  f << log;
  if (!f) {
    throw Error(ErrorCode::kIo, "cannot write " + log_path);
  }
  std::cout << "wrote " << log_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string originals_dir;
  std::string reconstructions_dir;
  bool end_to_end = false;
  std::string out = "eval_out";
  std::vector<std::string> metrics = {"d_clip", "ms_ssim", "psnr"};
  std::vector<std::string> modes = {"pic", "pics"};
  std::string token_coding = "fixed";
  std::string sketch_model_path;
  uint64_t seed = 0;
  int feature_dim = 64;
  txsk::PiConfig inversion;
  EmbedderOptions embedder;
  BackendOptions backend;
  txsk::GenParams generation;
};

// Feature projection seed is fixed so summaries stay comparable across
// runs and machines.
constexpr uint64_t kFeatureSeed = 17;

std::vector<txsk::PairItem> LoadPairs(const EvalArgs& args) {
  auto originals = ListPngs(args.originals_dir);
  auto recons = ListPngs(args.reconstructions_dir);
  auto stems = [](const std::vector<fs::path>& files) {
    std::vector<std::string> out;
    for (const auto& f : files) out.push_back(f.stem().string());
    return out;
  };
  const auto so = stems(originals);
  const auto sr = stems(recons);
  std::vector<std::string> missing_r, missing_o;
  for (const auto& s : so) {
    if (std::find(sr.begin(), sr.end(), s) == sr.end()) {
      missing_r.push_back(s);
    }
  }
  for (const auto& s : sr) {
    if (std::find(so.begin(), so.end(), s) == so.end()) {
      missing_o.push_back(s);
    }
  }
  if (!missing_r.empty() || !missing_o.empty()) {
    std::string msg = "image sets differ;";
    auto list = [](const std::vector<std::string>& ids) {
      std::string out;
      for (size_t i = 0; i < ids.size() && i < 8; ++i) {
        out += (i ? ", " : " ") + ids[i];
      }
      if (ids.size() > 8) out += ", ...";
      return out;
    };
    if (!missing_r.empty()) {
      msg += " missing reconstructions:" + list(missing_r);
    }
    if (!missing_o.empty()) {
      msg += " missing originals:" + list(missing_o);
    }
    throw Error(ErrorCode::kData, msg);
  }
  std::vector<txsk::PairItem> pairs;
  for (const auto& f : originals) {
    txsk::PairItem item;
    item.id = f.stem().string();
    item.original = txsk::ReadImageFile(f.string());
    item.reconstruction = txsk::ReadImageFile(
        (fs::path(args.reconstructions_dir) / f.filename()).string());
    pairs.push_back(std::move(item));
  }
  return pairs;
}

int CmdEval(const EvalArgs& args) {
  if (!args.end_to_end && args.reconstructions_dir.empty()) {
    throw Error(ErrorCode::kConfig,
                "pass --reconstructions <dir> or --end-to-end");
  }
  if (args.end_to_end && !args.reconstructions_dir.empty()) {
    throw Error(ErrorCode::kConfig,
                "--reconstructions and --end-to-end are exclusive");
  }

  const txsk::ToyEmbedder embedder = args.embedder.Build();
  const txsk::RandomProjectionExtractor extractor(args.feature_dim,
                                                  kFeatureSeed);
  txsk::BenchmarkResult result;
  if (args.end_to_end) {
    std::vector<fs::path> files = ListPngs(args.originals_dir);
    if (files.empty()) {
      throw Error(ErrorCode::kData, "no .png files in " + args.originals_dir);
    }
    std::vector<txsk::BenchmarkItem> items;
    for (const fs::path& f : files) {
      items.push_back({f.stem().string(), txsk::ReadImageFile(f.string())});
    }
    txsk::BenchmarkConfig config;
    config.modes.clear();
    for (const std::string& m : args.modes) {
      config.modes.push_back(ParseMode(m));
    }
    config.token_coding = args.token_coding == "text"
                              ? txsk::TokenCoding::kTextLossless
                              : txsk::TokenCoding::kFixedWidth;
    config.inversion = args.inversion;
    config.inversion.random_seed = args.seed;
    config.generation_seed = args.seed;
    config.generation = args.generation;

    std::unique_ptr<txsk::NtcModel> model;
    const bool wants_sketch =
        std::find(config.modes.begin(), config.modes.end(),
                  txsk::Mode::kPics) != config.modes.end();
    if (wants_sketch) {
      if (args.sketch_model_path.empty()) {
        throw Error(ErrorCode::kConfig,
                    "evaluating sketch mode needs --sketch-model");
      }
      model = std::make_unique<txsk::NtcModel>(
          txsk::LoadNtcModel(args.sketch_model_path));
    }
    std::unique_ptr<txsk::Backend> backend = MakeBackend(args.backend);
    const txsk::ToyTokenizer tokenizer(
        static_cast<uint32_t>(args.embedder.vocab_size));
    result = txsk::RunBenchmark(items, embedder, tokenizer, *backend,
                                model.get(), nullptr, extractor, config);
  } else {
    result = txsk::EvalPairs(LoadPairs(args), embedder, extractor);
  }

  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create " + args.out);
  }
  auto write = [&](const std::string& name, const std::string& content) {
    const fs::path path = fs::path(args.out) / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    std::cout << "wrote " << path.string() << "\n";
  };
  write("rate_quality.csv", txsk::RateReportCsv(result.reports));
  write("summary.json", txsk::SummaryJson(result));
  for (const std::string& metric : args.metrics) {
    write("plot_" + metric + ".svg",
          txsk::RatePlotSvg(result.reports, metric));
  }

  std::cout << result.reports.size() << " rows, " << result.failures.size()
            << " failures\n";
  for (const txsk::ModeSummary& s : result.summaries) {
    std::cout << s.mode << ": n=" << s.sample_count << " fid=" << s.fid
              << " kid=" << s.kid << " mean_d_clip=" << s.mean_d_clip
              << " mean_bpp=" << s.mean_bpp << "\n";
  }
  for (const txsk::BenchmarkFailure& f : result.failures) {
    std::cerr << "failed: " << f.image_id << " (" << f.mode
              << "): " << f.message << "\n";
  }
  return result.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Prompt-inversion image compression: 16-token prompts plus an "
      "optional learned sketch stream.\n"
      "Exit codes: 0 ok, 2 config, 3 io, 4 bad data, 5 backend, "
      "6 dataset, 1 other."};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI file");

  CompressArgs cargs;
  CLI::App* compress =
      app.add_subcommand("compress", "Encode an image (or directory) to .tsk");
  compress->add_option("input", cargs.input, "Image file or directory")
      ->required();
  compress->add_option("--out,-o", cargs.out, "Output file or directory");
  compress->add_option("--mode", cargs.mode, "pic (prompt only) or pics")
      ->check(CLI::IsMember({"pic", "pics"}));
  compress
      ->add_option("--token-coding", cargs.token_coding,
                   "Token payload coding")
      ->check(CLI::IsMember({"fixed", "text"}));
  compress->add_option("--sketch-model", cargs.sketch_model_path,
                       "Trained sketch codec (.tnm), required for pics");
  compress->add_option("--seed", cargs.seed, "Inversion seed");
  compress->add_option("--jobs", cargs.jobs, "Worker threads for batches")
      ->check(CLI::PositiveNumber);
  AddInversionOptions(compress, &cargs.inversion);
  AddEmbedderOptions(compress, &cargs.embedder);

  DecompressArgs dargs;
  CLI::App* decompress =
      app.add_subcommand("decompress", "Reconstruct an image from a .tsk");
  decompress->add_option("input", dargs.input, "Container file")->required();
  decompress->add_option("--out,-o", dargs.out, "Output image (.png)");
  decompress->add_option("--sketch-model", dargs.sketch_model_path,
                         "Sketch codec used at encode time");
  decompress->add_option("--sketch-out", dargs.sketch_out,
                         "Also write the decoded sketch to this .png");
  decompress->add_option("--seed", dargs.seed, "Generation seed");
  decompress
      ->add_option("--tokens", dargs.prompt_length, "Prompt length in tokens")
      ->check(CLI::PositiveNumber);
  decompress
      ->add_option("--vocab-size", dargs.vocab_size, "Token vocabulary size")
      ->check(CLI::PositiveNumber);
  decompress->add_option("--gen-steps", dargs.generation.steps,
                         "Backend sampling steps");
  decompress->add_option("--guidance", dargs.generation.guidance,
                         "Backend guidance scale");
  AddBackendOptions(decompress, &dargs.backend);

  TrainArgs targs;
  CLI::App* train = app.add_subcommand(
      "train-sketch-codec", "Train the sketch codec on a directory of maps");
  train->add_option("dataset", targs.dataset_dir, "Directory of .png inputs")
      ->required();
  train->add_option("--out,-o", targs.out, "Output model path");
  train->add_option("--log", targs.log_path,
                    "Per-lambda table (default <out>.train.json)");
  train->add_flag("--extract", targs.extract,
                  "Inputs are RGB images; extract edge maps first");
  train
      ->add_option("--lambda-grid", targs.config.lambda_grid,
                   "Distortion weights to sweep")
      ->delimiter(',');
  train->add_option("--epochs", targs.config.epochs, "Training epochs")
      ->check(CLI::PositiveNumber);
  train->add_option("--batch-size", targs.config.batch_size, "Crop batch size")
      ->check(CLI::PositiveNumber);
  train->add_option("--crop-size", targs.config.crop_size, "Training crop")
      ->check(CLI::PositiveNumber);
  train->add_option("--learning-rate", targs.config.learning_rate,
                    "Optimizer step size");
  train
      ->add_option("--hidden-channels", targs.config.hidden_channels,
                   "Width of the transform networks")
      ->check(CLI::PositiveNumber);
  train->add_option("--target-bpp", targs.config.target_bpp,
                    "Rate target used to pick the final model");
  train->add_option("--seed", targs.config.seed, "Training seed");
  train
      ->add_option("--validation-count", targs.config.validation_count,
                   "Maps held out for validation")
      ->check(CLI::PositiveNumber);

  EvalArgs eargs;
  CLI::App* eval =
      app.add_subcommand("eval", "Metrics over a dataset, with plots");
  eval->add_option("--originals", eargs.originals_dir, "Reference images")
      ->required();
  eval->add_option("--reconstructions", eargs.reconstructions_dir,
                   "Precomputed reconstructions to score");
  eval->add_flag("--end-to-end", eargs.end_to_end,
                 "Compress and reconstruct the originals");
  eval->add_option("--out,-o", eargs.out, "Output directory");
  eval->add_option("--metrics", eargs.metrics, "Plots to emit")
      ->delimiter(',')
      ->check(CLI::IsMember({"d_clip", "ms_ssim", "psnr"}));
  eval->add_option("--modes", eargs.modes, "Modes for end-to-end runs")
      ->delimiter(',')
      ->check(CLI::IsMember({"pic", "pics"}));
  eval
      ->add_option("--token-coding", eargs.token_coding,
                   "Token payload coding")
      ->check(CLI::IsMember({"fixed", "text"}));
  eval->add_option("--sketch-model", eargs.sketch_model_path,
                   "Sketch codec for pics mode");
  eval->add_option("--seed", eargs.seed, "Inversion and generation seed");
  eval->add_option("--feature-dim", eargs.feature_dim,
                   "Random-projection feature size for fid/kid")
      ->check(CLI::PositiveNumber);
  eval->add_option("--gen-steps", eargs.generation.steps,
                   "Backend sampling steps");
  eval->add_option("--guidance", eargs.generation.guidance,
                   "Backend guidance scale");
  AddInversionOptions(eval, &eargs.inversion);
  AddEmbedderOptions(eval, &eargs.embedder);
  AddBackendOptions(eval, &eargs.backend);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*compress) return CmdCompress(cargs);
    if (*decompress) return CmdDecompress(dargs);
    if (*train) return CmdTrainSketch(targs);
    if (*eval) return CmdEval(eargs);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
