#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ladder/ensemble.hpp"
#include "ladder/eval.hpp"
#include "ladder/features.hpp"
#include "ladder/io.hpp"
#include "ladder/learners.hpp"
#include "ladder/rq_core.hpp"
#include "ladder/video.hpp"

namespace fs = std::filesystem;
using namespace ladder;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitBackend = 3;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::encoder_failure:
    case Errc::cache_corruption:
      return kExitBackend;
    default:
      return kExitInput;
  }
}

// --config is resolved before the full parse so file values become the
// defaults that explicit flags then override.
AppConfig preload_config(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      return load_config_file(argv[i + 1]);
    }
  }
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    const std::string prefix = "--config=";
    if (arg.rfind(prefix, 0) == 0) {
      return load_config_file(arg.substr(prefix.size()));
    }
  }
  return AppConfig{};
}

void add_grid_flags(CLI::App* cmd, AppConfig& config) {
  cmd->add_option("--min-bps", config.min_bps, "Grid minimum bitrate (bits/sec)");
  cmd->add_option("--max-bps", config.max_bps, "Grid maximum bitrate (bits/sec)");
  cmd->add_option("--grid-points", config.grid_points, "Grid point count");
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const std::string& input : inputs) {
    if (fs::is_directory(input)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(input)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".y4m" || ext == ".yuv") found.push_back(entry.path().string());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(input);
    }
  }
  return files;
}

struct RawGeometry {
  int width = 0;
  int height = 0;
  double fps = 0.0;
};

VideoChunk load_video(const std::string& path, const RawGeometry& raw) {
  const std::string ext = fs::path(path).extension().string();
  if (ext == ".y4m") return read_y4m_file(path);
  if (ext != ".yuv") throw Error(Errc::unsupported_format, path + ": unknown extension");

  RawGeometry geometry = raw;
  const std::string sidecar = path + ".json";
  if (geometry.width == 0 && fs::exists(sidecar)) {
    const nlohmann::json j = nlohmann::json::parse(read_text_file(sidecar));
    geometry.width = j.at("width").get<int>();
    geometry.height = j.at("height").get<int>();
    geometry.fps = j.value("fps", 0.0);
  }
  if (geometry.width <= 0 || geometry.height <= 0) {
    throw Error(Errc::bad_params,
                path + ": raw yuv needs --width/--height or a sidecar json");
  }
  return read_raw_yuv_file(path, geometry.width, geometry.height, geometry.fps);
}

// Fixed-length windows, optionally re-anchored at detected scene cuts.
std::vector<std::pair<std::string, VideoChunk>> split_chunks(
    const std::string& stem, const VideoChunk& video, int chunk_frames,
    bool scene_split) {
  std::vector<int> starts = {0};
  if (scene_split && video.frame_count() >= 2) {
    for (int cut : detect_scene_change(video)) starts.push_back(cut);
  }
  starts.push_back(video.frame_count());
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

  std::vector<std::pair<std::string, VideoChunk>> chunks;
  for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
    for (int at = starts[s]; at < starts[s + 1]; at += chunk_frames) {
      const int end = std::min(at + chunk_frames, starts[s + 1]);
      if (end - at < 2) continue;  // features need two frames
      VideoChunk chunk;
      chunk.width = video.width;
      chunk.height = video.height;
      chunk.fps = video.fps;
      chunk.frames.assign(video.frames.begin() + at, video.frames.begin() + end);
      chunks.emplace_back(stem, std::move(chunk));
    }
  }
  if (chunks.size() > 1) {
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      chunks[i].first = stem + "_ck" + std::to_string(i);
    }
  }
  return chunks;
}

int cmd_extract_features(const std::vector<std::string>& inputs,
                         const std::string& output, const RawGeometry& raw,
                         const AppConfig& config, bool keep_going, bool scene_split) {
  const std::vector<std::string> files = expand_inputs(inputs);
  if (files.empty()) {
    std::cerr << "error: no input files\n";
    return kExitInput;
  }

  std::vector<FeatureRow> rows;
  bool any_failed = false;
  for (const std::string& file : files) {
    try {
      const VideoChunk video = load_video(file, raw);
      const std::string stem = fs::path(file).stem().string();
      for (const auto& [chunk_id, chunk] :
           split_chunks(stem, video, config.chunk_frames, scene_split)) {
        rows.push_back(FeatureRow{chunk_id, chunk_features(chunk, config.glcm)});
      }
    } catch (const Error& e) {
      std::cerr << file << ": " << e.what() << "\n";
      any_failed = true;
      if (!keep_going) return kExitInput;
    }
  }

  if (output.empty()) {
    write_feature_csv(std::cout, rows);
  } else {
    std::ofstream out(output);
    if (!out) throw Error(Errc::io_failure, "cannot open " + output);
    write_feature_csv(out, rows);
  }
  return any_failed ? kExitInput : kExitOk;
}

int cmd_build_gt(const std::string& rq_path, const std::string& out_dir,
                 const AppConfig& config) {
  const std::vector<RqRow> rows = read_rq_csv_file(rq_path);
  const auto surfaces = surfaces_from_rows(rows, config.resolutions);
  fs::create_directories(out_dir);
  const BitrateGrid grid = config.grid();
  for (const auto& [chunk_id, surface] : surfaces) {
    const BitrateLadder ladder = cross_over_bitrates(surface, grid);
    write_ladder_file((fs::path(out_dir) / (chunk_id + ".ladder.json")).string(),
                      ladder);
  }
  std::cout << "wrote " << surfaces.size() << " ladder file(s) to " << out_dir
            << "\n";
  return kExitOk;
}

std::vector<TrainingSample> load_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(Errc::io_failure, "cannot open " + manifest_path);

  std::map<std::string, std::vector<FeatureRow>> feature_cache;
  std::vector<TrainingSample> samples;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && line.rfind("chunk_id", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    std::istringstream ss(line);
    std::string chunk_id, features_csv, ladder_json;
    if (!std::getline(ss, chunk_id, ',') || !std::getline(ss, features_csv, ',') ||
        !std::getline(ss, ladder_json)) {
      throw Error(Errc::bad_params,
                  "manifest rows need chunk_id,features_csv,ladder_json");
    }
    if (!feature_cache.count(features_csv)) {
      feature_cache[features_csv] = read_feature_csv_file(features_csv);
    }
    const auto& rows = feature_cache[features_csv];
    const auto it = std::find_if(rows.begin(), rows.end(), [&](const FeatureRow& r) {
      return r.chunk_id == chunk_id;
    });
    if (it == rows.end()) {
      throw Error(Errc::bad_params, chunk_id + " not found in " + features_csv);
    }
    samples.push_back(TrainingSample{chunk_id, it->features,
                                     read_ladder_file(ladder_json)});
  }
  return samples;
}

int cmd_train(const std::string& manifest, const std::string& out_dir,
              const AppConfig& config, int rfe_k) {
  const std::vector<TrainingSample> samples = load_manifest(manifest);
  const BitrateGrid grid = config.grid();
  const int target_k = rfe_k > 0 ? rfe_k : FeatureVector::kCount;

  const RfeConfig rfe{grid, config.gbt, config.gp, config.seed};
  const std::vector<bool> mask_cl =
      rfe_select(samples, LearnerKind::classifier, target_k, rfe);
  const std::vector<bool> mask_rg =
      rfe_select(samples, LearnerKind::regressor, target_k, rfe);

  const ClassifierModel classifier =
      train_classifier(samples, grid, config.gbt, mask_cl);
  const RegressorModel regressor = train_regressor(samples, grid, config.gp, mask_rg);

  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / "classifier.json").string(),
                  classifier_to_json(classifier));
  write_text_file((fs::path(out_dir) / "regressor.json").string(),
                  regressor_to_json(regressor));

  const auto mask_names = [](const std::vector<bool>& mask) {
    std::string names;
    for (std::size_t f = 0; f < mask.size(); ++f) {
      if (!mask[f]) continue;
      if (!names.empty()) names += "+";
      names += FeatureVector::names()[f];
    }
    return names;
  };
  std::cout << "trained on " << samples.size() << " chunks\n"
            << "classifier features: " << mask_names(mask_cl) << "\n"
            << "regressor features:  " << mask_names(mask_rg) << "\n";
  return kExitOk;
}

int cmd_predict(const std::string& classifier_path, const std::string& regressor_path,
                const std::string& features_path, const std::string& out_dir) {
  const ClassifierModel classifier =
      classifier_from_json(read_text_file(classifier_path));
  const RegressorModel regressor = regressor_from_json(read_text_file(regressor_path));
  const std::vector<FeatureRow> rows = read_feature_csv_file(features_path);
  fs::create_directories(out_dir);
  for (const FeatureRow& row : rows) {
    const BitrateLadder cl =
        classifier_ladder(classifier, row.features, classifier.grid);
    const BitrateLadder rg = regressor_ladder(regressor, row.features);
    write_ladder_file((fs::path(out_dir) / (row.chunk_id + ".cl.json")).string(), cl);
    write_ladder_file((fs::path(out_dir) / (row.chunk_id + ".rg.json")).string(), rg);
  }
  std::cout << "wrote " << rows.size() << " ladder pair(s) to " << out_dir << "\n";
  return kExitOk;
}

struct AggregateOptions {
  std::string cl_path;
  std::string rg_path;
  std::string table_csv;
  std::string table_chunk_id;
  std::string synthetic_params_path;
  std::string encoder_template;
  std::string input_video;
  bool fast = false;
  std::string out_path;
  std::string report_path;
};

std::unique_ptr<EncoderBackend> make_backend(const AggregateOptions& opts,
                                             const AppConfig& config,
                                             const ResolutionSet& resolutions) {
  if (!opts.table_csv.empty()) {
    const auto surfaces =
        surfaces_from_rows(read_rq_csv_file(opts.table_csv), resolutions);
    if (surfaces.empty()) throw Error(Errc::bad_params, "rq csv holds no chunks");
    if (!opts.table_chunk_id.empty()) {
      const auto it = surfaces.find(opts.table_chunk_id);
      if (it == surfaces.end()) {
        throw Error(Errc::bad_params, "chunk " + opts.table_chunk_id + " not in csv");
      }
      return make_table_backend(it->second);
    }
    if (surfaces.size() > 1) {
      throw Error(Errc::bad_params, "rq csv holds several chunks; pass --chunk-id");
    }
    return make_table_backend(surfaces.begin()->second);
  }
  if (!opts.synthetic_params_path.empty()) {
    return make_synthetic_backend(
        resolutions,
        synthetic_params_from_json(read_text_file(opts.synthetic_params_path)));
  }
  const std::string tpl = !opts.encoder_template.empty() ? opts.encoder_template
                                                         : config.encoder_template;
  if (!tpl.empty()) {
    if (opts.input_video.empty()) {
      throw Error(Errc::bad_params, "external backend needs --input");
    }
    ExternalBackendConfig ext;
    ext.command_template = tpl;
    ext.workdir = config.workdir.empty() ? "." : config.workdir;
    ext.cache_dir = config.cache_dir;
    ext.min_log2_rate = -1024.0;
    ext.max_log2_rate = 1024.0;
    return make_external_backend(resolutions, ext,
                                 load_video(opts.input_video, RawGeometry{}));
  }
  throw Error(Errc::bad_params,
              "no backend configured: pass --table, --synthetic-params or "
              "--encoder-template");
}

int cmd_aggregate(const AggregateOptions& opts, const AppConfig& config) {
  const BitrateLadder cl = read_ladder_file(opts.cl_path);
  const BitrateLadder rg = read_ladder_file(opts.rg_path);
  auto backend = make_backend(opts, config, cl.resolutions);

  const AggregatorConfig agg{opts.fast, config.grid()};
  const AggregationReport report = aggregate(cl, rg, *backend, agg);

  const std::string ladder_json = ladder_to_json(report.final_ladder);
  if (opts.out_path.empty()) {
    std::cout << ladder_json;
  } else {
    write_text_file(opts.out_path, ladder_json);
  }
  if (!opts.report_path.empty()) {
    write_text_file(opts.report_path, aggregation_report_to_json(report));
  }
  return kExitOk;
}

int cmd_bdbr(const std::string& ref_csv, const std::string& test_csv) {
  const std::vector<RQPoint> ref = rq_points_from_rows(read_rq_csv_file(ref_csv));
  const std::vector<RQPoint> test = rq_points_from_rows(read_rq_csv_file(test_csv));
  const BdBrResult result = bd_br(ref, test);
  std::printf("%.2f\n", result.percent);
  return kExitOk;
}

struct CrossvalOptions {
  bool synthetic = false;
  int sequences = 100;
  double noise = 1.0;
  std::string dataset_dir;
  int folds = 10;
  std::string out_dir = ".";
};

int cmd_crossval(const CrossvalOptions& opts, const AppConfig& config,
                 bool explicit_grid) {
  std::vector<SyntheticSequence> dataset;
  BitrateGrid grid = config.grid();
  if (opts.synthetic) {
    SyntheticDatasetSpec spec = default_synthetic_spec();
    spec.sequence_count = opts.sequences;
    spec.noise_level = opts.noise;
    spec.seed = config.seed;
    if (explicit_grid) spec.grid = grid;
    grid = spec.grid;
    dataset = generate_synthetic_dataset(spec);
  } else {
    if (opts.dataset_dir.empty()) {
      throw Error(Errc::bad_params, "pass --synthetic or --dataset <dir>");
    }
    const auto features = read_feature_csv_file(
        (fs::path(opts.dataset_dir) / "features.csv").string());
    const auto surfaces = surfaces_from_rows(
        read_rq_csv_file((fs::path(opts.dataset_dir) / "rq.csv").string()),
        config.resolutions);
    for (const FeatureRow& row : features) {
      const auto it = surfaces.find(row.chunk_id);
      if (it == surfaces.end()) {
        throw Error(Errc::bad_params, row.chunk_id + " has features but no rq rows");
      }
      SyntheticSequence seq;
      seq.chunk_id = row.chunk_id;
      seq.features = row.features;
      seq.surface = it->second;
      seq.gt_ladder = cross_over_bitrates(it->second, grid);
      dataset.push_back(std::move(seq));
    }
  }

  CvConfig cv{grid, config.gbt, config.gp, config.rfe_target_k, opts.folds,
              config.seed};
  const CvReport report = cross_validate(dataset, cv);

  fs::create_directories(opts.out_dir);
  write_text_file((fs::path(opts.out_dir) / "report.json").string(),
                  cv_report_to_json(report));
  {
    std::ofstream out(fs::path(opts.out_dir) / "report.csv");
    write_cv_report_csv(out, report);
  }
  {
    std::ofstream out(fs::path(opts.out_dir) / "bdbr_per_sequence.csv");
    write_cv_per_sequence_csv(out, report);
  }

  std::printf("%-14s %9s %12s %14s %10s\n", "method", "accuracy", "bdbr_vs_gt",
              "bdbr_vs_static", "encodes");
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    const CvMetrics& metrics = report.averaged[m];
    std::printf("%-14s %9.4f %12.3f %14.3f %10.1f\n", report.methods[m].c_str(),
                metrics.accuracy, metrics.bdbr_vs_gt, metrics.bdbr_vs_static,
                metrics.encodes);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    AppConfig config = preload_config(argc, argv);

    CLI::App app{"Per-title bitrate ladder construction, prediction and evaluation"};
    app.require_subcommand(1);
    app.fallthrough();  // global --config/--seed may follow the subcommand
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", config.seed, "Random seed");

    auto* extract = app.add_subcommand("extract-features",
                                       "Compute content features from video chunks");
    std::vector<std::string> inputs;
    std::string output;
    RawGeometry raw;
    bool keep_going = false, scene_split = false;
    extract->add_option("inputs", inputs, "Y4M/YUV files or directories")->required();
    extract->add_option("--output,-o", output, "Feature CSV path (default stdout)");
    extract->add_option("--width", raw.width, "Raw YUV width");
    extract->add_option("--height", raw.height, "Raw YUV height");
    extract->add_option("--fps", raw.fps, "Raw YUV frame rate");
    extract->add_option("--chunk-frames", config.chunk_frames, "Frames per chunk");
    extract->add_flag("--keep-going", keep_going, "Continue past corrupt inputs");
    extract->add_flag("--scene-split", scene_split, "Split chunks at scene cuts");

    auto* build_gt = app.add_subcommand(
        "build-gt", "Construct ground-truth ladders from rate-quality CSV");
    std::string rq_path, gt_out_dir = ".";
    build_gt->add_option("--rq", rq_path, "RQ-point CSV")->required();
    build_gt->add_option("--out-dir", gt_out_dir, "Ladder JSON output directory");
    add_grid_flags(build_gt, config);

    auto* train = app.add_subcommand("train", "Train both constituent predictors");
    std::string manifest, train_out_dir = ".";
    int rfe_k = 0;
    train->add_option("--manifest", manifest,
                      "CSV of chunk_id,features_csv,ladder_json")
        ->required();
    train->add_option("--out-dir", train_out_dir, "Model output directory");
    train->add_option("--rfe-k", rfe_k, "Features to keep (0 = config value)");
    add_grid_flags(train, config);

    auto* predict = app.add_subcommand("predict", "Predict ladders for new chunks");
    std::string classifier_path, regressor_path, features_path, predict_out_dir = ".";
    predict->add_option("--classifier", classifier_path, "Classifier model JSON")
        ->required();
    predict->add_option("--regressor", regressor_path, "Regressor model JSON")
        ->required();
    predict->add_option("--features", features_path, "Feature CSV")->required();
    predict->add_option("--out-dir", predict_out_dir, "Ladder output directory");

    auto* agg = app.add_subcommand("aggregate",
                                   "Fuse two predicted ladders through a backend");
    AggregateOptions agg_opts;
    agg->add_option("--cl", agg_opts.cl_path, "Classifier ladder JSON")->required();
    agg->add_option("--rg", agg_opts.rg_path, "Regressor ladder JSON")->required();
    agg->add_option("--table", agg_opts.table_csv, "RQ CSV backing a table backend");
    agg->add_option("--chunk-id", agg_opts.table_chunk_id, "Chunk id within --table");
    agg->add_option("--synthetic-params", agg_opts.synthetic_params_path,
                    "Synthetic backend parameter JSON");
    agg->add_option("--encoder-template", agg_opts.encoder_template,
                    "External encoder command template");
    agg->add_option("--input", agg_opts.input_video, "Native video for the encoder");
    agg->add_option("--workdir", config.workdir, "Scratch directory for encoder runs");
    agg->add_option("--cache-dir", config.cache_dir, "On-disk encode cache directory");
    agg->add_flag("--fast", agg_opts.fast, "Encode only the two predicted resolutions");
    agg->add_option("--out", agg_opts.out_path, "Final ladder JSON (default stdout)");
    agg->add_option("--report", agg_opts.report_path, "Aggregation report JSON");
    add_grid_flags(agg, config);

    auto* bdbr = app.add_subcommand("bdbr", "BD-rate between two RQ-point CSVs");
    std::string ref_csv, test_csv;
    bdbr->add_option("reference", ref_csv, "Reference RQ CSV")->required();
    bdbr->add_option("test", test_csv, "Test RQ CSV")->required();

    auto* crossval = app.add_subcommand(
        "crossval", "K-fold study of all four prediction methods");
    CrossvalOptions cv_opts;
    crossval->add_flag("--synthetic", cv_opts.synthetic,
                       "Generate the synthetic study dataset");
    crossval->add_option("--sequences", cv_opts.sequences, "Synthetic sequence count");
    crossval->add_option("--noise", cv_opts.noise, "Synthetic feature noise level");
    crossval->add_option("--dataset", cv_opts.dataset_dir,
                         "Directory with features.csv and rq.csv");
    crossval->add_option("--folds", cv_opts.folds, "Fold count");
    crossval->add_option("--out-dir", cv_opts.out_dir, "Report output directory");
    crossval->add_option("--rfe-k", config.rfe_target_k, "Features kept by RFE");
    add_grid_flags(crossval, config);

    app.parse(argc, argv);

    agg_opts.fast = agg_opts.fast || config.aggregator_fast;
    const bool explicit_grid = crossval->count("--min-bps") > 0 ||
                               crossval->count("--max-bps") > 0 ||
                               crossval->count("--grid-points") > 0;

    if (extract->parsed()) {
      return cmd_extract_features(inputs, output, raw, config, keep_going,
                                  scene_split);
    }
    if (build_gt->parsed()) return cmd_build_gt(rq_path, gt_out_dir, config);
    if (train->parsed()) {
      return cmd_train(manifest, train_out_dir, config,
                       rfe_k > 0 ? rfe_k : config.rfe_target_k);
    }
    if (predict->parsed()) {
      return cmd_predict(classifier_path, regressor_path, features_path,
                         predict_out_dir);
    }
    if (agg->parsed()) return cmd_aggregate(agg_opts, config);
    if (bdbr->parsed()) return cmd_bdbr(ref_csv, test_csv);
    if (crossval->parsed()) return cmd_crossval(cv_opts, config, explicit_grid);
    return kExitInput;
  } catch (const CLI::ParseError& e) {
    return CLI::App{}.exit(e);
  } catch (const AggregationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
