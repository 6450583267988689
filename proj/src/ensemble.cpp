#include "ladder/ensemble.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "ladder/scaling.hpp"

namespace ladder {

namespace fs = std::filesystem;
using nlohmann::json;

EncoderBackend::EncoderBackend(ResolutionSet resolutions, double min_log2_rate,
                               double max_log2_rate)
    : resolutions_(std::move(resolutions)),
      min_log2_rate_(min_log2_rate),
      max_log2_rate_(max_log2_rate) {}

double EncoderBackend::quality(double log2_rate, int resolution_index) {
  if (resolution_index < 1 ||
      resolution_index > static_cast<int>(resolutions_.size())) {
    throw Error(Errc::unsupported_resolution,
                "resolution index " + std::to_string(resolution_index) +
                    " outside the backend capability");
  }
  if (!std::isfinite(log2_rate) || log2_rate < min_log2_rate_ ||
      log2_rate > max_log2_rate_) {
    throw Error(Errc::rate_out_of_range,
                "log2 rate " + std::to_string(log2_rate) + " outside backend range");
  }

  const std::uint64_t rate_bits = std::bit_cast<std::uint64_t>(log2_rate);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = cache_.find(std::make_pair(rate_bits, resolution_index));
    if (it != cache_.end()) return it->second;
  }
  const double q = measure(log2_rate, resolution_index);
  if (!std::isfinite(q)) {
    throw Error(Errc::encoder_failure, "backend produced a non-finite quality");
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    // Last writer wins; measurements are deterministic so races are benign.
    cache_[std::make_pair(rate_bits, resolution_index)] = q;
    ++encodes_;
  }
  return q;
}

std::uint64_t EncoderBackend::encode_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return encodes_;
}

namespace {

constexpr double kUnboundedLog2Rate = 1024.0;

class TableBackend final : public EncoderBackend {
 public:
  explicit TableBackend(const RateQualitySurface& surface)
      : EncoderBackend(surface.resolutions, -kUnboundedLog2Rate, kUnboundedLog2Rate),
        interp_(surface) {}

 protected:
  double measure(double log2_rate, int resolution_index) override {
    return interp_.quality(resolution_index, log2_rate);
  }

 private:
  SurfaceInterpolator interp_;
};

class SyntheticBackend final : public EncoderBackend {
 public:
  SyntheticBackend(const ResolutionSet& resolutions, SyntheticParams params)
      : EncoderBackend(resolutions, -kUnboundedLog2Rate, kUnboundedLog2Rate),
        params_(std::move(params)) {}

 protected:
  double measure(double log2_rate, int resolution_index) override {
    const std::size_t i = static_cast<std::size_t>(resolution_index) - 1;
    const double x = log2_rate - params_.onset_log2[i];
    if (x <= 0.0) return 0.0;
    return params_.ceiling_db[i] * (1.0 - std::exp(-params_.steepness[i] * x));
  }

 private:
  SyntheticParams params_;
};

}  // namespace

void SyntheticParams::validate(std::size_t resolution_count) const {
  if (ceiling_db.size() != resolution_count || steepness.size() != resolution_count ||
      onset_log2.size() != resolution_count) {
    throw Error(Errc::bad_params, "synthetic parameter arrays must match |S|");
  }
  for (std::size_t i = 0; i < resolution_count; ++i) {
    if (!std::isfinite(ceiling_db[i]) || !std::isfinite(steepness[i]) ||
        !std::isfinite(onset_log2[i]) || ceiling_db[i] <= 0.0 || steepness[i] <= 0.0) {
      throw Error(Errc::bad_params, "synthetic parameters must be finite and positive");
    }
    if (i > 0 && (ceiling_db[i] <= ceiling_db[i - 1] ||
                  onset_log2[i] <= onset_log2[i - 1])) {
      throw Error(Errc::bad_params,
                  "synthetic ceilings and onsets must rise strictly with resolution");
    }
  }
}

std::unique_ptr<EncoderBackend> make_table_backend(const RateQualitySurface& surface) {
  return std::make_unique<TableBackend>(surface);
}

std::unique_ptr<EncoderBackend> make_synthetic_backend(const ResolutionSet& resolutions,
                                                       const SyntheticParams& params) {
  params.validate(resolutions.size());
  return std::make_unique<SyntheticBackend>(resolutions, params);
}

namespace {

std::string replace_all(std::string text, const std::string& key,
                        const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
  return text;
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t chunk_hash(const VideoChunk& chunk) {
  std::uint64_t h = 1469598103934665603ULL;
  const int dims[3] = {chunk.width, chunk.height, chunk.frame_count()};
  h = fnv1a(dims, sizeof(dims), h);
  for (const Frame& frame : chunk.frames) {
    h = fnv1a(frame.luma.data(), frame.luma.size(), h);
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class ExternalBackend final : public EncoderBackend {
 public:
  ExternalBackend(const ResolutionSet& resolutions, ExternalBackendConfig config,
                  VideoChunk native_chunk)
      : EncoderBackend(resolutions, config.min_log2_rate, config.max_log2_rate),
        config_(std::move(config)),
        native_(std::move(native_chunk)),
        content_hash_(chunk_hash(native_)) {
    for (const char* placeholder :
         {"{input}", "{width}", "{height}", "{bitrate_bps}", "{output}"}) {
      if (config_.command_template.find(placeholder) == std::string::npos) {
        throw Error(Errc::bad_template,
                    std::string("command template is missing ") + placeholder);
      }
    }
    fs::create_directories(config_.workdir);
    if (!config_.cache_dir.empty()) fs::create_directories(config_.cache_dir);
  }

 protected:
  double measure(double log2_rate, int resolution_index) override {
    const std::string key = hex64(content_hash_) + "_" +
                            hex64(std::bit_cast<std::uint64_t>(log2_rate)) + "_" +
                            std::to_string(resolution_index);
    const fs::path cache_file =
        config_.cache_dir.empty() ? fs::path()
                                  : fs::path(config_.cache_dir) / (key + ".json");
    if (!cache_file.empty() && fs::exists(cache_file)) {
      return read_cache(cache_file);
    }

    const Resolution& res = resolutions().at(resolution_index);
    const fs::path input = fs::path(config_.workdir) / ("in_" + key + ".y4m");
    const fs::path output = fs::path(config_.workdir) / ("out_" + key + ".y4m");
    const fs::path log_path = fs::path(config_.workdir) / ("enc_" + key + ".log");

    // Scratch files go away on every path; the log stays as the audit trail.
    struct Scratch {
      const fs::path& in;
      const fs::path& out;
      ~Scratch() {
        std::error_code ec;
        fs::remove(in, ec);
        fs::remove(out, ec);
      }
    } scratch{input, output};

    write_y4m_file(input.string(), lanczos_resize(native_, res.width, res.height));

    const long long bitrate_bps =
        static_cast<long long>(std::llround(std::exp2(log2_rate)));
    std::string cmd = config_.command_template;
    cmd = replace_all(cmd, "{input}", input.string());
    cmd = replace_all(cmd, "{output}", output.string());
    cmd = replace_all(cmd, "{width}", std::to_string(res.width));
    cmd = replace_all(cmd, "{height}", std::to_string(res.height));
    cmd = replace_all(cmd, "{bitrate_bps}", std::to_string(bitrate_bps));
    run_command(cmd, log_path);

    const VideoChunk reconstructed = read_y4m_file(output.string());
    const VideoChunk upsampled =
        lanczos_resize(reconstructed, native_.width, native_.height);
    const double quality_db = scaled_psnr(native_, upsampled);

    if (!cache_file.empty()) {
      json record;
      record["key"] = key;
      record["quality_db"] = quality_db;
      record["encoder_log_path"] = log_path.string();
      std::ofstream out(cache_file);
      out << record.dump(2) << "\n";
    }
    return quality_db;
  }

 private:
  double read_cache(const fs::path& cache_file) const {
    std::ifstream in(cache_file);
    json record;
    try {
      in >> record;
    } catch (const json::exception& e) {
      throw Error(Errc::cache_corruption,
                  cache_file.string() + ": " + std::string(e.what()));
    }
    if (!record.contains("quality_db") || !record["quality_db"].is_number()) {
      throw Error(Errc::cache_corruption,
                  cache_file.string() + ": missing quality_db");
    }
    return record["quality_db"].get<double>();
  }

  void run_command(const std::string& cmd, const fs::path& log_path) const {
    const std::string shell_cmd = cmd + " 2>&1";
    std::string captured;
    FILE* pipe = popen(shell_cmd.c_str(), "r");
    if (pipe == nullptr) {
      throw Error(Errc::encoder_failure, "failed to launch: " + cmd);
    }
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) {
      captured.append(buf, got);
    }
    const int status = pclose(pipe);
    {
      std::ofstream log(log_path);
      log << captured;
    }
    if (status != 0) {
      throw Error(Errc::encoder_failure,
                  "command exited with status " + std::to_string(status) + ": " +
                      cmd + "\n" + captured);
    }
  }

  ExternalBackendConfig config_;
  VideoChunk native_;
  std::uint64_t content_hash_;
};

}  // namespace

std::unique_ptr<EncoderBackend> make_external_backend(const ResolutionSet& resolutions,
                                                      const ExternalBackendConfig& config,
                                                      VideoChunk native_chunk) {
  return std::make_unique<ExternalBackend>(resolutions, config,
                                           std::move(native_chunk));
}

AggregationReport aggregate(const BitrateLadder& ladder_cl,
                            const BitrateLadder& ladder_rg, EncoderBackend& backend,
                            const AggregatorConfig& config) {
  if (!(ladder_cl.resolutions == ladder_rg.resolutions) ||
      !(ladder_cl.resolutions == backend.resolutions())) {
    throw Error(Errc::mixed_resolution_sets,
                "constituent ladders and backend must share the resolution set");
  }
  const int class_count = static_cast<int>(ladder_cl.resolutions.size());

  AggregationReport report;
  report.points.reserve(static_cast<std::size_t>(config.grid.count()));
  std::vector<int> chosen(static_cast<std::size_t>(config.grid.count()));

  for (int t = 0; t < config.grid.count(); ++t) {
    const double rate = config.grid.point(t);
    AggregationPoint point;
    point.log2_rate = rate;
    point.classifier_index = ladder_lookup(ladder_cl, rate);
    point.regressor_index = ladder_lookup(ladder_rg, rate);
    point.agree = point.classifier_index == point.regressor_index;

    if (point.agree) {
      point.chosen_index = point.classifier_index;
    } else {
      std::vector<int> candidates;
      if (config.is_fast) {
        candidates = {std::min(point.classifier_index, point.regressor_index),
                      std::max(point.classifier_index, point.regressor_index)};
      } else {
        for (int i = 1; i <= class_count; ++i) candidates.push_back(i);
      }
      double best_q = 0.0;
      for (const int i : candidates) {
        double q;
        try {
          q = backend.quality(rate, i);
        } catch (const Error& e) {
          throw AggregationError(e, std::move(report.points));
        }
        ++point.encodes;
        if (point.chosen_index == 0 || q > best_q) {  // ascending scan: tie -> lower
          best_q = q;
          point.chosen_index = i;
        }
      }
      report.total_encodes += static_cast<std::uint64_t>(point.encodes);
      ++report.disagreements;
    }
    chosen[static_cast<std::size_t>(t)] = point.chosen_index;
    report.points.push_back(point);
  }

  report.final_ladder =
      ladder_from_index_sequence(ladder_cl.resolutions, config.grid, chosen);
  return report;
}

}  // namespace ladder
