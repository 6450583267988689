#ifndef LADDER_ENSEMBLE_HPP
#define LADDER_ENSEMBLE_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "ladder/rq_core.hpp"
#include "ladder/types.hpp"
#include "ladder/video.hpp"

namespace ladder {

// The encoder contract: quality of one chunk at (rate, resolution). Repeated
// identical queries are memoized and must return identical values; backends
// are safe to query from multiple threads.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;

  const ResolutionSet& resolutions() const { return resolutions_; }
  double min_log2_rate() const { return min_log2_rate_; }
  double max_log2_rate() const { return max_log2_rate_; }

  // Memoized quality lookup; counts one encode per distinct (rate, index).
  double quality(double log2_rate, int resolution_index);

  // Encodes actually performed (cache misses).
  std::uint64_t encode_count() const;

 protected:
  EncoderBackend(ResolutionSet resolutions, double min_log2_rate,
                 double max_log2_rate);

  virtual double measure(double log2_rate, int resolution_index) = 0;

 private:
  ResolutionSet resolutions_;
  double min_log2_rate_;
  double max_log2_rate_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::uint64_t, int>, double> cache_;
  std::uint64_t encodes_ = 0;
};

// Backend over a measured surface: quality is the per-resolution interpolant.
std::unique_ptr<EncoderBackend> make_table_backend(const RateQualitySurface& surface);

// Saturating-exponential curve family per resolution:
//   q(x) = U * (1 - exp(-k * max(0, x - onset)))   with x = log2 rate.
// Ceilings and onsets must rise strictly with the resolution index so that
// consecutive curves cross exactly once.
struct SyntheticParams {
  std::vector<double> ceiling_db;    // U, per resolution
  std::vector<double> steepness;     // k
  std::vector<double> onset_log2;    // o

  void validate(std::size_t resolution_count) const;
};

std::unique_ptr<EncoderBackend> make_synthetic_backend(const ResolutionSet& resolutions,
                                                       const SyntheticParams& params);

// Shell-command backend. The template must contain {input}, {width},
// {height}, {bitrate_bps} and {output}; it is expected to encode the
// downscaled {input} (Y4M) at {bitrate_bps} and leave a decoded Y4M
// reconstruction at {output}. Qualities are cached on disk keyed by
// (content hash, rate, resolution).
struct ExternalBackendConfig {
  std::string command_template;
  std::string workdir;
  std::string cache_dir;  // empty disables the disk cache
  double min_log2_rate = 10.0;
  double max_log2_rate = 40.0;
};

std::unique_ptr<EncoderBackend> make_external_backend(const ResolutionSet& resolutions,
                                                      const ExternalBackendConfig& config,
                                                      VideoChunk native_chunk);

struct AggregatorConfig {
  bool is_fast = false;
  BitrateGrid grid;
};

// Per-grid-point trace of the aggregation, kept pre-repair so the decision
// at each rate stays auditable.
struct AggregationPoint {
  double log2_rate = 0.0;
  int classifier_index = 0;
  int regressor_index = 0;
  bool agree = false;
  int encodes = 0;
  int chosen_index = 0;
};

struct AggregationReport {
  BitrateLadder final_ladder;
  std::vector<AggregationPoint> points;
  std::uint64_t total_encodes = 0;
  std::uint64_t disagreements = 0;
};

// Backend failure mid-aggregation; carries the points resolved so far.
class AggregationError : public Error {
 public:
  AggregationError(const Error& cause, std::vector<AggregationPoint> partial)
      : Error(cause.code(), strip_prefix(cause)), partial_points_(std::move(partial)) {}

  const std::vector<AggregationPoint>& partial_points() const {
    return partial_points_;
  }

 private:
  static std::string strip_prefix(const Error& cause) {
    const std::string prefix = std::string(errc_name(cause.code())) + ": ";
    const std::string what = cause.what();
    return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
  }

  std::vector<AggregationPoint> partial_points_;
};

// Conditional ensemble over the two constituent ladders: agreement points
// pass through; disagreement points are resolved by encoding either the two
// predicted resolutions (fast) or all of them (full) and taking the argmax,
// ties toward the lower index. The per-point choices are then isotonic-
// repaired into a valid ladder.
AggregationReport aggregate(const BitrateLadder& ladder_cl,
                            const BitrateLadder& ladder_rg, EncoderBackend& backend,
                            const AggregatorConfig& config);

}  // namespace ladder

#endif  // LADDER_ENSEMBLE_HPP
