#include "ladder/types.hpp"

#include <algorithm>
#include <tuple>

namespace ladder {

ResolutionSet ResolutionSet::from_list(
    const std::vector<std::tuple<int, int, std::string>>& entries) {
  std::vector<Resolution> resolutions;
  resolutions.reserve(entries.size());
  int index = 1;
  for (const auto& [width, height, label] : entries) {
    resolutions.push_back(Resolution{index++, width, height, label});
  }
  return ResolutionSet(std::move(resolutions));
}

ResolutionSet::ResolutionSet(std::vector<Resolution> resolutions)
    : resolutions_(std::move(resolutions)) {
  if (resolutions_.size() < 2) {
    throw Error(Errc::bad_params, "resolution set needs at least two entries");
  }
  for (std::size_t i = 0; i < resolutions_.size(); ++i) {
    const Resolution& r = resolutions_[i];
    if (r.index != static_cast<int>(i) + 1) {
      throw Error(Errc::bad_params, "resolution indices must be contiguous from 1");
    }
    if (r.width <= 0 || r.height <= 0 || r.width % 2 != 0 || r.height % 2 != 0) {
      throw Error(Errc::bad_params,
                  "resolution dimensions must be positive and even: " + r.label);
    }
    if (i > 0 && r.height <= resolutions_[i - 1].height) {
      throw Error(Errc::bad_params, "resolution heights must be strictly ascending");
    }
  }
}

const Resolution& ResolutionSet::at(int index_1based) const {
  if (index_1based < 1 || index_1based > static_cast<int>(resolutions_.size())) {
    throw Error(Errc::bad_params, "resolution index out of range");
  }
  return resolutions_[static_cast<std::size_t>(index_1based) - 1];
}

int ResolutionSet::index_of(int width, int height) const {
  for (const Resolution& r : resolutions_) {
    if (r.width == width && r.height == height) return r.index;
  }
  return 0;
}

void RateQualitySurface::validate() const {
  if (curves.size() != resolutions.size()) {
    throw Error(Errc::bad_params, "surface needs exactly one curve per resolution");
  }
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (!(curves[i].resolution == resolutions.at(static_cast<int>(i) + 1))) {
      throw Error(Errc::bad_params, "surface curve order does not match resolutions");
    }
    if (curves[i].points.size() < 2) {
      throw Error(Errc::too_few_points, "surface curve has fewer than two points");
    }
  }
}

void BitrateLadder::validate() const {
  if (crossover_log2_rates.size() != resolutions.size() - 1) {
    throw Error(Errc::bad_params, "ladder needs |S|-1 cross-over rates");
  }
  for (std::size_t i = 0; i < crossover_log2_rates.size(); ++i) {
    if (!std::isfinite(crossover_log2_rates[i])) {
      throw Error(Errc::non_finite, "ladder cross-over is not finite");
    }
    if (i > 0 && crossover_log2_rates[i] < crossover_log2_rates[i - 1]) {
      throw Error(Errc::bad_params, "ladder cross-overs must be non-decreasing");
    }
  }
}

BitrateGrid::BitrateGrid(double min_log2, double max_log2, int count)
    : min_log2_(min_log2), max_log2_(max_log2), count_(count) {
  if (!std::isfinite(min_log2) || !std::isfinite(max_log2)) {
    throw Error(Errc::non_finite, "grid bounds must be finite");
  }
  if (!(min_log2 < max_log2) || count < 2) {
    throw Error(Errc::bad_params, "grid needs min < max and at least two points");
  }
}

std::vector<double> BitrateGrid::points() const {
  std::vector<double> out(static_cast<std::size_t>(count_));
  for (int i = 0; i < count_; ++i) out[static_cast<std::size_t>(i)] = point(i);
  return out;
}

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::too_few_points: return "TooFewPoints";
    case Errc::non_finite: return "NonFinite";
    case Errc::mixed_resolution_sets: return "MixedResolutionSets";
    case Errc::bad_magic: return "BadMagic";
    case Errc::unsupported_format: return "UnsupportedFormat";
    case Errc::truncated_frame: return "TruncatedFrame";
    case Errc::size_mismatch: return "SizeMismatch";
    case Errc::frame_too_small: return "FrameTooSmall";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::too_few_frames: return "TooFewFrames";
    case Errc::degenerate_labels: return "DegenerateLabels";
    case Errc::singular_kernel: return "SingularKernel";
    case Errc::bad_boundary_index: return "BadBoundaryIndex";
    case Errc::unsupported_resolution: return "UnsupportedResolution";
    case Errc::encoder_failure: return "EncoderFailure";
    case Errc::rate_out_of_range: return "RateOutOfRange";
    case Errc::bad_params: return "BadParams";
    case Errc::bad_template: return "BadTemplate";
    case Errc::cache_corruption: return "CacheCorruption";
    case Errc::no_overlap: return "NoOverlap";
    case Errc::bad_target: return "BadTarget";
    case Errc::dataset_too_small: return "DatasetTooSmall";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::bad_config: return "BadConfig";
    case Errc::io_failure: return "IoFailure";
  }
  return "UnknownError";
}

}  // namespace ladder
