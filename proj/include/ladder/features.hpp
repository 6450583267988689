#ifndef LADDER_FEATURES_HPP
#define LADDER_FEATURES_HPP

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "ladder/video.hpp"

namespace ladder {

// Gray-level co-occurrence setup. Directions are degrees out of
// {0, 45, 90, 135}; the matrix is accumulated over all of them (and their
// transposes when symmetric) before one normalization.
struct GlcmConfig {
  int gray_levels = 8;
  int distance = 1;
  std::vector<int> directions_deg = {0, 45, 90, 135};
  bool symmetric = true;

  void validate() const;
};

struct GlcmStats {
  double contrast = 0.0;
  double correlation = 0.0;
  double energy = 0.0;
  double homogeneity = 0.0;
  double entropy = 0.0;
};

// The learners' per-chunk input: five GLCM descriptors averaged over frames,
// temporal-complexity statistics, and the SI/TI pair.
struct FeatureVector {
  double glcm_contrast = 0.0;
  double glcm_correlation = 0.0;
  double glcm_energy = 0.0;
  double glcm_homogeneity = 0.0;
  double glcm_entropy = 0.0;
  double tc_mean = 0.0;
  double tc_std = 0.0;
  double si = 0.0;
  double ti = 0.0;

  static constexpr int kCount = 9;
  static const std::array<std::string, kCount>& names();

  std::array<double, kCount> to_array() const;
  static FeatureVector from_array(const std::array<double, kCount>& values);

  void validate() const;
};

GlcmStats glcm_descriptors(const Frame& frame, const GlcmConfig& config);

// Mean absolute luma difference per pixel.
double temporal_complexity(const Frame& prev, const Frame& next);

// SI: max over frames of the stddev of the 3x3 Sobel gradient magnitude
// (border excluded). TI: max over consecutive pairs of the stddev of the
// luma difference.
std::pair<double, double> si_ti(const VideoChunk& chunk);

FeatureVector chunk_features(const VideoChunk& chunk, const GlcmConfig& config);

// Flags frame t as a scene cut when TC(t-1,t) exceeds threshold times the
// median TC of the trailing window.
std::vector<int> detect_scene_change(const VideoChunk& chunk, int window = 16,
                                     double threshold = 8.0);

}  // namespace ladder

#endif  // LADDER_FEATURES_HPP
