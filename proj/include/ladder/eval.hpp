#ifndef LADDER_EVAL_HPP
#define LADDER_EVAL_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ladder/ensemble.hpp"
#include "ladder/learners.hpp"
#include "ladder/rq_core.hpp"

namespace ladder {

struct BdBrResult {
  double percent = 0.0;      // negative = bitrate saving of test vs reference
  double overlap_low = 0.0;  // quality overlap bounds, dB
  double overlap_high = 0.0;
};

// Bjontegaard delta bitrate generalized to any number of points: monotone
// piecewise-cubic fits of log2-rate as a function of quality, integrated in
// closed form over the common quality interval.
BdBrResult bd_br(const std::vector<RQPoint>& reference_points,
                 const std::vector<RQPoint>& test_points);

// The RD curve a ladder realizes through a backend: one point per grid rate
// at the ladder-selected resolution.
std::vector<RQPoint> ladder_rq_points(const BitrateLadder& ladder,
                                      EncoderBackend& backend,
                                      const BitrateGrid& grid);

// Fraction of grid rates where the two ladders pick the same resolution.
double ladder_accuracy(const BitrateLadder& predicted, const BitrateLadder& gt,
                       const BitrateGrid& grid);

// Synthetic stand-in for a real encode corpus: a scalar complexity latent is
// mapped affinely to both the feature vector (with bounded uniform noise)
// and the synthetic curve parameters, so learnable structure and label
// difficulty are controlled by construction.
struct SyntheticDatasetSpec {
  int sequence_count = 100;
  double latent_min = 0.0;
  double latent_max = 1.0;
  double noise_level = 2.0;  // scales the per-feature noise amplitudes
  std::uint64_t seed = 17;
  BitrateGrid grid{5.0, 16.0, 100};
  ResolutionSet resolutions;

  // latent -> feature: base + slope * latent + noise_amp * noise_level * u,
  // u uniform in [-1, 1]. The maps stay inside the FeatureVector ranges for
  // noise levels up to 2.5.
  std::array<double, FeatureVector::kCount> feature_base{
      2.0, 0.9, 0.7, 0.8, 0.5, 2.0, 0.5, 20.0, 5.0};
  std::array<double, FeatureVector::kCount> feature_slope{
      10.0, -0.5, -0.5, -0.4, 2.5, 12.0, 3.0, 60.0, 25.0};
  std::array<double, FeatureVector::kCount> feature_noise_amp{
      0.5, 0.05, 0.04, 0.04, 0.2, 0.8, 0.15, 4.0, 2.0};

  // latent -> synthetic curve parameters, per resolution.
  std::vector<double> ceiling_base{38.0, 42.0, 46.0, 50.0};
  double ceiling_slope = -6.0;
  std::vector<double> steepness_base{1.2, 1.0, 0.8, 0.6};
  std::vector<double> onset_base{5.0, 6.2, 7.4, 8.6};
  double onset_slope = 4.0;

  SyntheticParams params_for(double latent) const;
  void validate() const;
};

SyntheticDatasetSpec default_synthetic_spec();

struct SyntheticSequence {
  std::string chunk_id;
  FeatureVector features;
  RateQualitySurface surface;
  BitrateLadder gt_ladder;
};

std::vector<SyntheticSequence> generate_synthetic_dataset(
    const SyntheticDatasetSpec& spec);

// One evaluated (fold, method) cell of the cross-validation study.
struct CvMetrics {
  double accuracy = 0.0;
  double bdbr_vs_gt = 0.0;
  double bdbr_vs_static = 0.0;
  double encodes = 0.0;  // mean backend queries per sequence
};

struct CvSequenceResult {
  std::string chunk_id;
  int fold = 0;
  std::string method;
  double accuracy = 0.0;
  double bdbr_vs_gt = 0.0;
  double bdbr_vs_static = 0.0;
  std::uint64_t encodes = 0;
  std::uint64_t disagreements = 0;
};

struct CvReport {
  std::vector<std::string> methods;  // classifier, regressor, ensemble_fast, ensemble_full
  std::vector<std::vector<CvMetrics>> per_fold;  // [fold][method]
  std::vector<CvMetrics> averaged;               // [method]
  std::vector<std::vector<std::string>> fold_chunks;
  std::vector<CvSequenceResult> per_sequence;
  std::uint64_t total_disagreements = 0;
};

struct CvConfig {
  BitrateGrid grid;
  GbtHyper gbt;
  GpHyper gp;
  int rfe_target_k = 6;
  int folds = 10;
  std::uint64_t seed = 17;
};

// Seeded fold partition; per fold trains both constituents (with RFE),
// recomputes the static ladder from the training split, and evaluates all
// four methods on the held-out sequences.
CvReport cross_validate(const std::vector<SyntheticSequence>& dataset,
                        const CvConfig& config);

}  // namespace ladder

#endif  // LADDER_EVAL_HPP
