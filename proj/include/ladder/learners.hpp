#ifndef LADDER_LEARNERS_HPP
#define LADDER_LEARNERS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ladder/features.hpp"
#include "ladder/gbt.hpp"
#include "ladder/gp.hpp"
#include "ladder/rq_core.hpp"

namespace ladder {

struct TrainingSample {
  std::string chunk_id;
  FeatureVector features;
  BitrateLadder gt_ladder;
};

// Per-dimension affine transform fitted on training data. Dimensions with
// (near) zero spread keep unit scale so degenerate features map to zero.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> apply(const std::vector<double>& row) const;
};

// Multi-class GBT over (masked features + log2 rate) -> resolution index.
struct ClassifierModel {
  ResolutionSet resolutions;
  std::vector<bool> feature_mask;  // over FeatureVector::kCount base features
  Standardizer standardizer;       // over masked features + rate column
  BitrateGrid grid;                // training grid; also the default sweep
  GbtClassifier gbt;
};

// One GP per resolution boundary over masked features -> cross-over rate.
struct RegressorModel {
  ResolutionSet resolutions;
  std::vector<bool> feature_mask;
  Standardizer standardizer;  // over masked features
  BitrateGrid grid;           // clamp range for predicted cross-overs
  std::vector<GpRegressor> gps;
};

enum class LearnerKind { classifier, regressor };

ClassifierModel train_classifier(const std::vector<TrainingSample>& samples,
                                 const BitrateGrid& grid, const GbtHyper& hyper,
                                 const std::vector<bool>& feature_mask = {});

int predict_class(const ClassifierModel& model, const FeatureVector& features,
                  double log2_rate);

// Grid sweep of predict_class followed by the shared isotonic repair.
BitrateLadder classifier_ladder(const ClassifierModel& model,
                                const FeatureVector& features,
                                const BitrateGrid& grid);

RegressorModel train_regressor(const std::vector<TrainingSample>& samples,
                               const BitrateGrid& grid, const GpHyper& hyper,
                               const std::vector<bool>& feature_mask = {});

double predict_crossover(const RegressorModel& model, const FeatureVector& features,
                         int boundary_index);

// All |S|-1 cross-overs, clamped to the grid range and sorted non-decreasing.
BitrateLadder regressor_ladder(const RegressorModel& model,
                               const FeatureVector& features);

struct RfeConfig {
  BitrateGrid grid;
  GbtHyper gbt;
  GpHyper gp;
  std::uint64_t seed = 0;
};

// Greedy backward elimination: repeatedly trains the learner, scores the
// surviving features (GBT: total split gain; GP: training-error increase
// under single-feature permutation) and drops the weakest until target_k
// remain.
std::vector<bool> rfe_select(const std::vector<TrainingSample>& samples,
                             LearnerKind kind, int target_k, const RfeConfig& config);

}  // namespace ladder

#endif  // LADDER_LEARNERS_HPP
