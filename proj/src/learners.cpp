#include "ladder/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ladder {

namespace {

std::vector<bool> full_mask_if_empty(std::vector<bool> mask) {
  if (mask.empty()) mask.assign(FeatureVector::kCount, true);
  if (mask.size() != FeatureVector::kCount) {
    throw Error(Errc::bad_params, "feature mask length mismatch");
  }
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw Error(Errc::bad_params, "feature mask selects no features");
  }
  return mask;
}

std::vector<double> masked_features(const FeatureVector& fv,
                                    const std::vector<bool>& mask) {
  const auto all = fv.to_array();
  std::vector<double> out;
  out.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (mask[i]) out.push_back(all[i]);
  }
  return out;
}

void check_shared_resolutions(const std::vector<TrainingSample>& samples) {
  if (samples.empty()) throw Error(Errc::dataset_too_small, "no training samples");
  for (const TrainingSample& s : samples) {
    if (!(s.gt_ladder.resolutions == samples.front().gt_ladder.resolutions)) {
      throw Error(Errc::mixed_resolution_sets,
                  "training ladders disagree on the resolution set");
    }
  }
}

}  // namespace

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(Errc::bad_params, "cannot standardize zero rows");
  const std::size_t dims = rows.front().size();
  Standardizer st;
  st.mean.assign(dims, 0.0);
  st.scale.assign(dims, 1.0);
  for (const auto& row : rows) {
    for (std::size_t d = 0; d < dims; ++d) st.mean[d] += row[d];
  }
  for (double& m : st.mean) m /= static_cast<double>(rows.size());
  std::vector<double> var(dims, 0.0);
  for (const auto& row : rows) {
    for (std::size_t d = 0; d < dims; ++d) {
      const double diff = row[d] - st.mean[d];
      var[d] += diff * diff;
    }
  }
  for (std::size_t d = 0; d < dims; ++d) {
    const double sd = std::sqrt(var[d] / static_cast<double>(rows.size()));
    st.scale[d] = sd > 1e-12 ? sd : 1.0;
  }
  return st;
}

std::vector<double> Standardizer::apply(const std::vector<double>& row) const {
  if (row.size() != mean.size()) {
    throw Error(Errc::bad_params, "standardizer dimension mismatch");
  }
  std::vector<double> out(row.size());
  for (std::size_t d = 0; d < row.size(); ++d) {
    out[d] = (row[d] - mean[d]) / scale[d];
  }
  return out;
}

ClassifierModel train_classifier(const std::vector<TrainingSample>& samples,
                                 const BitrateGrid& grid, const GbtHyper& hyper,
                                 const std::vector<bool>& feature_mask) {
  check_shared_resolutions(samples);
  const std::vector<bool> mask = full_mask_if_empty(feature_mask);
  const ResolutionSet& resolutions = samples.front().gt_ladder.resolutions;
  const int class_count = static_cast<int>(resolutions.size());

  // Expand every sample into one row per grid rate, labeled by the ground
  // truth ladder.
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  rows.reserve(samples.size() * static_cast<std::size_t>(grid.count()));
  for (const TrainingSample& s : samples) {
    const std::vector<double> base = masked_features(s.features, mask);
    for (int t = 0; t < grid.count(); ++t) {
      std::vector<double> row = base;
      row.push_back(grid.point(t));
      rows.push_back(std::move(row));
      labels.push_back(ladder_lookup(s.gt_ladder, grid.point(t)) - 1);
    }
  }

  if (std::adjacent_find(labels.begin(), labels.end(),
                         std::not_equal_to<>()) == labels.end()) {
    throw Error(Errc::degenerate_labels,
                "expanded training set contains a single class");
  }

  const Standardizer st = Standardizer::fit(rows);
  const std::size_t dims = rows.front().size();
  std::vector<double> X;
  X.reserve(rows.size() * dims);
  for (const auto& row : rows) {
    for (double v : st.apply(row)) X.push_back(v);
  }

  ClassifierModel model{resolutions, mask, st, grid,
                        GbtClassifier::train(X, dims, labels, class_count, hyper)};
  return model;
}

int predict_class(const ClassifierModel& model, const FeatureVector& features,
                  double log2_rate) {
  std::vector<double> row = masked_features(features, model.feature_mask);
  row.push_back(log2_rate);
  const std::vector<double> x = model.standardizer.apply(row);
  return model.gbt.predict(x) + 1;
}

BitrateLadder classifier_ladder(const ClassifierModel& model,
                                const FeatureVector& features,
                                const BitrateGrid& grid) {
  std::vector<int> indices(static_cast<std::size_t>(grid.count()));
  for (int t = 0; t < grid.count(); ++t) {
    indices[static_cast<std::size_t>(t)] = predict_class(model, features, grid.point(t));
  }
  return ladder_from_index_sequence(model.resolutions, grid, indices);
}

RegressorModel train_regressor(const std::vector<TrainingSample>& samples,
                               const BitrateGrid& grid, const GpHyper& hyper,
                               const std::vector<bool>& feature_mask) {
  check_shared_resolutions(samples);
  if (samples.size() < 3) {
    throw Error(Errc::dataset_too_small, "regressor needs at least three samples");
  }
  const std::vector<bool> mask = full_mask_if_empty(feature_mask);
  const ResolutionSet& resolutions = samples.front().gt_ladder.resolutions;
  const std::size_t boundaries = resolutions.size() - 1;

  std::vector<std::vector<double>> rows;
  rows.reserve(samples.size());
  for (const TrainingSample& s : samples) {
    rows.push_back(masked_features(s.features, mask));
  }
  const Standardizer st = Standardizer::fit(rows);

  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::vector<double> z = st.apply(rows[i]);
    for (std::size_t d = 0; d < z.size(); ++d) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = z[d];
    }
  }

  RegressorModel model{resolutions, mask, st, grid, {}};
  model.gps.reserve(boundaries);
  for (std::size_t b = 0; b < boundaries; ++b) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      y(static_cast<Eigen::Index>(i)) = samples[i].gt_ladder.crossover_log2_rates[b];
    }
    model.gps.push_back(GpRegressor::fit(X, y, hyper));
  }
  return model;
}

double predict_crossover(const RegressorModel& model, const FeatureVector& features,
                         int boundary_index) {
  if (boundary_index < 1 || boundary_index > static_cast<int>(model.gps.size())) {
    throw Error(Errc::bad_boundary_index,
                "boundary index must be in 1..|S|-1, got " +
                    std::to_string(boundary_index));
  }
  const std::vector<double> z =
      model.standardizer.apply(masked_features(features, model.feature_mask));
  Eigen::RowVectorXd x(static_cast<Eigen::Index>(z.size()));
  for (std::size_t d = 0; d < z.size(); ++d) {
    x(static_cast<Eigen::Index>(d)) = z[d];
  }
  return model.gps[static_cast<std::size_t>(boundary_index) - 1].predict(x);
}

BitrateLadder regressor_ladder(const RegressorModel& model,
                               const FeatureVector& features) {
  std::vector<double> crossovers;
  crossovers.reserve(model.gps.size());
  for (int b = 1; b <= static_cast<int>(model.gps.size()); ++b) {
    const double r = predict_crossover(model, features, b);
    crossovers.push_back(std::clamp(r, model.grid.min_log2(), model.grid.max_log2()));
  }
  std::sort(crossovers.begin(), crossovers.end());
  BitrateLadder ladder{model.resolutions, std::move(crossovers)};
  ladder.validate();
  return ladder;
}

namespace {

// Total split gain per original feature index; the rate column is not a
// candidate for elimination.
std::vector<double> classifier_importance(const std::vector<TrainingSample>& samples,
                                          const std::vector<bool>& mask,
                                          const RfeConfig& config) {
  const ClassifierModel model =
      train_classifier(samples, config.grid, config.gbt, mask);
  const std::vector<double> gains = model.gbt.feature_gains();
  std::vector<double> importance(FeatureVector::kCount, 0.0);
  std::size_t packed = 0;
  for (std::size_t f = 0; f < FeatureVector::kCount; ++f) {
    if (!mask[f]) continue;
    importance[f] = gains[packed++];
  }
  return importance;
}

// Training-error increase when one feature column is permuted, summed over
// the per-boundary GPs.
std::vector<double> regressor_importance(const std::vector<TrainingSample>& samples,
                                         const std::vector<bool>& mask,
                                         const RfeConfig& config, int iteration) {
  const RegressorModel model = train_regressor(samples, config.grid, config.gp, mask);
  const std::size_t n = samples.size();

  const auto rmse_with = [&](int permuted_feature,
                             const std::vector<std::size_t>& perm) {
    double sse = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      FeatureVector fv = samples[i].features;
      if (permuted_feature >= 0) {
        auto arr = fv.to_array();
        arr[static_cast<std::size_t>(permuted_feature)] =
            samples[perm[i]].features.to_array()[static_cast<std::size_t>(
                permuted_feature)];
        fv = FeatureVector::from_array(arr);
      }
      for (int b = 1; b <= static_cast<int>(model.gps.size()); ++b) {
        const double predicted = predict_crossover(model, fv, b);
        const double target =
            samples[i].gt_ladder.crossover_log2_rates[static_cast<std::size_t>(b) - 1];
        sse += (predicted - target) * (predicted - target);
        ++count;
      }
    }
    return std::sqrt(sse / static_cast<double>(count));
  };

  const double baseline = rmse_with(-1, {});
  std::vector<double> importance(FeatureVector::kCount, 0.0);
  for (int f = 0; f < FeatureVector::kCount; ++f) {
    if (!mask[static_cast<std::size_t>(f)]) continue;
    std::mt19937_64 rng(config.seed ^ (0x9e3779b97f4a7c15ULL * (iteration + 1)) ^
                        (0xc2b2ae3d27d4eb4fULL * (f + 1)));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    importance[static_cast<std::size_t>(f)] = rmse_with(f, perm) - baseline;
  }
  return importance;
}

}  // namespace

std::vector<bool> rfe_select(const std::vector<TrainingSample>& samples,
                             LearnerKind kind, int target_k, const RfeConfig& config) {
  if (target_k < 1 || target_k > FeatureVector::kCount) {
    throw Error(Errc::bad_params, "rfe target must be in 1..feature count");
  }
  std::vector<bool> mask(FeatureVector::kCount, true);
  int active = FeatureVector::kCount;
  int iteration = 0;
  while (active > target_k) {
    const std::vector<double> importance =
        kind == LearnerKind::classifier
            ? classifier_importance(samples, mask, config)
            : regressor_importance(samples, mask, config, iteration);
    // Drop the weakest surviving feature; ties drop the higher index.
    int weakest = -1;
    for (int f = 0; f < FeatureVector::kCount; ++f) {
      if (!mask[static_cast<std::size_t>(f)]) continue;
      if (weakest < 0 ||
          importance[static_cast<std::size_t>(f)] <=
              importance[static_cast<std::size_t>(weakest)]) {
        weakest = f;
      }
    }
    mask[static_cast<std::size_t>(weakest)] = false;
    --active;
    ++iteration;
  }
  return mask;
}

}  // namespace ladder
