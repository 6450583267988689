#include <doctest.h>

#include <cmath>
#include <random>

#include "ladder/io.hpp"
#include "ladder/learners.hpp"
#include "test_helpers.hpp"

using namespace ladder;
using namespace ladder::testing;

namespace {

FeatureVector feature_point(double x) {
  FeatureVector fv;
  fv.glcm_contrast = 1.0 + 10.0 * x;
  fv.glcm_correlation = 0.5;
  fv.glcm_energy = 0.4;
  fv.glcm_homogeneity = 0.6;
  fv.glcm_entropy = 1.0;
  fv.tc_mean = 2.0;
  fv.tc_std = 0.5;
  fv.si = 40.0;
  fv.ti = 10.0;
  return fv;
}

TrainingSample sample_at(const std::string& id, double x,
                         std::vector<double> crossovers) {
  return TrainingSample{id, feature_point(x),
                        BitrateLadder{four_resolutions(), std::move(crossovers)}};
}

std::vector<TrainingSample> two_cluster_samples() {
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 8; ++i) {
    const double eps = 0.01 * i;
    samples.push_back(sample_at("a" + std::to_string(i), 0.0 + eps,
                                {8.0, 8.5, 9.0}));
    samples.push_back(sample_at("b" + std::to_string(i), 1.0 + eps,
                                {12.0, 13.0, 14.0}));
  }
  return samples;
}

}  // namespace

TEST_CASE("train_classifier rejects single-class ladders") {
  const BitrateGrid grid(6.0, 16.0, 20);
  // Every grid rate falls into class 2 for these boundaries.
  std::vector<TrainingSample> samples = {
      sample_at("a", 0.0, {5.0, 17.0, 18.0}),
      sample_at("b", 1.0, {5.0, 17.0, 18.0}),
  };
  CHECK_THROWS_WITH_AS(train_classifier(samples, grid, GbtHyper{}),
                       doctest::Contains("DegenerateLabels"), Error);
}

TEST_CASE("classifier separates two feature clusters") {
  const BitrateGrid grid(6.0, 16.0, 50);
  const std::vector<TrainingSample> samples = two_cluster_samples();
  const ClassifierModel model = train_classifier(samples, grid, GbtHyper{});

  int correct = 0, total = 0;
  for (const TrainingSample& s : samples) {
    for (int t = 0; t < grid.count(); ++t) {
      const int expected = ladder_lookup(s.gt_ladder, grid.point(t));
      if (predict_class(model, s.features, grid.point(t)) == expected) ++correct;
      ++total;
    }
  }
  CHECK(static_cast<double>(correct) / total >= 0.99);
}

TEST_CASE("classifier retraining produces identical model bytes") {
  const BitrateGrid grid(6.0, 16.0, 30);
  const std::vector<TrainingSample> samples = two_cluster_samples();
  const GbtHyper hyper{30, 3, 0.1, 5};
  const std::string a = classifier_to_json(train_classifier(samples, grid, hyper));
  const std::string b = classifier_to_json(train_classifier(samples, grid, hyper));
  CHECK(a == b);
}

TEST_CASE("classifier_ladder equals the repaired sweep of predict_class") {
  const BitrateGrid grid(6.0, 16.0, 40);
  const std::vector<TrainingSample> samples = two_cluster_samples();
  const ClassifierModel model = train_classifier(samples, grid, GbtHyper{});

  const FeatureVector probe = feature_point(0.4);
  std::vector<int> sweep;
  for (int t = 0; t < grid.count(); ++t) {
    sweep.push_back(predict_class(model, probe, grid.point(t)));
  }
  const BitrateLadder repaired =
      ladder_from_index_sequence(model.resolutions, grid, sweep);
  const BitrateLadder direct = classifier_ladder(model, probe, grid);
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(direct.crossover_log2_rates[b] == repaired.crossover_log2_rates[b]);
  }
  direct.validate();
}

TEST_CASE("regressor reproduces a constant target from identical samples") {
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 5; ++i) {
    samples.push_back(sample_at("s" + std::to_string(i), 0.5, {9.25, 10.0, 11.5}));
  }
  const BitrateGrid grid(6.0, 16.0, 20);
  const RegressorModel model = train_regressor(samples, grid, GpHyper{});
  for (int b = 1; b <= 3; ++b) {
    const double target = samples[0].gt_ladder.crossover_log2_rates[
        static_cast<std::size_t>(b) - 1];
    CHECK(std::abs(predict_crossover(model, samples[0].features, b) - target) < 1e-6);
  }
}

TEST_CASE("regressor interpolates smooth targets at the noise floor") {
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 12; ++i) {
    const double x = i / 11.0;
    const double base = 8.0 + 2.0 * std::sin(1.7 * x) + x;
    samples.push_back(sample_at("s" + std::to_string(i), x,
                                {base, base + 1.0, base + 2.0}));
  }
  GpHyper hyper;
  hyper.noise_variance = GpGridAxis{1e-6, 1e-6, 1};
  const BitrateGrid grid(6.0, 16.0, 20);
  const RegressorModel model = train_regressor(samples, grid, hyper);
  for (const TrainingSample& s : samples) {
    for (int b = 1; b <= 3; ++b) {
      const double target =
          s.gt_ladder.crossover_log2_rates[static_cast<std::size_t>(b) - 1];
      CHECK(std::abs(predict_crossover(model, s.features, b) - target) < 1e-3);
    }
  }
}

TEST_CASE("predict_crossover rejects bad boundary indices") {
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 4; ++i) {
    samples.push_back(sample_at("s" + std::to_string(i), i * 0.3, {8.0, 10.0, 12.0}));
  }
  const RegressorModel model =
      train_regressor(samples, BitrateGrid(6.0, 16.0, 10), GpHyper{});
  CHECK_THROWS_WITH_AS(predict_crossover(model, samples[0].features, 0),
                       doctest::Contains("BadBoundaryIndex"), Error);
  CHECK_THROWS_WITH_AS(predict_crossover(model, samples[0].features, 4),
                       doctest::Contains("BadBoundaryIndex"), Error);
}

TEST_CASE("regressor_ladder sorts inverted predictions and clamps to the grid") {
  // Hand-built GPs with no training rows predict their target means.
  RegressorModel model{four_resolutions(),
                       std::vector<bool>(FeatureVector::kCount, true),
                       Standardizer{std::vector<double>(FeatureVector::kCount, 0.0),
                                    std::vector<double>(FeatureVector::kCount, 1.0)},
                       BitrateGrid(6.0, 16.0, 10),
                       {}};
  for (const double mean : {10.0, 8.0, 99.0}) {
    model.gps.push_back(GpRegressor::assemble(Eigen::MatrixXd(0, FeatureVector::kCount),
                                              Eigen::VectorXd(0), GpKernelParams{},
                                              mean));
  }
  const BitrateLadder ladder = regressor_ladder(model, feature_point(0.0));
  CHECK(ladder.crossover_log2_rates[0] == 8.0);
  CHECK(ladder.crossover_log2_rates[1] == 10.0);
  CHECK(ladder.crossover_log2_rates[2] == 16.0);  // clamped to the grid maximum
}

TEST_CASE("rfe keeps everything when target is the full feature count") {
  const std::vector<TrainingSample> samples = two_cluster_samples();
  const RfeConfig config{BitrateGrid(6.0, 16.0, 20), GbtHyper{10, 2, 0.2, 2},
                         GpHyper{}, 7};
  const std::vector<bool> mask =
      rfe_select(samples, LearnerKind::classifier, FeatureVector::kCount, config);
  for (bool b : mask) CHECK(b);
}

TEST_CASE("rfe finds the planted signal feature for both learners") {
  // Only glcm_contrast (feature 0) varies and drives the boundaries.
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 10; ++i) {
    const double x = i / 9.0;
    samples.push_back(sample_at("s" + std::to_string(i), x,
                                {7.0 + 4.0 * x, 9.0 + 4.0 * x, 11.0 + 4.0 * x}));
  }
  const RfeConfig config{BitrateGrid(6.0, 16.0, 25), GbtHyper{20, 2, 0.2, 5},
                         GpHyper{}, 3};
  const std::vector<bool> cl_mask =
      rfe_select(samples, LearnerKind::classifier, 1, config);
  CHECK(cl_mask[0]);
  for (std::size_t f = 1; f < cl_mask.size(); ++f) CHECK(!cl_mask[f]);

  const std::vector<bool> rg_mask =
      rfe_select(samples, LearnerKind::regressor, 1, config);
  CHECK(rg_mask[0]);
  for (std::size_t f = 1; f < rg_mask.size(); ++f) CHECK(!rg_mask[f]);
}

TEST_CASE("rfe selections are nested") {
  std::mt19937_64 rng(131);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 10; ++i) {
    const double x = u(rng);
    FeatureVector fv = feature_point(x);
    fv.si = 20.0 + 50.0 * u(rng);
    fv.ti = 5.0 + 20.0 * u(rng);
    fv.tc_mean = 1.0 + 3.0 * x + u(rng);
    samples.push_back(TrainingSample{
        "s" + std::to_string(i), fv,
        BitrateLadder{four_resolutions(), {7.0 + 3.0 * x, 9.0 + 3.0 * x, 11.0 + 3.0 * x}}});
  }
  const RfeConfig config{BitrateGrid(6.0, 16.0, 20), GbtHyper{10, 2, 0.2, 3},
                         GpHyper{}, 11};
  const std::vector<bool> k4 = rfe_select(samples, LearnerKind::regressor, 4, config);
  const std::vector<bool> k3 = rfe_select(samples, LearnerKind::regressor, 3, config);
  for (std::size_t f = 0; f < k3.size(); ++f) {
    if (k3[f]) CHECK(k4[f]);  // smaller selection is a subset of the larger
  }
}

TEST_CASE("standardizer normalizes the training rows") {
  std::mt19937_64 rng(137);
  std::uniform_real_distribution<double> u(-3.0, 9.0);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 200; ++i) {
    rows.push_back({u(rng), 100.0 + 20.0 * u(rng), 1e-3 * u(rng)});
  }
  const Standardizer st = Standardizer::fit(rows);
  std::vector<double> mean(3, 0.0), var(3, 0.0);
  for (const auto& row : rows) {
    const std::vector<double> z = st.apply(row);
    for (std::size_t d = 0; d < 3; ++d) mean[d] += z[d];
  }
  for (double& m : mean) m /= static_cast<double>(rows.size());
  for (const auto& row : rows) {
    const std::vector<double> z = st.apply(row);
    for (std::size_t d = 0; d < 3; ++d) var[d] += (z[d] - mean[d]) * (z[d] - mean[d]);
  }
  for (std::size_t d = 0; d < 3; ++d) {
    CHECK(std::abs(mean[d]) < 1e-9);
    CHECK(std::abs(var[d] / static_cast<double>(rows.size()) - 1.0) < 1e-6);
  }
}
