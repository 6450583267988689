#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ladder/io.hpp"
#include "test_helpers.hpp"

using namespace ladder;
using namespace ladder::testing;

TEST_CASE("rq csv round-trip and surface grouping") {
  std::vector<RqRow> rows;
  const ResolutionSet set = four_resolutions();
  for (const Resolution& res : set.list()) {
    for (int k = 0; k < 4; ++k) {
      rows.push_back(RqRow{"chunkA", res.width, res.height,
                           std::exp2(8.0 + res.index + 0.7 * k),
                           25.0 + 3.0 * res.index + 2.0 * k});
    }
  }
  std::ostringstream out;
  write_rq_csv(out, rows);
  std::istringstream in(out.str());
  const std::vector<RqRow> back = read_rq_csv(in);
  REQUIRE(back.size() == rows.size());
  CHECK(back[0].chunk_id == "chunkA");
  CHECK(back[3].bitrate_bps == doctest::Approx(rows[3].bitrate_bps).epsilon(1e-12));

  const auto surfaces = surfaces_from_rows(back, set);
  REQUIRE(surfaces.count("chunkA") == 1);
  surfaces.at("chunkA").validate();
}

TEST_CASE("surfaces_from_rows names chunks with missing resolutions") {
  const ResolutionSet set = four_resolutions();
  std::vector<RqRow> rows = {
      RqRow{"bad", 960, 540, 1e5, 30.0},
      RqRow{"bad", 960, 540, 2e5, 32.0},
  };
  try {
    surfaces_from_rows(rows, set);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("bad") != std::string::npos);
    CHECK(what.find("720p") != std::string::npos);
  }
}

TEST_CASE("ladder json round-trip") {
  const BitrateLadder ladder{four_resolutions(), {8.0, 10.5, 12.25}};
  const BitrateLadder back = ladder_from_json(ladder_to_json(ladder));
  CHECK(back.resolutions == ladder.resolutions);
  CHECK(back.crossover_log2_rates == ladder.crossover_log2_rates);
}

TEST_CASE("feature csv round-trip preserves doubles") {
  std::vector<FeatureRow> rows;
  FeatureVector fv;
  fv.glcm_contrast = 12.3456789012345;
  fv.glcm_correlation = -0.123456789;
  fv.glcm_energy = 0.25;
  fv.glcm_homogeneity = 0.5;
  fv.glcm_entropy = 1.75;
  fv.tc_mean = 3.25;
  fv.tc_std = 0.5;
  fv.si = 55.5;
  fv.ti = 20.25;
  rows.push_back(FeatureRow{"c1", fv});
  std::ostringstream out;
  write_feature_csv(out, rows);
  std::istringstream in(out.str());
  const auto back = read_feature_csv(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0].chunk_id == "c1");
  CHECK(back[0].features.to_array() == fv.to_array());
}

TEST_CASE("classifier model json round-trip preserves predictions") {
  const BitrateGrid grid(6.0, 16.0, 30);
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 8; ++i) {
    FeatureVector fv;
    fv.glcm_contrast = 1.0 + i;
    fv.glcm_correlation = 0.5;
    fv.glcm_energy = 0.4;
    fv.glcm_homogeneity = 0.6;
    fv.glcm_entropy = 1.0;
    fv.tc_mean = 2.0;
    fv.tc_std = 0.5;
    fv.si = 40.0;
    fv.ti = 10.0;
    const double c = 7.0 + 0.8 * i;
    samples.push_back(TrainingSample{
        "s" + std::to_string(i), fv,
        BitrateLadder{four_resolutions(), {c, c + 1.5, c + 3.0}}});
  }
  const ClassifierModel model =
      train_classifier(samples, grid, GbtHyper{20, 3, 0.1, 3});
  const ClassifierModel back = classifier_from_json(classifier_to_json(model));

  for (const TrainingSample& s : samples) {
    for (int t = 0; t < grid.count(); t += 7) {
      CHECK(predict_class(back, s.features, grid.point(t)) ==
            predict_class(model, s.features, grid.point(t)));
    }
  }
  // Serialization is stable through a second round-trip.
  CHECK(classifier_to_json(back) == classifier_to_json(model));
}

TEST_CASE("regressor model json round-trip preserves predictions") {
  const BitrateGrid grid(6.0, 16.0, 30);
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 6; ++i) {
    FeatureVector fv;
    fv.glcm_contrast = 1.0 + 2.0 * i;
    fv.glcm_correlation = 0.4;
    fv.glcm_energy = 0.3;
    fv.glcm_homogeneity = 0.7;
    fv.glcm_entropy = 1.2;
    fv.tc_mean = 2.5;
    fv.tc_std = 0.4;
    fv.si = 35.0;
    fv.ti = 12.0;
    const double c = 7.5 + 0.6 * i;
    samples.push_back(TrainingSample{
        "s" + std::to_string(i), fv,
        BitrateLadder{four_resolutions(), {c, c + 1.0, c + 2.5}}});
  }
  const RegressorModel model = train_regressor(samples, grid, GpHyper{});
  const RegressorModel back = regressor_from_json(regressor_to_json(model));
  for (const TrainingSample& s : samples) {
    for (int b = 1; b <= 3; ++b) {
      CHECK(predict_crossover(back, s.features, b) ==
            doctest::Approx(predict_crossover(model, s.features, b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("model files reject wrong kinds and versions") {
  CHECK_THROWS_WITH_AS(classifier_from_json("{\"version\":2,\"kind\":\"classifier\"}"),
                       doctest::Contains("VersionMismatch"), Error);
  CHECK_THROWS_WITH_AS(
      classifier_from_json("{\"version\":1,\"kind\":\"regressor\",\"payload\":{}}"),
      doctest::Contains("VersionMismatch"), Error);
}

TEST_CASE("config defaults and overrides") {
  const AppConfig defaults = config_from_json("{\"version\":1}");
  CHECK(defaults.resolutions.size() == 4);
  CHECK(defaults.resolutions.at(1).label == "540p");
  CHECK(defaults.resolutions.at(4).height == 2160);
  CHECK(defaults.grid_points == 100);
  CHECK(defaults.gbt.rounds == 100);
  CHECK(defaults.gbt.max_depth == 3);
  CHECK(defaults.gbt.learning_rate == 0.1);
  CHECK(defaults.glcm.gray_levels == 8);
  CHECK(defaults.rfe_target_k == 6);

  const AppConfig custom = config_from_json(R"({
    "version": 1,
    "grid": {"min_bps": 32.0, "max_bps": 65536.0, "points": 50},
    "gbt": {"rounds": 10},
    "seed": 123
  })");
  CHECK(custom.grid_points == 50);
  CHECK(custom.grid().min_log2() == doctest::Approx(5.0));
  CHECK(custom.grid().max_log2() == doctest::Approx(16.0));
  CHECK(custom.gbt.rounds == 10);
  CHECK(custom.seed == 123);
  CHECK(custom.gbt.max_depth == 3);  // untouched default
}

TEST_CASE("synthetic params json") {
  const SyntheticParams params = synthetic_params_from_json(R"({
    "ceiling_db": [38, 42, 46, 50],
    "steepness": [1.2, 1.0, 0.8, 0.6],
    "onset_log2": [5, 6, 7, 8]
  })");
  CHECK(params.ceiling_db.size() == 4);
  params.validate(4);
}

TEST_CASE("aggregation report json carries the trace") {
  const BitrateGrid grid(5.0, 14.0, 10);
  const RateQualitySurface surface =
      synthetic_surface(default_synthetic_params(), grid);
  auto backend = make_table_backend(surface);
  const BitrateLadder cl{four_resolutions(),
                         {grid.point(3), grid.point(6), grid.point(8)}};
  const BitrateLadder rg{four_resolutions(),
                         {grid.point(4), grid.point(6), grid.point(8)}};
  const AggregationReport report =
      aggregate(cl, rg, *backend, AggregatorConfig{true, grid});
  const std::string json_text = aggregation_report_to_json(report);
  CHECK(json_text.find("\"total_encodes\": 2") != std::string::npos);
  CHECK(json_text.find("\"points\"") != std::string::npos);
}
