#include "ladder/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ladder/pchip.hpp"

namespace ladder {

namespace {

// Strictly-monotone (quality, log2 rate) frontier of a point set, the curve
// BD integration runs over.
std::pair<std::vector<double>, std::vector<double>> rd_frontier(
    std::vector<RQPoint> points) {
  if (points.size() < 2) {
    throw Error(Errc::too_few_points, "bd-br needs at least two points per curve");
  }
  for (const RQPoint& p : points) {
    if (!std::isfinite(p.log2_rate) || !std::isfinite(p.quality)) {
      throw Error(Errc::non_finite, "bd-br point is not finite");
    }
  }
  std::sort(points.begin(), points.end(), [](const RQPoint& a, const RQPoint& b) {
    if (a.log2_rate != b.log2_rate) return a.log2_rate < b.log2_rate;
    return a.quality < b.quality;
  });
  std::vector<double> quality, rate;
  for (const RQPoint& p : points) {
    if (!quality.empty() && p.quality <= quality.back()) continue;
    if (!rate.empty() && p.log2_rate == rate.back()) {
      quality.back() = p.quality;  // same rate, better quality
      continue;
    }
    quality.push_back(p.quality);
    rate.push_back(p.log2_rate);
  }
  if (quality.size() < 2) {
    throw Error(Errc::too_few_points,
                "fewer than two points survive the rd frontier prune");
  }
  return {std::move(quality), std::move(rate)};
}

}  // namespace

BdBrResult bd_br(const std::vector<RQPoint>& reference_points,
                 const std::vector<RQPoint>& test_points) {
  auto [ref_q, ref_r] = rd_frontier(reference_points);
  auto [test_q, test_r] = rd_frontier(test_points);

  BdBrResult result;
  result.overlap_low = std::max(ref_q.front(), test_q.front());
  result.overlap_high = std::min(ref_q.back(), test_q.back());
  if (!(result.overlap_low < result.overlap_high)) {
    throw Error(Errc::no_overlap, "quality ranges of the two curves do not overlap");
  }

  const Pchip ref_fit(std::move(ref_q), std::move(ref_r));
  const Pchip test_fit(std::move(test_q), std::move(test_r));
  const double span = result.overlap_high - result.overlap_low;
  const double avg_log2_diff =
      (test_fit.integrate(result.overlap_low, result.overlap_high) -
       ref_fit.integrate(result.overlap_low, result.overlap_high)) /
      span;
  result.percent = (std::exp2(avg_log2_diff) - 1.0) * 100.0;
  return result;
}

std::vector<RQPoint> ladder_rq_points(const BitrateLadder& ladder,
                                      EncoderBackend& backend,
                                      const BitrateGrid& grid) {
  std::vector<RQPoint> points;
  points.reserve(static_cast<std::size_t>(grid.count()));
  for (int t = 0; t < grid.count(); ++t) {
    const double rate = grid.point(t);
    const int index = ladder_lookup(ladder, rate);
    points.push_back(RQPoint{rate, backend.quality(rate, index)});
  }
  return points;
}

double ladder_accuracy(const BitrateLadder& predicted, const BitrateLadder& gt,
                       const BitrateGrid& grid) {
  if (!(predicted.resolutions == gt.resolutions)) {
    throw Error(Errc::mixed_resolution_sets,
                "accuracy needs ladders over the same resolution set");
  }
  int agreed = 0;
  for (int t = 0; t < grid.count(); ++t) {
    if (ladder_lookup(predicted, grid.point(t)) ==
        ladder_lookup(gt, grid.point(t))) {
      ++agreed;
    }
  }
  return static_cast<double>(agreed) / grid.count();
}

SyntheticParams SyntheticDatasetSpec::params_for(double latent) const {
  SyntheticParams params;
  const std::size_t count = ceiling_base.size();
  params.ceiling_db.reserve(count);
  params.steepness.reserve(count);
  params.onset_log2.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    params.ceiling_db.push_back(ceiling_base[i] + ceiling_slope * latent);
    params.steepness.push_back(steepness_base[i]);
    params.onset_log2.push_back(onset_base[i] + onset_slope * latent);
  }
  return params;
}

void SyntheticDatasetSpec::validate() const {
  if (sequence_count < 1) {
    throw Error(Errc::bad_params, "synthetic dataset needs at least one sequence");
  }
  if (!(latent_min <= latent_max) || noise_level < 0.0) {
    throw Error(Errc::bad_params, "bad latent range or noise level");
  }
  if (ceiling_base.size() != resolutions.size() ||
      steepness_base.size() != resolutions.size() ||
      onset_base.size() != resolutions.size()) {
    throw Error(Errc::bad_params, "synthetic parameter maps must match |S|");
  }
  // The maps must stay valid across the whole latent range, noise included.
  for (const double latent : {latent_min, latent_max}) {
    params_for(latent).validate(resolutions.size());
    for (const double direction : {-1.0, 1.0}) {
      std::array<double, FeatureVector::kCount> values;
      for (std::size_t f = 0; f < FeatureVector::kCount; ++f) {
        values[f] = feature_base[f] + feature_slope[f] * latent +
                    feature_noise_amp[f] * noise_level * direction;
      }
      FeatureVector::from_array(values).validate();
    }
  }
}

SyntheticDatasetSpec default_synthetic_spec() {
  SyntheticDatasetSpec spec;
  spec.resolutions = ResolutionSet::from_list({{960, 540, "540p"},
                                               {1280, 720, "720p"},
                                               {1920, 1080, "1080p"},
                                               {3840, 2160, "2160p"}});
  return spec;
}

std::vector<SyntheticSequence> generate_synthetic_dataset(
    const SyntheticDatasetSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> latent_dist(spec.latent_min, spec.latent_max);
  std::uniform_real_distribution<double> noise_dist(-1.0, 1.0);

  std::vector<SyntheticSequence> dataset;
  dataset.reserve(static_cast<std::size_t>(spec.sequence_count));
  for (int s = 0; s < spec.sequence_count; ++s) {
    const double latent =
        spec.latent_min == spec.latent_max ? spec.latent_min : latent_dist(rng);

    std::array<double, FeatureVector::kCount> values;
    for (std::size_t f = 0; f < FeatureVector::kCount; ++f) {
      values[f] = spec.feature_base[f] + spec.feature_slope[f] * latent +
                  spec.feature_noise_amp[f] * spec.noise_level * noise_dist(rng);
    }

    SyntheticSequence seq;
    seq.chunk_id = "syn" + std::to_string(1000 + s).substr(1);
    seq.features = FeatureVector::from_array(values);
    seq.features.validate();

    const SyntheticParams params = spec.params_for(latent);
    auto backend = make_synthetic_backend(spec.resolutions, params);
    seq.surface.resolutions = spec.resolutions;
    for (int i = 1; i <= static_cast<int>(spec.resolutions.size()); ++i) {
      std::vector<RQPoint> points;
      points.reserve(static_cast<std::size_t>(spec.grid.count()));
      for (int t = 0; t < spec.grid.count(); ++t) {
        const double rate = spec.grid.point(t);
        points.push_back(RQPoint{rate, backend->quality(rate, i)});
      }
      seq.surface.curves.push_back(build_curve(spec.resolutions.at(i), points));
    }
    seq.gt_ladder = cross_over_bitrates(seq.surface, spec.grid);
    dataset.push_back(std::move(seq));
  }
  return dataset;
}

namespace {

CvMetrics mean_metrics(const std::vector<CvMetrics>& items) {
  CvMetrics mean;
  for (const CvMetrics& m : items) {
    mean.accuracy += m.accuracy;
    mean.bdbr_vs_gt += m.bdbr_vs_gt;
    mean.bdbr_vs_static += m.bdbr_vs_static;
    mean.encodes += m.encodes;
  }
  const double n = static_cast<double>(items.size());
  mean.accuracy /= n;
  mean.bdbr_vs_gt /= n;
  mean.bdbr_vs_static /= n;
  mean.encodes /= n;
  return mean;
}

}  // namespace

CvReport cross_validate(const std::vector<SyntheticSequence>& dataset,
                        const CvConfig& config) {
  const int n = static_cast<int>(dataset.size());
  if (n < config.folds || config.folds < 2) {
    throw Error(Errc::dataset_too_small,
                "dataset must have at least as many sequences as folds");
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])] =
        p % config.folds;
  }

  CvReport report;
  report.methods = {"classifier", "regressor", "ensemble_fast", "ensemble_full"};
  report.per_fold.assign(static_cast<std::size_t>(config.folds), {});
  report.fold_chunks.assign(static_cast<std::size_t>(config.folds), {});
  std::vector<std::vector<CvSequenceResult>> fold_rows(
      static_cast<std::size_t>(config.folds));

  for (int i = 0; i < n; ++i) {
    report.fold_chunks[static_cast<std::size_t>(fold_of[static_cast<std::size_t>(i)])]
        .push_back(dataset[static_cast<std::size_t>(i)].chunk_id);
  }

  bool failed = false;
  Errc failure_code = Errc::bad_params;
  std::string failure;
#pragma omp parallel for schedule(dynamic)
  for (int fold = 0; fold < config.folds; ++fold) {
   try {
    std::vector<TrainingSample> train;
    std::vector<int> test_idx;
    for (int i = 0; i < n; ++i) {
      const SyntheticSequence& seq = dataset[static_cast<std::size_t>(i)];
      if (fold_of[static_cast<std::size_t>(i)] == fold) {
        test_idx.push_back(i);
      } else {
        train.push_back(TrainingSample{seq.chunk_id, seq.features, seq.gt_ladder});
      }
    }

    const RfeConfig rfe{config.grid, config.gbt, config.gp, config.seed};
    const std::vector<bool> mask_cl =
        rfe_select(train, LearnerKind::classifier, config.rfe_target_k, rfe);
    const std::vector<bool> mask_rg =
        rfe_select(train, LearnerKind::regressor, config.rfe_target_k, rfe);
    const ClassifierModel classifier =
        train_classifier(train, config.grid, config.gbt, mask_cl);
    const RegressorModel regressor =
        train_regressor(train, config.grid, config.gp, mask_rg);

    std::vector<BitrateLadder> train_ladders;
    train_ladders.reserve(train.size());
    for (const TrainingSample& s : train) train_ladders.push_back(s.gt_ladder);
    const BitrateLadder static_ladder = average_ladder(train_ladders);

    std::vector<std::vector<CvMetrics>> per_method(report.methods.size());
    std::vector<CvSequenceResult> rows;
    for (const int i : test_idx) {
      const SyntheticSequence& seq = dataset[static_cast<std::size_t>(i)];
      auto backend = make_table_backend(seq.surface);

      const BitrateLadder cl = classifier_ladder(classifier, seq.features, config.grid);
      const BitrateLadder rg = regressor_ladder(regressor, seq.features);
      const AggregationReport fast =
          aggregate(cl, rg, *backend, AggregatorConfig{true, config.grid});
      const AggregationReport full =
          aggregate(cl, rg, *backend, AggregatorConfig{false, config.grid});

      const std::vector<RQPoint> gt_points =
          ladder_rq_points(seq.gt_ladder, *backend, config.grid);
      const std::vector<RQPoint> static_points =
          ladder_rq_points(static_ladder, *backend, config.grid);

      const BitrateLadder* ladders[4] = {&cl, &rg, &fast.final_ladder,
                                         &full.final_ladder};
      const std::uint64_t encode_counts[4] = {0, 0, fast.total_encodes,
                                              full.total_encodes};
      const std::uint64_t disagreement_counts[4] = {0, 0, fast.disagreements,
                                                    full.disagreements};
      for (std::size_t m = 0; m < report.methods.size(); ++m) {
        const std::vector<RQPoint> method_points =
            ladder_rq_points(*ladders[m], *backend, config.grid);
        CvSequenceResult row;
        row.chunk_id = seq.chunk_id;
        row.fold = fold;
        row.method = report.methods[m];
        row.accuracy = ladder_accuracy(*ladders[m], seq.gt_ladder, config.grid);
        row.bdbr_vs_gt = bd_br(gt_points, method_points).percent;
        row.bdbr_vs_static = bd_br(static_points, method_points).percent;
        row.encodes = encode_counts[m];
        row.disagreements = disagreement_counts[m];
        rows.push_back(row);
        per_method[m].push_back(CvMetrics{row.accuracy, row.bdbr_vs_gt,
                                          row.bdbr_vs_static,
                                          static_cast<double>(row.encodes)});
      }
    }

    std::vector<CvMetrics> fold_metrics;
    fold_metrics.reserve(report.methods.size());
    for (const auto& items : per_method) fold_metrics.push_back(mean_metrics(items));
    report.per_fold[static_cast<std::size_t>(fold)] = std::move(fold_metrics);
    fold_rows[static_cast<std::size_t>(fold)] = std::move(rows);
   } catch (const Error& e) {
#pragma omp critical
    {
      failed = true;
      failure_code = e.code();
      failure = e.what();
    }
   } catch (const std::exception& e) {
#pragma omp critical
    {
      failed = true;
      failure = e.what();
    }
   }
  }
  if (failed) throw Error(failure_code, failure);

  for (const auto& rows : fold_rows) {
    for (const CvSequenceResult& row : rows) {
      if (row.method == "ensemble_fast") report.total_disagreements += row.disagreements;
      report.per_sequence.push_back(row);
    }
  }

  report.averaged.assign(report.methods.size(), CvMetrics{});
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    std::vector<CvMetrics> column;
    column.reserve(report.per_fold.size());
    for (const auto& fold_metrics : report.per_fold) column.push_back(fold_metrics[m]);
    report.averaged[m] = mean_metrics(column);
  }
  return report;
}

}  // namespace ladder
