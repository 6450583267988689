#include "ladder/rq_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ladder {

namespace {

Pchip make_interpolant(const RQCurve& curve) {
  std::vector<double> xs, ys;
  xs.reserve(curve.points.size());
  ys.reserve(curve.points.size());
  for (const RQPoint& p : curve.points) {
    xs.push_back(p.log2_rate);
    ys.push_back(p.quality);
  }
  return Pchip(std::move(xs), std::move(ys));
}

}  // namespace

RQCurve build_curve(const Resolution& resolution, std::vector<RQPoint> raw_points) {
  if (raw_points.size() < 2) {
    throw Error(Errc::too_few_points, "curve needs at least two measurements");
  }
  for (const RQPoint& p : raw_points) {
    if (!std::isfinite(p.log2_rate) || !std::isfinite(p.quality)) {
      throw Error(Errc::non_finite, "rate-quality point is not finite");
    }
  }
  std::sort(raw_points.begin(), raw_points.end(),
            [](const RQPoint& a, const RQPoint& b) {
              if (a.log2_rate != b.log2_rate) return a.log2_rate < b.log2_rate;
              return a.quality < b.quality;
            });

  // Collapse duplicate rates onto the best quality, then drop every point a
  // cheaper one already dominates.
  std::vector<RQPoint> pruned;
  pruned.reserve(raw_points.size());
  for (const RQPoint& p : raw_points) {
    if (!pruned.empty() && pruned.back().log2_rate == p.log2_rate) {
      pruned.back().quality = p.quality;  // sorted, so p.quality is the max
      continue;
    }
    pruned.push_back(p);
  }
  std::vector<RQPoint> kept;
  kept.reserve(pruned.size());
  double best = -std::numeric_limits<double>::infinity();
  for (const RQPoint& p : pruned) {
    if (p.quality < best) continue;
    best = p.quality;
    kept.push_back(p);
  }
  if (kept.size() < 2) {
    throw Error(Errc::too_few_points, "fewer than two points survive pruning");
  }
  return RQCurve{resolution, std::move(kept)};
}

double interp_quality(const RQCurve& curve, double log2_rate) {
  return make_interpolant(curve).eval(log2_rate);
}

SurfaceInterpolator::SurfaceInterpolator(const RateQualitySurface& surface) {
  surface.validate();
  interpolants_.reserve(surface.curves.size());
  first_knots_.reserve(surface.curves.size());
  for (const RQCurve& curve : surface.curves) {
    interpolants_.push_back(make_interpolant(curve));
    first_knots_.push_back(curve.min_log2_rate());
  }
}

double SurfaceInterpolator::quality(int resolution_index, double log2_rate) const {
  if (resolution_index < 1 ||
      resolution_index > static_cast<int>(interpolants_.size())) {
    throw Error(Errc::bad_params, "resolution index out of range");
  }
  return interpolants_[static_cast<std::size_t>(resolution_index) - 1].eval(log2_rate);
}

HullPoint SurfaceInterpolator::hull(double log2_rate) const {
  HullPoint best{0.0, 0};
  for (std::size_t i = 0; i < interpolants_.size(); ++i) {
    if (first_knots_[i] > log2_rate) continue;
    const double q = interpolants_[i].eval(log2_rate);
    if (best.resolution_index == 0 || q > best.quality) {
      best = HullPoint{q, static_cast<int>(i) + 1};
    }
  }
  if (best.resolution_index == 0) {
    // Rate below every measurement: report the lowest resolution's clamp.
    best = HullPoint{interpolants_[0].eval(log2_rate), 1};
  }
  return best;
}

HullPoint hull_quality(const RateQualitySurface& surface, double log2_rate) {
  return SurfaceInterpolator(surface).hull(log2_rate);
}

BitrateLadder cross_over_bitrates(const RateQualitySurface& surface,
                                  const BitrateGrid& grid) {
  const SurfaceInterpolator interp(surface);
  std::vector<int> indices(static_cast<std::size_t>(grid.count()));
  for (int t = 0; t < grid.count(); ++t) {
    indices[static_cast<std::size_t>(t)] = interp.hull(grid.point(t)).resolution_index;
  }
  return ladder_from_index_sequence(surface.resolutions, grid, indices);
}

int ladder_lookup(const BitrateLadder& ladder, double log2_rate) {
  for (std::size_t i = 0; i < ladder.crossover_log2_rates.size(); ++i) {
    if (log2_rate <= ladder.crossover_log2_rates[i]) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(ladder.resolutions.size());
}

BitrateLadder ladder_from_index_sequence(const ResolutionSet& resolutions,
                                         const BitrateGrid& grid,
                                         const std::vector<int>& indices) {
  if (indices.size() != static_cast<std::size_t>(grid.count())) {
    throw Error(Errc::bad_params, "index sequence length must equal grid size");
  }
  const int class_count = static_cast<int>(resolutions.size());
  std::vector<double> crossovers;
  crossovers.reserve(static_cast<std::size_t>(class_count) - 1);
  for (int i = 1; i < class_count; ++i) {
    double boundary = crossovers.empty() ? grid.min_log2() : crossovers.back();
    for (int t = grid.count() - 1; t >= 0; --t) {
      if (indices[static_cast<std::size_t>(t)] <= i) {
        boundary = std::max(boundary, grid.point(t));
        break;
      }
    }
    crossovers.push_back(boundary);
  }
  BitrateLadder ladder{resolutions, std::move(crossovers)};
  ladder.validate();
  return ladder;
}

BitrateLadder average_ladder(const std::vector<BitrateLadder>& ladders) {
  if (ladders.empty()) {
    throw Error(Errc::bad_params, "average of zero ladders");
  }
  const ResolutionSet& set = ladders.front().resolutions;
  const std::size_t boundaries = set.size() - 1;
  std::vector<double> mean(boundaries, 0.0);
  for (const BitrateLadder& ladder : ladders) {
    if (!(ladder.resolutions == set)) {
      throw Error(Errc::mixed_resolution_sets,
                  "ladders disagree on the resolution set");
    }
    for (std::size_t i = 0; i < boundaries; ++i) {
      mean[i] += ladder.crossover_log2_rates[i];
    }
  }
  for (double& v : mean) v /= static_cast<double>(ladders.size());
  std::sort(mean.begin(), mean.end());
  BitrateLadder out{set, std::move(mean)};
  out.validate();
  return out;
}

}  // namespace ladder
