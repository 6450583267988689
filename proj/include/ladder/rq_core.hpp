#ifndef LADDER_RQ_CORE_HPP
#define LADDER_RQ_CORE_HPP

#include <vector>

#include "ladder/pchip.hpp"
#include "ladder/types.hpp"

namespace ladder {

struct HullPoint {
  double quality = 0.0;
  int resolution_index = 0;  // 1-based
};

// Sorts raw measurements by rate, collapses duplicate rates (keeping the best
// quality) and prunes quality inversions so the curve is non-decreasing.
RQCurve build_curve(const Resolution& resolution, std::vector<RQPoint> raw_points);

// Continuous view of one curve: monotone cubic between knots, flat outside.
double interp_quality(const RQCurve& curve, double log2_rate);

// Precomputed interpolants for one surface; cheap repeated hull queries.
class SurfaceInterpolator {
 public:
  explicit SurfaceInterpolator(const RateQualitySurface& surface);

  // Interpolated quality of one resolution (1-based index).
  double quality(int resolution_index, double log2_rate) const;

  // Highest quality over the resolutions whose sampled range has begun at
  // this rate; ties go to the lower resolution index. A curve is a candidate
  // only from its first measured rate upward -- below that the measurements
  // say nothing, and treating the flat extension as achievable quality would
  // let an unmeasured high resolution shadow the measured low ones.
  HullPoint hull(double log2_rate) const;

  std::size_t resolution_count() const { return interpolants_.size(); }

 private:
  std::vector<Pchip> interpolants_;
  std::vector<double> first_knots_;
};

HullPoint hull_quality(const RateQualitySurface& surface, double log2_rate);

// Largest grid rate at which each resolution is still optimal. Resolutions
// the hull never selects collapse onto the previous boundary (grid minimum
// for the first).
BitrateLadder cross_over_bitrates(const RateQualitySurface& surface,
                                  const BitrateGrid& grid);

// Smallest index i with log2_rate <= crossover[i], else |S|. The boundary
// itself belongs to the lower resolution.
int ladder_lookup(const BitrateLadder& ladder, double log2_rate);

// Turns a per-grid-point resolution index sequence into a valid ladder:
// boundary i sits at the last grid rate where the sequence is <= i. This is
// the shared isotonic repair used for hull argmax sequences, classifier
// sweeps and aggregator outputs alike.
BitrateLadder ladder_from_index_sequence(const ResolutionSet& resolutions,
                                         const BitrateGrid& grid,
                                         const std::vector<int>& indices);

// Per-boundary arithmetic mean in the log2 domain (the static ladder).
BitrateLadder average_ladder(const std::vector<BitrateLadder>& ladders);

}  // namespace ladder

#endif  // LADDER_RQ_CORE_HPP
