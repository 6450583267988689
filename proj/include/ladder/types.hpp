#ifndef LADDER_TYPES_HPP
#define LADDER_TYPES_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ladder/error.hpp"

namespace ladder {

// One encoding resolution. `index` is its 1-based position in the owning
// ResolutionSet, ascending with height.
struct Resolution {
  int index = 0;
  int width = 0;
  int height = 0;
  std::string label;

  friend bool operator==(const Resolution& a, const Resolution& b) {
    return a.index == b.index && a.width == b.width && a.height == b.height &&
           a.label == b.label;
  }
};

// Ordered set of resolutions, strictly ascending in height, indices 1..|S|.
class ResolutionSet {
 public:
  ResolutionSet() = default;

  // Takes width/height/label triples in ascending-height order and assigns
  // contiguous 1-based indices.
  static ResolutionSet from_list(
      const std::vector<std::tuple<int, int, std::string>>& entries);

  // Validating constructor for already-indexed resolutions.
  explicit ResolutionSet(std::vector<Resolution> resolutions);

  std::size_t size() const { return resolutions_.size(); }
  const Resolution& at(int index_1based) const;
  const std::vector<Resolution>& list() const { return resolutions_; }

  // Looks a resolution up by frame dimensions; returns 0 when absent.
  int index_of(int width, int height) const;

  friend bool operator==(const ResolutionSet& a, const ResolutionSet& b) {
    return a.resolutions_ == b.resolutions_;
  }

 private:
  std::vector<Resolution> resolutions_;
};

// One measured rate-quality operating point. Rates live in log2(bits/sec)
// everywhere inside the library; linear bps appears only at I/O boundaries.
struct RQPoint {
  double log2_rate = 0.0;
  double quality = 0.0;  // scaled PSNR, dB
};

// Per-resolution rate-quality curve: points strictly ascending in log2_rate
// with non-decreasing quality (Pareto-pruned at construction).
struct RQCurve {
  Resolution resolution;
  std::vector<RQPoint> points;

  double min_log2_rate() const { return points.front().log2_rate; }
  double max_log2_rate() const { return points.back().log2_rate; }
};

// All rate-quality curves of one chunk, exactly one per resolution.
struct RateQualitySurface {
  ResolutionSet resolutions;
  std::vector<RQCurve> curves;  // curves[i] belongs to resolutions index i+1

  void validate() const;
};

// The rate -> resolution map: |S|-1 non-decreasing cross-over log2 rates.
// crossover_log2_rates[i-1] is the largest rate served by resolution index i.
struct BitrateLadder {
  ResolutionSet resolutions;
  std::vector<double> crossover_log2_rates;

  void validate() const;
};

// Log-spaced evaluation grid over [min_log2, max_log2] (linear in log2).
class BitrateGrid {
 public:
  BitrateGrid(double min_log2, double max_log2, int count);

  static BitrateGrid from_bps(double min_bps, double max_bps, int count) {
    return BitrateGrid(std::log2(min_bps), std::log2(max_bps), count);
  }

  double min_log2() const { return min_log2_; }
  double max_log2() const { return max_log2_; }
  int count() const { return count_; }
  double step() const { return (max_log2_ - min_log2_) / (count_ - 1); }

  double point(int i) const {
    if (i == count_ - 1) return max_log2_;
    return min_log2_ + i * step();
  }

  std::vector<double> points() const;

 private:
  double min_log2_;
  double max_log2_;
  int count_;
};

}  // namespace ladder

#endif  // LADDER_TYPES_HPP
