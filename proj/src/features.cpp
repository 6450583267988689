#include "ladder/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace ladder {

namespace {

struct Offset {
  int dr;
  int dc;
};

Offset direction_offset(int degrees, int distance) {
  switch (degrees) {
    case 0: return {0, distance};
    case 45: return {-distance, distance};
    case 90: return {-distance, 0};
    case 135: return {-distance, -distance};
    default:
      throw Error(Errc::bad_params,
                  "glcm direction must be one of 0/45/90/135 degrees");
  }
}

// Population standard deviation via a two-pass row-partial reduction. Row
// partials are exact functions of their row, so the result does not depend
// on the parallel schedule.
double plane_stddev(const std::vector<double>& values, int rows, int cols) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  std::vector<double> row_sum(static_cast<std::size_t>(rows), 0.0);
#pragma omp parallel for
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = values.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += row[c];
    row_sum[static_cast<std::size_t>(r)] = acc;
  }
  const double mean =
      std::accumulate(row_sum.begin(), row_sum.end(), 0.0) / static_cast<double>(n);

  std::vector<double> row_sq(static_cast<std::size_t>(rows), 0.0);
#pragma omp parallel for
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = values.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) {
      const double d = row[c] - mean;
      acc += d * d;
    }
    row_sq[static_cast<std::size_t>(r)] = acc;
  }
  const double var =
      std::accumulate(row_sq.begin(), row_sq.end(), 0.0) / static_cast<double>(n);
  return std::sqrt(std::max(0.0, var));
}

// Interior Sobel gradient magnitudes of the luma plane.
std::vector<double> sobel_magnitudes(const Frame& frame) {
  const int w = frame.width;
  const int h = frame.height;
  std::vector<double> mags(static_cast<std::size_t>(w - 2) * (h - 2));
#pragma omp parallel for
  for (int r = 1; r < h - 1; ++r) {
    for (int c = 1; c < w - 1; ++c) {
      const auto p = [&](int dr, int dc) {
        return static_cast<double>(frame.y(r + dr, c + dc));
      };
      const double gx = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) -
                        (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
      const double gy = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) -
                        (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
      mags[static_cast<std::size_t>(r - 1) * (w - 2) + (c - 1)] =
          std::sqrt(gx * gx + gy * gy);
    }
  }
  return mags;
}

void require_same_dims(const Frame& a, const Frame& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(Errc::dimension_mismatch, "frame dimensions differ");
  }
}

void require_uniform_dims(const VideoChunk& chunk) {
  for (const Frame& frame : chunk.frames) {
    if (frame.width != chunk.width || frame.height != chunk.height) {
      throw Error(Errc::dimension_mismatch, "chunk frames disagree on dimensions");
    }
  }
}

std::vector<double> tc_series(const VideoChunk& chunk) {
  require_uniform_dims(chunk);
  const int pairs = chunk.frame_count() - 1;
  std::vector<double> tc(static_cast<std::size_t>(pairs));
#pragma omp parallel for
  for (int t = 0; t < pairs; ++t) {
    tc[static_cast<std::size_t>(t)] =
        temporal_complexity(chunk.frames[static_cast<std::size_t>(t)],
                            chunk.frames[static_cast<std::size_t>(t) + 1]);
  }
  return tc;
}

// The parallel loops must not throw, so geometry and config problems are
// rejected up front.
void require_glcm_usable(int width, int height, const GlcmConfig& config) {
  config.validate();
  if (width < 2 || height < 2) {
    throw Error(Errc::frame_too_small, "glcm needs at least a 2x2 frame");
  }
  bool any_pairs = false;
  for (int deg : config.directions_deg) {
    const Offset off = direction_offset(deg, config.distance);
    if (height - std::abs(off.dr) > 0 && width - std::abs(off.dc) > 0) {
      any_pairs = true;
    }
  }
  if (!any_pairs) {
    throw Error(Errc::frame_too_small, "no co-occurrence pairs at this distance");
  }
}

}  // namespace

void GlcmConfig::validate() const {
  if (gray_levels < 2) throw Error(Errc::bad_params, "glcm needs >= 2 gray levels");
  if (distance < 1) throw Error(Errc::bad_params, "glcm distance must be >= 1");
  if (directions_deg.empty()) {
    throw Error(Errc::bad_params, "glcm needs at least one direction");
  }
  for (int d : directions_deg) direction_offset(d, distance);
}

const std::array<std::string, FeatureVector::kCount>& FeatureVector::names() {
  static const std::array<std::string, kCount> kNames = {
      "glcm_contrast", "glcm_correlation", "glcm_energy", "glcm_homogeneity",
      "glcm_entropy",  "tc_mean",          "tc_std",      "si",
      "ti"};
  return kNames;
}

std::array<double, FeatureVector::kCount> FeatureVector::to_array() const {
  return {glcm_contrast, glcm_correlation, glcm_energy, glcm_homogeneity,
          glcm_entropy,  tc_mean,          tc_std,      si,
          ti};
}

FeatureVector FeatureVector::from_array(const std::array<double, kCount>& v) {
  return FeatureVector{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
}

void FeatureVector::validate() const {
  for (double v : to_array()) {
    if (!std::isfinite(v)) throw Error(Errc::non_finite, "feature is not finite");
  }
  if (glcm_energy <= 0.0 || glcm_energy > 1.0 + 1e-12 ||
      glcm_homogeneity <= 0.0 || glcm_homogeneity > 1.0 + 1e-12 ||
      glcm_entropy < 0.0 || glcm_contrast < 0.0 || tc_mean < 0.0) {
    throw Error(Errc::bad_params, "feature value outside its valid range");
  }
}

GlcmStats glcm_descriptors(const Frame& frame, const GlcmConfig& config) {
  config.validate();
  if (frame.width < 2 || frame.height < 2) {
    throw Error(Errc::frame_too_small, "glcm needs at least a 2x2 frame");
  }

  const int g = config.gray_levels;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(g) * g, 0);
  const auto quantize = [&](std::uint8_t v) {
    return static_cast<int>(v) * g / 256;
  };

  for (int deg : config.directions_deg) {
    const Offset off = direction_offset(deg, config.distance);
    const int r_lo = std::max(0, -off.dr);
    const int r_hi = frame.height - std::max(0, off.dr);
    const int c_lo = std::max(0, -off.dc);
    const int c_hi = frame.width - std::max(0, off.dc);
    for (int r = r_lo; r < r_hi; ++r) {
      for (int c = c_lo; c < c_hi; ++c) {
        const int a = quantize(frame.y(r, c));
        const int b = quantize(frame.y(r + off.dr, c + off.dc));
        counts[static_cast<std::size_t>(a) * g + b]++;
        if (config.symmetric) counts[static_cast<std::size_t>(b) * g + a]++;
      }
    }
  }

  const std::uint64_t total =
      std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) {
    throw Error(Errc::frame_too_small, "no co-occurrence pairs at this distance");
  }

  // Marginal moments for the correlation term.
  std::vector<double> p_row(static_cast<std::size_t>(g), 0.0);
  std::vector<double> p_col(static_cast<std::size_t>(g), 0.0);
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double p =
          static_cast<double>(counts[static_cast<std::size_t>(i) * g + j]) / total;
      p_row[static_cast<std::size_t>(i)] += p;
      p_col[static_cast<std::size_t>(j)] += p;
    }
  }
  double mu_r = 0.0, mu_c = 0.0;
  for (int i = 0; i < g; ++i) {
    mu_r += i * p_row[static_cast<std::size_t>(i)];
    mu_c += i * p_col[static_cast<std::size_t>(i)];
  }
  double var_r = 0.0, var_c = 0.0;
  for (int i = 0; i < g; ++i) {
    var_r += (i - mu_r) * (i - mu_r) * p_row[static_cast<std::size_t>(i)];
    var_c += (i - mu_c) * (i - mu_c) * p_col[static_cast<std::size_t>(i)];
  }

  GlcmStats stats;
  double corr_acc = 0.0;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double p =
          static_cast<double>(counts[static_cast<std::size_t>(i) * g + j]) / total;
      if (p == 0.0) continue;
      stats.contrast += p * (i - j) * (i - j);
      stats.energy += p * p;
      stats.homogeneity += p / (1.0 + std::abs(i - j));
      stats.entropy -= p * std::log(p);
      corr_acc += p * (i - mu_r) * (j - mu_c);
    }
  }
  const double sigma_prod = var_r * var_c;
  stats.correlation = sigma_prod > 0.0 ? corr_acc / std::sqrt(sigma_prod) : 0.0;
  return stats;
}

double temporal_complexity(const Frame& prev, const Frame& next) {
  require_same_dims(prev, next);
  const int h = prev.height;
  const int w = prev.width;
  std::vector<double> row_sum(static_cast<std::size_t>(h), 0.0);
#pragma omp parallel for
  for (int r = 0; r < h; ++r) {
    double acc = 0.0;
    for (int c = 0; c < w; ++c) {
      acc += std::abs(static_cast<double>(prev.y(r, c)) -
                      static_cast<double>(next.y(r, c)));
    }
    row_sum[static_cast<std::size_t>(r)] = acc;
  }
  return std::accumulate(row_sum.begin(), row_sum.end(), 0.0) /
         (static_cast<double>(w) * h);
}

std::pair<double, double> si_ti(const VideoChunk& chunk) {
  if (chunk.frame_count() < 2) {
    throw Error(Errc::too_few_frames, "si/ti needs at least two frames");
  }
  if (chunk.width < 3 || chunk.height < 3) {
    throw Error(Errc::frame_too_small, "si needs at least a 3x3 frame");
  }

  double si = 0.0;
  for (const Frame& frame : chunk.frames) {
    const std::vector<double> mags = sobel_magnitudes(frame);
    si = std::max(si, plane_stddev(mags, frame.height - 2, frame.width - 2));
  }

  double ti = 0.0;
  std::vector<double> diff(static_cast<std::size_t>(chunk.width) * chunk.height);
  for (int t = 1; t < chunk.frame_count(); ++t) {
    const Frame& a = chunk.frames[static_cast<std::size_t>(t) - 1];
    const Frame& b = chunk.frames[static_cast<std::size_t>(t)];
#pragma omp parallel for
    for (int r = 0; r < chunk.height; ++r) {
      for (int c = 0; c < chunk.width; ++c) {
        diff[static_cast<std::size_t>(r) * chunk.width + c] =
            static_cast<double>(b.y(r, c)) - static_cast<double>(a.y(r, c));
      }
    }
    ti = std::max(ti, plane_stddev(diff, chunk.height, chunk.width));
  }
  return {si, ti};
}

FeatureVector chunk_features(const VideoChunk& chunk, const GlcmConfig& config) {
  if (chunk.frame_count() < 2) {
    throw Error(Errc::too_few_frames, "chunk features need at least two frames");
  }
  require_uniform_dims(chunk);
  require_glcm_usable(chunk.width, chunk.height, config);

  const int n = chunk.frame_count();
  std::vector<GlcmStats> per_frame(static_cast<std::size_t>(n));
#pragma omp parallel for
  for (int t = 0; t < n; ++t) {
    per_frame[static_cast<std::size_t>(t)] =
        glcm_descriptors(chunk.frames[static_cast<std::size_t>(t)], config);
  }

  FeatureVector fv;
  for (const GlcmStats& s : per_frame) {  // fixed frame order
    fv.glcm_contrast += s.contrast;
    fv.glcm_correlation += s.correlation;
    fv.glcm_energy += s.energy;
    fv.glcm_homogeneity += s.homogeneity;
    fv.glcm_entropy += s.entropy;
  }
  fv.glcm_contrast /= n;
  fv.glcm_correlation /= n;
  fv.glcm_energy /= n;
  fv.glcm_homogeneity /= n;
  fv.glcm_entropy /= n;

  const std::vector<double> tc = tc_series(chunk);
  double tc_sum = 0.0;
  for (double v : tc) tc_sum += v;
  fv.tc_mean = tc_sum / static_cast<double>(tc.size());
  double tc_sq = 0.0;
  for (double v : tc) tc_sq += (v - fv.tc_mean) * (v - fv.tc_mean);
  fv.tc_std = std::sqrt(tc_sq / static_cast<double>(tc.size()));

  const auto [si, ti] = si_ti(chunk);
  fv.si = si;
  fv.ti = ti;
  return fv;
}

std::vector<int> detect_scene_change(const VideoChunk& chunk, int window,
                                     double threshold) {
  if (chunk.frame_count() < 2) {
    throw Error(Errc::too_few_frames, "scene detection needs at least two frames");
  }
  const std::vector<double> tc = tc_series(chunk);
  std::vector<int> cuts;
  std::vector<double> history;
  for (std::size_t t = 1; t < tc.size(); ++t) {
    const std::size_t lo = t > static_cast<std::size_t>(window)
                               ? t - static_cast<std::size_t>(window)
                               : 0;
    history.assign(tc.begin() + static_cast<std::ptrdiff_t>(lo),
                   tc.begin() + static_cast<std::ptrdiff_t>(t));
    const std::size_t mid = history.size() / 2;
    std::nth_element(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(mid),
                     history.end());
    const double median = history[mid];
    if (tc[t] > median * threshold) {
      cuts.push_back(static_cast<int>(t) + 1);  // frame index of the new scene
    }
  }
  return cuts;
}

}  // namespace ladder
