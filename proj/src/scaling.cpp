#include "ladder/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace ladder {

namespace {

constexpr int kLanczosA = 3;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double lanczos_kernel(double x) {
  if (std::abs(x) >= kLanczosA) return 0.0;
  return sinc(x) * sinc(x / kLanczosA);
}

struct Tap {
  int first;                    // first source index (clamped at use)
  std::vector<double> weights;  // normalized to sum 1
};

// Per-output-coordinate taps for one axis. For downscales the kernel is
// stretched by 1/scale so the footprint covers the source interval.
std::vector<Tap> make_taps(int src_size, int dst_size) {
  const double scale = static_cast<double>(dst_size) / src_size;
  const double support =
      scale < 1.0 ? static_cast<double>(kLanczosA) / scale : kLanczosA;
  const double kscale = scale < 1.0 ? scale : 1.0;

  std::vector<Tap> taps(static_cast<std::size_t>(dst_size));
  for (int j = 0; j < dst_size; ++j) {
    const double center = (j + 0.5) / scale - 0.5;
    const int lo = static_cast<int>(std::floor(center - support)) + 1;
    const int hi = static_cast<int>(std::floor(center + support));
    Tap tap;
    tap.first = lo;
    tap.weights.reserve(static_cast<std::size_t>(hi - lo + 1));
    double sum = 0.0;
    for (int k = lo; k <= hi; ++k) {
      const double w = lanczos_kernel((k - center) * kscale);
      tap.weights.push_back(w);
      sum += w;
    }
    for (double& w : tap.weights) w /= sum;
    taps[static_cast<std::size_t>(j)] = std::move(tap);
  }
  return taps;
}

std::vector<std::uint8_t> resize_plane(const std::vector<std::uint8_t>& src,
                                       int src_w, int src_h, int dst_w,
                                       int dst_h) {
  const std::vector<Tap> col_taps = make_taps(src_w, dst_w);
  const std::vector<Tap> row_taps = make_taps(src_h, dst_h);

  // Horizontal pass, kept at double precision until the final quantization.
  std::vector<double> mid(static_cast<std::size_t>(src_h) * dst_w);
#pragma omp parallel for
  for (int r = 0; r < src_h; ++r) {
    const std::uint8_t* in = src.data() + static_cast<std::size_t>(r) * src_w;
    double* out = mid.data() + static_cast<std::size_t>(r) * dst_w;
    for (int j = 0; j < dst_w; ++j) {
      const Tap& tap = col_taps[static_cast<std::size_t>(j)];
      double acc = 0.0;
      for (std::size_t k = 0; k < tap.weights.size(); ++k) {
        const int idx = std::clamp(tap.first + static_cast<int>(k), 0, src_w - 1);
        acc += tap.weights[k] * in[idx];
      }
      out[j] = acc;
    }
  }

  std::vector<std::uint8_t> dst(static_cast<std::size_t>(dst_h) * dst_w);
#pragma omp parallel for
  for (int i = 0; i < dst_h; ++i) {
    const Tap& tap = row_taps[static_cast<std::size_t>(i)];
    for (int j = 0; j < dst_w; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < tap.weights.size(); ++k) {
        const int idx = std::clamp(tap.first + static_cast<int>(k), 0, src_h - 1);
        acc += tap.weights[k] * mid[static_cast<std::size_t>(idx) * dst_w + j];
      }
      const double clamped = std::clamp(acc, 0.0, 255.0);
      dst[static_cast<std::size_t>(i) * dst_w + j] =
          static_cast<std::uint8_t>(std::lround(clamped));
    }
  }
  return dst;
}

}  // namespace

Frame lanczos_resize(const Frame& frame, int target_w, int target_h) {
  if (target_w <= 0 || target_h <= 0 || target_w % 2 != 0 || target_h % 2 != 0) {
    throw Error(Errc::bad_target, "resize target must be positive and even");
  }
  Frame out;
  out.width = target_w;
  out.height = target_h;
  out.luma = resize_plane(frame.luma, frame.width, frame.height, target_w, target_h);
  if (frame.has_chroma()) {
    out.cb = resize_plane(frame.cb, frame.width / 2, frame.height / 2,
                          target_w / 2, target_h / 2);
    out.cr = resize_plane(frame.cr, frame.width / 2, frame.height / 2,
                          target_w / 2, target_h / 2);
  }
  return out;
}

VideoChunk lanczos_resize(const VideoChunk& chunk, int target_w, int target_h) {
  VideoChunk out;
  out.width = target_w;
  out.height = target_h;
  out.fps = chunk.fps;
  out.frames.reserve(chunk.frames.size());
  for (const Frame& frame : chunk.frames) {
    out.frames.push_back(lanczos_resize(frame, target_w, target_h));
  }
  return out;
}

double scaled_psnr(const VideoChunk& native, const VideoChunk& reconstructed) {
  if (native.width != reconstructed.width ||
      native.height != reconstructed.height ||
      native.frame_count() != reconstructed.frame_count()) {
    throw Error(Errc::dimension_mismatch,
                "psnr inputs must share dimensions and frame count");
  }
  if (native.frame_count() == 0) {
    throw Error(Errc::too_few_frames, "psnr needs at least one frame");
  }

  const int n = native.frame_count();
  std::vector<double> frame_sse(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for
  for (int t = 0; t < n; ++t) {
    const Frame& a = native.frames[static_cast<std::size_t>(t)];
    const Frame& b = reconstructed.frames[static_cast<std::size_t>(t)];
    double acc = 0.0;
    for (std::size_t i = 0; i < a.luma.size(); ++i) {
      const double d = static_cast<double>(a.luma[i]) - static_cast<double>(b.luma[i]);
      acc += d * d;
    }
    frame_sse[static_cast<std::size_t>(t)] = acc;
  }
  double sse = 0.0;
  for (double v : frame_sse) sse += v;

  const double pixels =
      static_cast<double>(native.width) * native.height * native.frame_count();
  const double mse = sse / pixels;
  constexpr double kPeakSq = 255.0 * 255.0;
  if (mse < kPeakSq * 1e-10) return 100.0;
  return 10.0 * std::log10(kPeakSq / mse);
}

}  // namespace ladder
