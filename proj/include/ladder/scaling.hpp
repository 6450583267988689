#ifndef LADDER_SCALING_HPP
#define LADDER_SCALING_HPP

#include "ladder/video.hpp"

namespace ladder {

// Separable Lanczos-3 resampling of all planes, edge-clamped, output values
// clamped to [0, 255]. Kernel weights are renormalized per output sample so
// constant inputs are preserved exactly. Downscaling widens the kernel
// support by the inverse scale factor.
Frame lanczos_resize(const Frame& frame, int target_w, int target_h);
VideoChunk lanczos_resize(const VideoChunk& chunk, int target_w, int target_h);

// Luma PSNR over all frames against an 8-bit peak, capped at 100 dB when the
// MSE is effectively zero. The reconstruction must already be at native
// dimensions.
double scaled_psnr(const VideoChunk& native, const VideoChunk& reconstructed);

}  // namespace ladder

#endif  // LADDER_SCALING_HPP
