#include <doctest.h>

#include <cmath>
#include <random>

#include "ladder/scaling.hpp"
#include "reference.hpp"
#include "test_helpers.hpp"

using namespace ladder;
using namespace ladder::testing;

TEST_CASE("identity resize returns the input unchanged") {
  std::mt19937_64 rng(71);
  const Frame frame = random_frame(rng, 16, 12);
  const Frame out = lanczos_resize(frame, 16, 12);
  CHECK(out.luma == frame.luma);
}

TEST_CASE("constant frames stay constant at any scale") {
  const Frame frame = constant_frame(32, 24, 93);
  for (const auto& [w, h] : std::vector<std::pair<int, int>>{
           {16, 12}, {8, 6}, {64, 48}, {20, 10}}) {
    const Frame out = lanczos_resize(frame, w, h);
    for (auto v : out.luma) CHECK(static_cast<int>(v) == 93);
  }
}

TEST_CASE("downscale of a sine matches the direct 2-D convolution") {
  Frame frame = constant_frame(64, 32, 0);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 64; ++c) {
      frame.luma[static_cast<std::size_t>(r) * 64 + c] = static_cast<std::uint8_t>(
          128.0 + 100.0 * std::sin(2.0 * 3.14159265358979 * c / 16.0));
    }
  }
  const Frame fast = lanczos_resize(frame, 32, 16);
  const Frame ref = reference::lanczos_resize(frame, 32, 16);
  for (std::size_t i = 0; i < fast.luma.size(); ++i) {
    CHECK(std::abs(static_cast<int>(fast.luma[i]) - static_cast<int>(ref.luma[i])) <= 1);
  }
}

TEST_CASE("random up/down scales stay within one code value of the reference") {
  std::mt19937_64 rng(73);
  const Frame frame = random_frame(rng, 24, 24);
  for (const auto& [w, h] : std::vector<std::pair<int, int>>{{12, 12}, {48, 48},
                                                             {36, 18}}) {
    const Frame fast = lanczos_resize(frame, w, h);
    const Frame ref = reference::lanczos_resize(frame, w, h);
    for (std::size_t i = 0; i < fast.luma.size(); ++i) {
      CHECK(std::abs(static_cast<int>(fast.luma[i]) - static_cast<int>(ref.luma[i])) <=
            1);
    }
  }
}

TEST_CASE("resize validates the target geometry") {
  const Frame frame = constant_frame(16, 16, 0);
  CHECK_THROWS_WITH_AS(lanczos_resize(frame, 15, 16), doctest::Contains("BadTarget"),
                       Error);
  CHECK_THROWS_WITH_AS(lanczos_resize(frame, 0, 16), doctest::Contains("BadTarget"),
                       Error);
}

TEST_CASE("resize covers chroma planes") {
  std::mt19937_64 rng(79);
  Frame frame = random_frame(rng, 16, 16);
  frame.cb.assign(64, 100);
  frame.cr.assign(64, 200);
  const Frame out = lanczos_resize(frame, 8, 8);
  CHECK(out.cb.size() == 16);
  for (auto v : out.cb) CHECK(static_cast<int>(v) == 100);
  for (auto v : out.cr) CHECK(static_cast<int>(v) == 200);
}

TEST_CASE("identical chunks hit the psnr cap") {
  std::mt19937_64 rng(83);
  const VideoChunk chunk = random_chunk(rng, 16, 16, 3);
  CHECK(scaled_psnr(chunk, chunk) == 100.0);
}

TEST_CASE("uniform off-by-one lands at the analytic psnr") {
  const VideoChunk a = chunk_of_frames({constant_frame(32, 32, 100)});
  const VideoChunk b = chunk_of_frames({constant_frame(32, 32, 101)});
  CHECK(std::abs(scaled_psnr(a, b) - 48.13) <= 0.01);
}

TEST_CASE("psnr matches the reference on random distortion") {
  std::mt19937_64 rng(89);
  const VideoChunk a = random_chunk(rng, 24, 16, 4);
  const VideoChunk b = random_chunk(rng, 24, 16, 4);
  CHECK(scaled_psnr(a, b) == doctest::Approx(reference::scaled_psnr(a, b)).epsilon(1e-12));
}

TEST_CASE("psnr rejects mismatched inputs") {
  const VideoChunk a = chunk_of_frames({constant_frame(16, 16, 0)});
  const VideoChunk b = chunk_of_frames({constant_frame(8, 8, 0)});
  CHECK_THROWS_WITH_AS(scaled_psnr(a, b), doctest::Contains("DimensionMismatch"), Error);
}
