// Compares the OpenMP pixel kernels against the serial reference
// implementations the tests use as oracles.
//
//   ./ladder_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <random>

#include "ladder/features.hpp"
#include "ladder/scaling.hpp"
#include "ladder/video.hpp"
#include "reference.hpp"

namespace {

using namespace ladder;

VideoChunk make_chunk(int width, int height, int frames) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> u(0, 255);
  VideoChunk chunk;
  chunk.width = width;
  chunk.height = height;
  chunk.fps = 60.0;
  for (int t = 0; t < frames; ++t) {
    Frame frame;
    frame.width = width;
    frame.height = height;
    frame.luma.resize(static_cast<std::size_t>(width) * height);
    for (auto& v : frame.luma) v = static_cast<std::uint8_t>(u(rng));
    chunk.frames.push_back(std::move(frame));
  }
  return chunk;
}

void bench_chunk_features_omp(benchmark::State& state) {
  const VideoChunk chunk = make_chunk(640, 360, 16);
  const GlcmConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chunk_features(chunk, config));
  }
}
BENCHMARK(bench_chunk_features_omp)->Unit(benchmark::kMillisecond);

void bench_chunk_features_serial(benchmark::State& state) {
  const VideoChunk chunk = make_chunk(640, 360, 16);
  const GlcmConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::chunk_features(chunk, config));
  }
}
BENCHMARK(bench_chunk_features_serial)->Unit(benchmark::kMillisecond);

void bench_lanczos_omp(benchmark::State& state) {
  const VideoChunk chunk = make_chunk(1280, 720, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lanczos_resize(chunk.frames[0], 640, 360));
  }
}
BENCHMARK(bench_lanczos_omp)->Unit(benchmark::kMillisecond);

void bench_lanczos_serial_2d(benchmark::State& state) {
  const VideoChunk chunk = make_chunk(1280, 720, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::lanczos_resize(chunk.frames[0], 640, 360));
  }
}
BENCHMARK(bench_lanczos_serial_2d)->Unit(benchmark::kMillisecond);

void bench_psnr_omp(benchmark::State& state) {
  const VideoChunk a = make_chunk(1280, 720, 8);
  const VideoChunk b = make_chunk(1280, 720, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scaled_psnr(a, b));
  }
}
BENCHMARK(bench_psnr_omp)->Unit(benchmark::kMillisecond);

void bench_psnr_serial(benchmark::State& state) {
  const VideoChunk a = make_chunk(1280, 720, 8);
  const VideoChunk b = make_chunk(1280, 720, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::scaled_psnr(a, b));
  }
}
BENCHMARK(bench_psnr_serial)->Unit(benchmark::kMillisecond);

void bench_si_ti_omp(benchmark::State& state) {
  const VideoChunk chunk = make_chunk(640, 360, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(si_ti(chunk));
  }
}
BENCHMARK(bench_si_ti_omp)->Unit(benchmark::kMillisecond);

void bench_si_ti_serial(benchmark::State& state) {
  const VideoChunk chunk = make_chunk(640, 360, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::si_ti(chunk));
  }
}
BENCHMARK(bench_si_ti_serial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
