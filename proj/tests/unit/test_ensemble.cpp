#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "ladder/ensemble.hpp"
#include "ladder/scaling.hpp"
#include "test_helpers.hpp"

using namespace ladder;
using namespace ladder::testing;
namespace fs = std::filesystem;

TEST_CASE("synthetic backend hits the onset and the asymptote") {
  auto backend = make_synthetic_backend(four_resolutions(), default_synthetic_params());
  CHECK(backend->quality(5.0, 1) == 0.0);  // onset of the first resolution
  double prev = -1.0;
  for (double x = 5.0; x < 40.0; x += 0.5) {
    const double q = backend->quality(x, 1);
    CHECK(q >= prev);
    prev = q;
  }
  CHECK(backend->quality(39.5, 1) == doctest::Approx(38.0).epsilon(1e-9));
}

TEST_CASE("synthetic params validation") {
  SyntheticParams params = default_synthetic_params();
  params.ceiling_db = {40.0, 40.0, 46.0, 50.0};  // not strictly increasing
  CHECK_THROWS_WITH_AS(make_synthetic_backend(four_resolutions(), params),
                       doctest::Contains("BadParams"), Error);
}

TEST_CASE("consecutive synthetic curves cross inside the working range") {
  auto backend = make_synthetic_backend(four_resolutions(), default_synthetic_params());
  const auto diff = [&](double x) {
    return backend->quality(x, 2) - backend->quality(x, 1);
  };
  CHECK(diff(6.0) < 0.0);
  CHECK(diff(16.0) > 0.0);
  // Bisect the sign change to confirm a genuine crossing.
  double lo = 6.0, hi = 16.0;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (diff(mid) < 0.0 ? lo : hi) = mid;
  }
  CHECK(lo > 6.0);
  CHECK(hi < 16.0);
}

TEST_CASE("synthetic surface produces a valid non-decreasing ladder") {
  const BitrateGrid grid(5.0, 16.0, 80);
  const RateQualitySurface surface =
      synthetic_surface(default_synthetic_params(), grid);
  const BitrateLadder ladder = cross_over_bitrates(surface, grid);
  ladder.validate();
  for (std::size_t b = 1; b < ladder.crossover_log2_rates.size(); ++b) {
    CHECK(ladder.crossover_log2_rates[b] >= ladder.crossover_log2_rates[b - 1]);
  }
}

TEST_CASE("table backend reproduces tabulated points and memoizes") {
  const BitrateGrid grid(5.0, 16.0, 40);
  const RateQualitySurface surface =
      synthetic_surface(default_synthetic_params(), grid);
  auto backend = make_table_backend(surface);
  const RQPoint& p = surface.curves[2].points[5];
  CHECK(backend->quality(p.log2_rate, 3) == doctest::Approx(p.quality).epsilon(1e-12));
  CHECK(backend->encode_count() == 1);
  backend->quality(p.log2_rate, 3);  // served from the memo
  CHECK(backend->encode_count() == 1);
}

TEST_CASE("backend validates the query") {
  auto backend = make_synthetic_backend(four_resolutions(), default_synthetic_params());
  CHECK_THROWS_WITH_AS(backend->quality(10.0, 5),
                       doctest::Contains("UnsupportedResolution"), Error);
  CHECK_THROWS_WITH_AS(backend->quality(std::nan(""), 1),
                       doctest::Contains("RateOutOfRange"), Error);
}

TEST_CASE("aggregate passes identical ladders through without encodes") {
  const BitrateGrid grid(5.0, 16.0, 50);
  std::mt19937_64 rng(151);
  const RateQualitySurface surface =
      synthetic_surface(default_synthetic_params(), grid);
  auto backend = make_table_backend(surface);
  const BitrateLadder ladder = random_ladder(rng, four_resolutions(), grid);

  const AggregationReport report =
      aggregate(ladder, ladder, *backend, AggregatorConfig{true, grid});
  CHECK(report.total_encodes == 0);
  CHECK(report.disagreements == 0);
  for (const AggregationPoint& p : report.points) {
    CHECK(p.agree);
    CHECK(p.encodes == 0);
  }
  for (int t = 0; t < grid.count(); ++t) {
    CHECK(ladder_lookup(report.final_ladder, grid.point(t)) ==
          ladder_lookup(ladder, grid.point(t)));
  }
}

TEST_CASE("fast mode resolves a single disagreement with exactly two encodes") {
  const BitrateGrid grid(5.0, 14.0, 10);
  const RateQualitySurface surface =
      synthetic_surface(default_synthetic_params(), grid);
  auto backend = make_table_backend(surface);

  // The two ladders differ only on the grid point at index 4.
  const BitrateLadder cl{four_resolutions(),
                         {grid.point(3), grid.point(6), grid.point(8)}};
  const BitrateLadder rg{four_resolutions(),
                         {grid.point(4), grid.point(6), grid.point(8)}};
  const AggregationReport report =
      aggregate(cl, rg, *backend, AggregatorConfig{true, grid});
  CHECK(report.disagreements == 1);
  CHECK(report.total_encodes == 2);
  const AggregationPoint& p = report.points[4];
  CHECK(!p.agree);
  CHECK(p.encodes == 2);
  const double q1 = backend->quality(p.log2_rate, p.classifier_index);
  const double q2 = backend->quality(p.log2_rate, p.regressor_index);
  CHECK(backend->quality(p.log2_rate, p.chosen_index) ==
        doctest::Approx(std::max(q1, q2)));
}

TEST_CASE("full mode picks the hull argmax at disagreement points") {
  const BitrateGrid grid(5.0, 16.0, 60);
  std::mt19937_64 rng(157);
  const RateQualitySurface surface =
      synthetic_surface(default_synthetic_params(), grid);
  const SurfaceInterpolator interp(surface);
  auto backend = make_table_backend(surface);

  const BitrateLadder cl = random_ladder(rng, four_resolutions(), grid);
  const BitrateLadder rg = random_ladder(rng, four_resolutions(), grid);
  const AggregationReport report =
      aggregate(cl, rg, *backend, AggregatorConfig{false, grid});
  for (const AggregationPoint& p : report.points) {
    if (p.agree) continue;
    CHECK(p.encodes == 4);
    CHECK(p.chosen_index == interp.hull(p.log2_rate).resolution_index);
  }
}

TEST_CASE("aggregation invariants hold over random ladder pairs") {
  const BitrateGrid grid(5.0, 16.0, 40);
  std::mt19937_64 rng(163);
  for (int trial = 0; trial < 20; ++trial) {
    const RateQualitySurface surface =
        synthetic_surface(default_synthetic_params(), grid);
    auto backend = make_table_backend(surface);
    const BitrateLadder cl = random_ladder(rng, four_resolutions(), grid);
    const BitrateLadder rg = random_ladder(rng, four_resolutions(), grid);

    const AggregationReport fast =
        aggregate(cl, rg, *backend, AggregatorConfig{true, grid});
    const AggregationReport full =
        aggregate(cl, rg, *backend, AggregatorConfig{false, grid});

    CHECK(fast.total_encodes == 2 * fast.disagreements);
    CHECK(full.total_encodes == 4 * full.disagreements);
    CHECK(fast.disagreements == full.disagreements);

    for (int t = 0; t < grid.count(); ++t) {
      const double r = grid.point(t);
      const double q_full =
          backend->quality(r, full.points[static_cast<std::size_t>(t)].chosen_index);
      const double q_fast =
          backend->quality(r, fast.points[static_cast<std::size_t>(t)].chosen_index);
      const double q_cl = backend->quality(r, ladder_lookup(cl, r));
      const double q_rg = backend->quality(r, ladder_lookup(rg, r));
      CHECK(q_full >= q_fast - 1e-12);
      CHECK(q_fast >= q_cl - 1e-12);
      CHECK(q_fast >= q_rg - 1e-12);
    }

    // Determinism: a repeated run reproduces the same report.
    auto backend2 = make_table_backend(surface);
    const AggregationReport again =
        aggregate(cl, rg, *backend2, AggregatorConfig{true, grid});
    REQUIRE(again.points.size() == fast.points.size());
    for (std::size_t i = 0; i < again.points.size(); ++i) {
      CHECK(again.points[i].chosen_index == fast.points[i].chosen_index);
    }
  }
}

TEST_CASE("backends tolerate concurrent queries") {
  const BitrateGrid grid(5.0, 16.0, 64);
  const RateQualitySurface surface =
      synthetic_surface(default_synthetic_params(), grid);
  auto backend = make_table_backend(surface);

  std::vector<std::vector<double>> results(4);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < results.size(); ++w) {
    workers.emplace_back([&, w] {
      for (int t = 0; t < grid.count(); ++t) {
        results[w].push_back(backend->quality(grid.point(t), 1 + (t % 4)));
      }
    });
  }
  for (auto& worker : workers) worker.join();
  for (std::size_t w = 1; w < results.size(); ++w) {
    CHECK(results[w] == results[0]);
  }
  // Rarely, racing threads measure the same key twice (last writer wins), so
  // the count is bounded rather than exact.
  CHECK(backend->encode_count() >= static_cast<std::uint64_t>(grid.count()));
  CHECK(backend->encode_count() <=
        static_cast<std::uint64_t>(grid.count() * results.size()));
}

TEST_CASE("external backend validates its command template") {
  ExternalBackendConfig config;
  config.command_template = "enc {input} {output} {width} {height}";  // no bitrate
  config.workdir = (fs::temp_directory_path() / "ladder_tpl_test").string();
  std::mt19937_64 rng(167);
  CHECK_THROWS_WITH_AS(make_external_backend(four_resolutions(), config,
                                             random_chunk(rng, 16, 16, 2)),
                       doctest::Contains("BadTemplate"), Error);
}

TEST_CASE("external backend runs a stub encoder and caches on disk") {
  const fs::path base = fs::temp_directory_path() / "ladder_ext_test";
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path counter = base / "runs.txt";

  ExternalBackendConfig config;
  // Identity "encoder": the reconstruction is the downscaled input itself.
  config.command_template = "cp {input} {output} && echo {bitrate_bps}x{width}x{height} >> " +
                            counter.string();
  config.workdir = (base / "work").string();
  config.cache_dir = (base / "cache").string();

  std::mt19937_64 rng(173);
  const VideoChunk native = random_chunk(rng, 32, 32, 2);
  const ResolutionSet set = ResolutionSet::from_list({{16, 16, "s"}, {32, 32, "n"}});

  auto backend = make_external_backend(set, config, native);
  const double q = backend->quality(20.0, 1);

  // The stub pipeline is downscale -> upscale -> psnr, reproduced here.
  const VideoChunk down = lanczos_resize(native, 16, 16);
  const VideoChunk up = lanczos_resize(down, 32, 32);
  CHECK(q == doctest::Approx(scaled_psnr(native, up)).epsilon(1e-12));

  // Same query again: served from the in-memory memo.
  backend->quality(20.0, 1);
  CHECK(backend->encode_count() == 1);

  // Fresh instance, same cache dir: served from disk, no process launch.
  auto backend2 = make_external_backend(set, config, native);
  CHECK(backend2->quality(20.0, 1) == doctest::Approx(q).epsilon(1e-12));
  std::ifstream runs(counter);
  int lines = 0;
  std::string line;
  while (std::getline(runs, line)) ++lines;
  CHECK(lines == 1);

  fs::remove_all(base);
}

TEST_CASE("aggregation failure carries the partial trace") {
  const fs::path base = fs::temp_directory_path() / "ladder_fail_test";
  fs::remove_all(base);
  ExternalBackendConfig config;
  config.command_template = "false {input} {output} {width} {height} {bitrate_bps}";
  config.workdir = (base / "work").string();

  std::mt19937_64 rng(179);
  const VideoChunk native = random_chunk(rng, 16, 16, 2);
  const ResolutionSet set = four_resolutions();
  // 16x16 source is fine; the stub never reads it.
  auto backend = make_external_backend(
      set, config, native);

  const BitrateGrid grid(12.0, 20.0, 8);
  const BitrateLadder cl{set, {grid.point(2), grid.point(4), grid.point(6)}};
  const BitrateLadder rg{set, {grid.point(3), grid.point(4), grid.point(6)}};
  try {
    aggregate(cl, rg, *backend, AggregatorConfig{true, grid});
    FAIL("expected an AggregationError");
  } catch (const AggregationError& e) {
    CHECK(e.code() == Errc::encoder_failure);
    CHECK(e.partial_points().size() < static_cast<std::size_t>(grid.count()));
  }
  fs::remove_all(base);
}
