#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ladder/io.hpp"
#include "ladder/video.hpp"
#include "test_helpers.hpp"

using namespace ladder;
using namespace ladder::testing;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only; stderr goes to a side file
};

RunResult run_cli(const std::string& args) {
  const fs::path err_file = fs::temp_directory_path() / "ladder_cli_stderr.txt";
  const std::string cmd =
      std::string(LADDER_CLI_PATH) + " " + args + " 2>" + err_file.string();
  RunResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    result.output.append(buf.data(), got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string data_file(const std::string& name) {
  return std::string(LADDER_TEST_DATA) + "/" + name;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("bdbr of a file against itself prints zero") {
  const RunResult r =
      run_cli("bdbr " + data_file("fig2_rq.csv") + " " + data_file("fig2_rq.csv"));
  CHECK(r.exit_code == 0);
  CHECK(r.output == "0.00\n");
}

TEST_CASE("bdbr of doubled rates prints one hundred") {
  const fs::path dir = fresh_dir("ladder_cli_bdbr");
  const std::vector<RqRow> rows = read_rq_csv_file(data_file("fig2_rq.csv"));
  std::vector<RqRow> doubled = rows;
  for (RqRow& row : doubled) row.bitrate_bps *= 2.0;
  {
    std::ofstream out(dir / "doubled.csv");
    write_rq_csv(out, doubled);
  }
  const RunResult r =
      run_cli("bdbr " + data_file("fig2_rq.csv") + " " + (dir / "doubled.csv").string());
  CHECK(r.exit_code == 0);
  const double value = std::stod(r.output);
  CHECK(std::abs(value - 100.0) <= 0.1);
}

TEST_CASE("bdbr reports disjoint quality ranges on exit code 2") {
  const fs::path dir = fresh_dir("ladder_cli_bdbr2");
  {
    std::ofstream out(dir / "low.csv");
    out << "chunk_id,width,height,bitrate_bps,quality_db\n";
    out << "c,960,540,100000,20\nc,960,540,200000,22\n";
  }
  {
    std::ofstream out(dir / "high.csv");
    out << "chunk_id,width,height,bitrate_bps,quality_db\n";
    out << "c,960,540,100000,40\nc,960,540,200000,42\n";
  }
  const RunResult r =
      run_cli("bdbr " + (dir / "low.csv").string() + " " + (dir / "high.csv").string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("build-gt reproduces the figure ladder from csv") {
  const fs::path dir = fresh_dir("ladder_cli_gt");
  const RunResult r = run_cli("build-gt --rq " + data_file("fig2_rq.csv") +
                              " --out-dir " + dir.string() +
                              " --min-bps 78.79 --max-bps 92681.9 --grid-points 100");
  CHECK(r.exit_code == 0);
  const BitrateLadder ladder = read_ladder_file((dir / "fig2.ladder.json").string());
  // log2(78.79) ~ 6.30, log2(92681.9) ~ 16.50: about 0.103 per step.
  const double step = (std::log2(92681.9) - std::log2(78.79)) / 99.0;
  CHECK(std::abs(ladder.crossover_log2_rates[0] - 7.6415) <= step);
  CHECK(std::abs(ladder.crossover_log2_rates[1] - 8.6630) <= step);
  CHECK(std::abs(ladder.crossover_log2_rates[2] - 10.2974) <= step);
}

TEST_CASE("build-gt diagnoses chunks with missing resolutions") {
  const fs::path dir = fresh_dir("ladder_cli_gt_bad");
  {
    std::ofstream out(dir / "partial.csv");
    out << "chunk_id,width,height,bitrate_bps,quality_db\n";
    out << "solo,960,540,100000,30\nsolo,960,540,200000,32\n";
  }
  const RunResult r = run_cli("build-gt --rq " + (dir / "partial.csv").string() +
                              " --out-dir " + dir.string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("extract-features emits one row per y4m chunk") {
  const fs::path dir = fresh_dir("ladder_cli_feat");
  std::mt19937_64 rng(301);
  for (int i = 0; i < 3; ++i) {
    write_y4m_file((dir / ("clip" + std::to_string(i) + ".y4m")).string(),
                   random_chunk(rng, 16, 16, 4));
  }
  const RunResult r = run_cli("extract-features " + dir.string());
  CHECK(r.exit_code == 0);
  std::istringstream in(r.output);
  const auto rows = read_feature_csv(in);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].chunk_id == "clip0");
  CHECK(rows[1].chunk_id == "clip1");
  CHECK(rows[2].chunk_id == "clip2");
}

TEST_CASE("extract-features reads raw yuv with flags or a sidecar json") {
  const fs::path dir = fresh_dir("ladder_cli_yuv");
  std::mt19937_64 rng(303);
  const VideoChunk chunk = random_chunk(rng, 16, 8, 4);
  {
    std::ofstream out(dir / "clip.yuv", std::ios::binary);
    write_raw_yuv(out, chunk);
  }

  const RunResult with_flags = run_cli("extract-features " +
                                       (dir / "clip.yuv").string() +
                                       " --width 16 --height 8 --fps 30");
  CHECK(with_flags.exit_code == 0);

  {
    std::ofstream out(dir / "clip.yuv.json");
    out << R"({"width":16,"height":8,"fps":30})";
  }
  const RunResult with_sidecar =
      run_cli("extract-features " + (dir / "clip.yuv").string());
  CHECK(with_sidecar.exit_code == 0);
  CHECK(with_sidecar.output == with_flags.output);
}

TEST_CASE("extract-features splits long inputs into fixed chunks") {
  const fs::path dir = fresh_dir("ladder_cli_split");
  std::mt19937_64 rng(305);
  write_y4m_file((dir / "long.y4m").string(), random_chunk(rng, 16, 16, 10));
  const RunResult r =
      run_cli("extract-features " + (dir / "long.y4m").string() + " --chunk-frames 4");
  CHECK(r.exit_code == 0);
  std::istringstream in(r.output);
  const auto rows = read_feature_csv(in);
  REQUIRE(rows.size() == 3);  // 4 + 4 + 2 frames
  CHECK(rows[0].chunk_id == "long_ck0");
  CHECK(rows[2].chunk_id == "long_ck2");
}

TEST_CASE("extract-features with keep-going skips the corrupt file and exits 2") {
  const fs::path dir = fresh_dir("ladder_cli_feat_bad");
  std::mt19937_64 rng(307);
  write_y4m_file((dir / "a_good.y4m").string(), random_chunk(rng, 16, 16, 4));
  {
    std::ofstream out(dir / "b_corrupt.y4m");
    out << "not a y4m stream";
  }
  write_y4m_file((dir / "c_good.y4m").string(), random_chunk(rng, 16, 16, 4));

  const fs::path csv = dir / "features.csv";
  const RunResult r = run_cli("extract-features " + dir.string() + " --keep-going -o " +
                              csv.string());
  CHECK(r.exit_code == 2);
  const auto rows = read_feature_csv_file(csv.string());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].chunk_id == "a_good");
  CHECK(rows[1].chunk_id == "c_good");
}

TEST_CASE("train, predict and aggregate run end to end over files") {
  const fs::path dir = fresh_dir("ladder_cli_e2e");

  // Synthetic per-chunk surfaces with a latent-controlled switch pattern.
  std::vector<RqRow> rq_rows;
  std::vector<FeatureRow> feature_rows;
  const ResolutionSet set = four_resolutions();
  std::mt19937_64 rng(311);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 8; ++s) {
    const double latent = s / 7.0;
    SyntheticParams params = default_synthetic_params();
    for (double& o : params.onset_log2) o += 2.0 * latent;
    const BitrateGrid grid(5.0, 16.0, 40);
    const RateQualitySurface surface = synthetic_surface(params, grid);
    const std::string id = "seq" + std::to_string(s);
    for (const RQCurve& curve : surface.curves) {
      for (const RQPoint& p : curve.points) {
        rq_rows.push_back(RqRow{id, curve.resolution.width, curve.resolution.height,
                                std::exp2(p.log2_rate), p.quality});
      }
    }
    FeatureVector fv;
    fv.glcm_contrast = 1.0 + 9.0 * latent + 0.05 * u(rng);
    fv.glcm_correlation = 0.5;
    fv.glcm_energy = 0.4;
    fv.glcm_homogeneity = 0.6;
    fv.glcm_entropy = 1.0 + latent;
    fv.tc_mean = 2.0 + 10.0 * latent;
    fv.tc_std = 0.5;
    fv.si = 30.0 + 40.0 * latent;
    fv.ti = 8.0 + 20.0 * latent;
    feature_rows.push_back(FeatureRow{id, fv});
  }
  {
    std::ofstream out(dir / "rq.csv");
    write_rq_csv(out, rq_rows);
  }
  {
    std::ofstream out(dir / "features.csv");
    write_feature_csv(out, feature_rows);
  }

  const std::string grid_flags = " --min-bps 32 --max-bps 65536 --grid-points 40";

  // Ground-truth ladders.
  const fs::path gt_dir = dir / "gt";
  CHECK(run_cli("build-gt --rq " + (dir / "rq.csv").string() + " --out-dir " +
                gt_dir.string() + grid_flags)
            .exit_code == 0);

  // Manifest joining features to ladders.
  {
    std::ofstream out(dir / "manifest.csv");
    out << "chunk_id,features_csv,ladder_json\n";
    for (int s = 0; s < 8; ++s) {
      const std::string id = "seq" + std::to_string(s);
      out << id << ',' << (dir / "features.csv").string() << ','
          << (gt_dir / (id + ".ladder.json")).string() << '\n';
    }
  }

  const fs::path model_dir = dir / "models";
  CHECK(run_cli("train --manifest " + (dir / "manifest.csv").string() + " --out-dir " +
                model_dir.string() + " --rfe-k 9" + grid_flags +
                " --seed 5")
            .exit_code == 0);
  CHECK(fs::exists(model_dir / "classifier.json"));
  CHECK(fs::exists(model_dir / "regressor.json"));

  const fs::path pred_dir = dir / "pred";
  CHECK(run_cli("predict --classifier " + (model_dir / "classifier.json").string() +
                " --regressor " + (model_dir / "regressor.json").string() +
                " --features " + (dir / "features.csv").string() + " --out-dir " +
                pred_dir.string())
            .exit_code == 0);
  CHECK(fs::exists(pred_dir / "seq3.cl.json"));
  CHECK(fs::exists(pred_dir / "seq3.rg.json"));

  // The emitted ladders are readable and valid.
  read_ladder_file((pred_dir / "seq3.cl.json").string()).validate();
  read_ladder_file((pred_dir / "seq3.rg.json").string()).validate();

  const fs::path agg_out = dir / "final.json";
  const fs::path agg_report = dir / "report.json";
  const RunResult agg = run_cli(
      "aggregate --cl " + (pred_dir / "seq3.cl.json").string() + " --rg " +
      (pred_dir / "seq3.rg.json").string() + " --table " + (dir / "rq.csv").string() +
      " --chunk-id seq3 --fast --out " + agg_out.string() + " --report " +
      agg_report.string() + grid_flags);
  CHECK(agg.exit_code == 0);
  read_ladder_file(agg_out.string()).validate();
  const nlohmann::json report = nlohmann::json::parse(read_file(agg_report));
  CHECK(report.contains("total_encodes"));
  CHECK(report.at("points").size() == 40);
}

TEST_CASE("aggregate exits 3 when the external encoder fails") {
  const fs::path dir = fresh_dir("ladder_cli_agg_fail");
  std::mt19937_64 rng(313);
  write_y4m_file((dir / "native.y4m").string(), random_chunk(rng, 32, 32, 2));

  const BitrateLadder cl{four_resolutions(), {10.0, 12.0, 14.0}};
  const BitrateLadder rg{four_resolutions(), {11.0, 12.0, 14.0}};
  write_ladder_file((dir / "cl.json").string(), cl);
  write_ladder_file((dir / "rg.json").string(), rg);

  const RunResult r = run_cli(
      "aggregate --cl " + (dir / "cl.json").string() + " --rg " +
      (dir / "rg.json").string() +
      " --encoder-template 'false {input} {output} {width} {height} {bitrate_bps}'"
      " --input " + (dir / "native.y4m").string() + " --workdir " + dir.string() +
      " --min-bps 1024 --max-bps 65536 --grid-points 10");
  CHECK(r.exit_code == 3);
}

TEST_CASE("config file and flag overrides resolve like all-flags invocations") {
  const fs::path dir = fresh_dir("ladder_cli_config");
  {
    std::ofstream out(dir / "config.json");
    out << R"({"version":1,"grid":{"min_bps":78.79,"max_bps":92681.9,"points":100}})";
  }
  const fs::path out_a = dir / "a";
  const fs::path out_b = dir / "b";
  CHECK(run_cli("--config " + (dir / "config.json").string() + " build-gt --rq " +
                data_file("fig2_rq.csv") + " --out-dir " + out_a.string())
            .exit_code == 0);
  CHECK(run_cli("build-gt --rq " + data_file("fig2_rq.csv") + " --out-dir " +
                out_b.string() +
                " --min-bps 78.79 --max-bps 92681.9 --grid-points 100")
            .exit_code == 0);
  CHECK(read_file(out_a / "fig2.ladder.json") == read_file(out_b / "fig2.ladder.json"));
}

TEST_CASE("crossval with a seed is bit-reproducible in its outputs") {
  const fs::path a = fresh_dir("ladder_cli_cv_a");
  const fs::path b = fresh_dir("ladder_cli_cv_b");
  const std::string args =
      "crossval --synthetic --sequences 12 --folds 3 --seed 21 --out-dir ";
  CHECK(run_cli(args + a.string()).exit_code == 0);
  CHECK(run_cli(args + b.string()).exit_code == 0);
  CHECK(read_file(a / "report.json") == read_file(b / "report.json"));
  CHECK(read_file(a / "report.csv") == read_file(b / "report.csv"));
  CHECK(read_file(a / "bdbr_per_sequence.csv") ==
        read_file(b / "bdbr_per_sequence.csv"));
  CHECK(!read_file(a / "bdbr_per_sequence.csv").empty());
}
