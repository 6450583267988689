#ifndef LADDER_IO_HPP
#define LADDER_IO_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ladder/ensemble.hpp"
#include "ladder/eval.hpp"
#include "ladder/features.hpp"
#include "ladder/learners.hpp"
#include "ladder/types.hpp"

namespace ladder {

// One encode measurement row of the RQ-point CSV
// (chunk_id,width,height,bitrate_bps,quality_db).
struct RqRow {
  std::string chunk_id;
  int width = 0;
  int height = 0;
  double bitrate_bps = 0.0;
  double quality_db = 0.0;
};

std::vector<RqRow> read_rq_csv(std::istream& in);
std::vector<RqRow> read_rq_csv_file(const std::string& path);
void write_rq_csv(std::ostream& out, const std::vector<RqRow>& rows);

// Groups rows by chunk and builds one surface per chunk over the given
// resolution set; reports chunks with missing resolutions in one error.
std::map<std::string, RateQualitySurface> surfaces_from_rows(
    const std::vector<RqRow>& rows, const ResolutionSet& resolutions);

// Converts one chunk's rows (any chunk grouping already applied) to plain
// RQ points in the log2 domain.
std::vector<RQPoint> rq_points_from_rows(const std::vector<RqRow>& rows);

std::string ladder_to_json(const BitrateLadder& ladder);
BitrateLadder ladder_from_json(const std::string& text);
void write_ladder_file(const std::string& path, const BitrateLadder& ladder);
BitrateLadder read_ladder_file(const std::string& path);

struct FeatureRow {
  std::string chunk_id;
  FeatureVector features;
};

std::vector<FeatureRow> read_feature_csv(std::istream& in);
std::vector<FeatureRow> read_feature_csv_file(const std::string& path);
void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows);

// Versioned model files shared by both learners:
// {"version":1,"kind":...,"feature_mask":[...],"standardization":{...},
//  "payload":{...}}.
std::string classifier_to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(const std::string& text);
std::string regressor_to_json(const RegressorModel& model);
RegressorModel regressor_from_json(const std::string& text);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

std::string aggregation_report_to_json(const AggregationReport& report);

std::string cv_report_to_json(const CvReport& report);
void write_cv_report_csv(std::ostream& out, const CvReport& report);
void write_cv_per_sequence_csv(std::ostream& out, const CvReport& report);

SyntheticParams synthetic_params_from_json(const std::string& text);

// Whole-app configuration; a JSON file with {"version":1} and any subset of
// the keys, defaults fill the rest.
struct AppConfig {
  ResolutionSet resolutions = ResolutionSet::from_list({{960, 540, "540p"},
                                                        {1280, 720, "720p"},
                                                        {1920, 1080, "1080p"},
                                                        {3840, 2160, "2160p"}});
  double min_bps = 1.0e5;
  double max_bps = 5.0e7;
  int grid_points = 100;
  GlcmConfig glcm;
  GbtHyper gbt;
  GpHyper gp;
  int rfe_target_k = 6;
  bool aggregator_fast = false;
  std::string encoder_template;
  std::string cache_dir;
  std::string workdir = ".";
  int chunk_frames = 64;
  std::uint64_t seed = 17;

  BitrateGrid grid() const {
    return BitrateGrid::from_bps(min_bps, max_bps, grid_points);
  }
};

AppConfig config_from_json(const std::string& text);
AppConfig load_config_file(const std::string& path);

}  // namespace ladder

#endif  // LADDER_IO_HPP
