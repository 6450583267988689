#include "ladder/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace ladder {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::bad_params, context + ": cannot parse number '" + text + "'");
  }
}

int parse_int(const std::string& text, const std::string& context) {
  const double v = parse_double(text, context);
  return static_cast<int>(v);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json resolutions_to_json(const ResolutionSet& set) {
  json arr = json::array();
  for (const Resolution& r : set.list()) {
    arr.push_back({{"index", r.index},
                   {"width", r.width},
                   {"height", r.height},
                   {"label", r.label}});
  }
  return arr;
}

ResolutionSet resolutions_from_json(const json& arr) {
  std::vector<Resolution> resolutions;
  for (const json& item : arr) {
    resolutions.push_back(Resolution{item.at("index").get<int>(),
                                     item.at("width").get<int>(),
                                     item.at("height").get<int>(),
                                     item.at("label").get<std::string>()});
  }
  return ResolutionSet(std::move(resolutions));
}

json grid_to_json(const BitrateGrid& grid) {
  return {{"min_log2", grid.min_log2()},
          {"max_log2", grid.max_log2()},
          {"points", grid.count()}};
}

BitrateGrid grid_from_json(const json& j) {
  return BitrateGrid(j.at("min_log2").get<double>(), j.at("max_log2").get<double>(),
                     j.at("points").get<int>());
}

json standardizer_to_json(const Standardizer& st) {
  return {{"mean", st.mean}, {"scale", st.scale}};
}

Standardizer standardizer_from_json(const json& j) {
  Standardizer st;
  st.mean = j.at("mean").get<std::vector<double>>();
  st.scale = j.at("scale").get<std::vector<double>>();
  return st;
}

json check_model_header(const std::string& text, const std::string& kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::bad_params, std::string("model json: ") + e.what());
  }
  if (!j.contains("version") || j.at("version").get<int>() != 1) {
    throw Error(Errc::version_mismatch, "unsupported model file version");
  }
  if (j.at("kind").get<std::string>() != kind) {
    throw Error(Errc::version_mismatch, "model file kind is not '" + kind + "'");
  }
  return j;
}

}  // namespace

std::vector<RqRow> read_rq_csv(std::istream& in) {
  std::vector<RqRow> rows;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("chunk_id", 0) == 0) continue;  // header
    }
    const auto fields = split_csv_line(line);
    const std::string ctx = "rq csv line " + std::to_string(line_no);
    if (fields.size() != 5) {
      throw Error(Errc::bad_params, ctx + ": expected 5 fields");
    }
    rows.push_back(RqRow{fields[0], parse_int(fields[1], ctx), parse_int(fields[2], ctx),
                         parse_double(fields[3], ctx), parse_double(fields[4], ctx)});
  }
  return rows;
}

std::vector<RqRow> read_rq_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path);
  return read_rq_csv(in);
}

void write_rq_csv(std::ostream& out, const std::vector<RqRow>& rows) {
  out << "chunk_id,width,height,bitrate_bps,quality_db\n";
  for (const RqRow& row : rows) {
    out << row.chunk_id << ',' << row.width << ',' << row.height << ','
        << format_double(row.bitrate_bps) << ',' << format_double(row.quality_db)
        << '\n';
  }
}

std::map<std::string, RateQualitySurface> surfaces_from_rows(
    const std::vector<RqRow>& rows, const ResolutionSet& resolutions) {
  std::map<std::string, std::vector<std::vector<RQPoint>>> grouped;
  for (const RqRow& row : rows) {
    const int index = resolutions.index_of(row.width, row.height);
    if (index == 0) {
      throw Error(Errc::bad_params,
                  "chunk " + row.chunk_id + ": resolution " +
                      std::to_string(row.width) + "x" + std::to_string(row.height) +
                      " is not in the configured set");
    }
    auto& per_res = grouped[row.chunk_id];
    per_res.resize(resolutions.size());
    if (row.bitrate_bps <= 0.0) {
      throw Error(Errc::bad_params, "chunk " + row.chunk_id + ": bitrate must be > 0");
    }
    per_res[static_cast<std::size_t>(index) - 1].push_back(
        RQPoint{std::log2(row.bitrate_bps), row.quality_db});
  }

  std::string missing;
  std::map<std::string, RateQualitySurface> surfaces;
  for (const auto& [chunk_id, per_res] : grouped) {
    bool complete = true;
    for (std::size_t i = 0; i < resolutions.size(); ++i) {
      if (per_res[i].size() < 2) {
        missing += chunk_id + " lacks points for " +
                   resolutions.at(static_cast<int>(i) + 1).label + "; ";
        complete = false;
      }
    }
    if (!complete) continue;
    RateQualitySurface surface;
    surface.resolutions = resolutions;
    for (std::size_t i = 0; i < resolutions.size(); ++i) {
      surface.curves.push_back(
          build_curve(resolutions.at(static_cast<int>(i) + 1), per_res[i]));
    }
    surfaces.emplace(chunk_id, std::move(surface));
  }
  if (!missing.empty()) {
    throw Error(Errc::bad_params, "incomplete chunks: " + missing);
  }
  return surfaces;
}

std::vector<RQPoint> rq_points_from_rows(const std::vector<RqRow>& rows) {
  std::vector<RQPoint> points;
  points.reserve(rows.size());
  for (const RqRow& row : rows) {
    if (row.bitrate_bps <= 0.0) {
      throw Error(Errc::bad_params, "bitrate must be > 0");
    }
    points.push_back(RQPoint{std::log2(row.bitrate_bps), row.quality_db});
  }
  return points;
}

std::string ladder_to_json(const BitrateLadder& ladder) {
  json j;
  j["resolutions"] = resolutions_to_json(ladder.resolutions);
  j["crossover_log2_bps"] = ladder.crossover_log2_rates;
  return j.dump(2) + "\n";
}

BitrateLadder ladder_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::bad_params, std::string("ladder json: ") + e.what());
  }
  BitrateLadder ladder{resolutions_from_json(j.at("resolutions")),
                       j.at("crossover_log2_bps").get<std::vector<double>>()};
  ladder.validate();
  return ladder;
}

void write_ladder_file(const std::string& path, const BitrateLadder& ladder) {
  write_text_file(path, ladder_to_json(ladder));
}

BitrateLadder read_ladder_file(const std::string& path) {
  return ladder_from_json(read_text_file(path));
}

std::vector<FeatureRow> read_feature_csv(std::istream& in) {
  std::vector<FeatureRow> rows;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("chunk_id", 0) == 0) continue;
    }
    const auto fields = split_csv_line(line);
    const std::string ctx = "feature csv line " + std::to_string(line_no);
    if (fields.size() != FeatureVector::kCount + 1) {
      throw Error(Errc::bad_params, ctx + ": expected " +
                                        std::to_string(FeatureVector::kCount + 1) +
                                        " fields");
    }
    std::array<double, FeatureVector::kCount> values;
    for (int f = 0; f < FeatureVector::kCount; ++f) {
      values[static_cast<std::size_t>(f)] =
          parse_double(fields[static_cast<std::size_t>(f) + 1], ctx);
    }
    const FeatureVector fv = FeatureVector::from_array(values);
    try {
      fv.validate();
    } catch (const Error& e) {
      throw Error(e.code(), ctx + ": " + e.what());
    }
    rows.push_back(FeatureRow{fields[0], fv});
  }
  return rows;
}

std::vector<FeatureRow> read_feature_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path);
  return read_feature_csv(in);
}

void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows) {
  out << "chunk_id";
  for (const std::string& name : FeatureVector::names()) out << ',' << name;
  out << '\n';
  for (const FeatureRow& row : rows) {
    out << row.chunk_id;
    for (double v : row.features.to_array()) out << ',' << format_double(v);
    out << '\n';
  }
}

namespace {

json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const TreeNode& n : tree.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.gain});
  }
  return nodes;
}

RegressionTree tree_from_json(const json& nodes) {
  RegressionTree tree;
  for (const json& n : nodes) {
    tree.nodes.push_back(TreeNode{n.at(0).get<int>(), n.at(1).get<double>(),
                                  n.at(2).get<int>(), n.at(3).get<int>(),
                                  n.at(4).get<double>(), n.at(5).get<double>()});
  }
  return tree;
}

}  // namespace

std::string classifier_to_json(const ClassifierModel& model) {
  json j;
  j["version"] = 1;
  j["kind"] = "classifier";
  j["feature_mask"] = model.feature_mask;
  j["standardization"] = standardizer_to_json(model.standardizer);
  json payload;
  payload["resolutions"] = resolutions_to_json(model.resolutions);
  payload["grid"] = grid_to_json(model.grid);
  payload["class_count"] = model.gbt.class_count();
  payload["feature_count"] = model.gbt.feature_count();
  payload["learning_rate"] = model.gbt.learning_rate();
  payload["base_scores"] = model.gbt.base_scores();
  json rounds = json::array();
  for (const auto& trees : model.gbt.rounds()) {
    json round = json::array();
    for (const RegressionTree& tree : trees) round.push_back(tree_to_json(tree));
    rounds.push_back(std::move(round));
  }
  payload["trees"] = std::move(rounds);
  j["payload"] = std::move(payload);
  return j.dump() + "\n";
}

ClassifierModel classifier_from_json(const std::string& text) {
  const json j = check_model_header(text, "classifier");
  const json& payload = j.at("payload");
  std::vector<std::vector<RegressionTree>> rounds;
  for (const json& round : payload.at("trees")) {
    std::vector<RegressionTree> trees;
    for (const json& tree : round) trees.push_back(tree_from_json(tree));
    rounds.push_back(std::move(trees));
  }
  ClassifierModel model{
      resolutions_from_json(payload.at("resolutions")),
      j.at("feature_mask").get<std::vector<bool>>(),
      standardizer_from_json(j.at("standardization")),
      grid_from_json(payload.at("grid")),
      GbtClassifier::assemble(payload.at("class_count").get<int>(),
                              payload.at("feature_count").get<std::size_t>(),
                              payload.at("learning_rate").get<double>(),
                              payload.at("base_scores").get<std::vector<double>>(),
                              std::move(rounds))};
  return model;
}

std::string regressor_to_json(const RegressorModel& model) {
  json j;
  j["version"] = 1;
  j["kind"] = "regressor";
  j["feature_mask"] = model.feature_mask;
  j["standardization"] = standardizer_to_json(model.standardizer);
  json payload;
  payload["resolutions"] = resolutions_to_json(model.resolutions);
  payload["grid"] = grid_to_json(model.grid);
  json gps = json::array();
  for (const GpRegressor& gp : model.gps) {
    json g;
    g["signal_variance"] = gp.params().signal_variance;
    g["length_scale"] = gp.params().length_scale;
    g["noise_variance"] = gp.params().noise_variance;
    g["target_mean"] = gp.target_mean();
    const Eigen::MatrixXd& X = gp.training_inputs();
    json x_train = json::array();
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < X.cols(); ++c) row.push_back(X(r, c));
      x_train.push_back(std::move(row));
    }
    g["x_train"] = std::move(x_train);
    json alpha = json::array();
    for (Eigen::Index r = 0; r < gp.solve_vector().size(); ++r) {
      alpha.push_back(gp.solve_vector()(r));
    }
    g["alpha"] = std::move(alpha);
    gps.push_back(std::move(g));
  }
  payload["gps"] = std::move(gps);
  j["payload"] = std::move(payload);
  return j.dump() + "\n";
}

RegressorModel regressor_from_json(const std::string& text) {
  const json j = check_model_header(text, "regressor");
  const json& payload = j.at("payload");
  RegressorModel model{resolutions_from_json(payload.at("resolutions")),
                       j.at("feature_mask").get<std::vector<bool>>(),
                       standardizer_from_json(j.at("standardization")),
                       grid_from_json(payload.at("grid")),
                       {}};
  for (const json& g : payload.at("gps")) {
    const json& x_train = g.at("x_train");
    const Eigen::Index rows = static_cast<Eigen::Index>(x_train.size());
    const Eigen::Index cols =
        rows > 0 ? static_cast<Eigen::Index>(x_train.at(0).size()) : 0;
    Eigen::MatrixXd X(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        X(r, c) = x_train.at(static_cast<std::size_t>(r))
                      .at(static_cast<std::size_t>(c))
                      .get<double>();
      }
    }
    const auto alpha_vec = g.at("alpha").get<std::vector<double>>();
    Eigen::VectorXd alpha(static_cast<Eigen::Index>(alpha_vec.size()));
    for (std::size_t i = 0; i < alpha_vec.size(); ++i) {
      alpha(static_cast<Eigen::Index>(i)) = alpha_vec[i];
    }
    model.gps.push_back(GpRegressor::assemble(
        std::move(X), std::move(alpha),
        GpKernelParams{g.at("signal_variance").get<double>(),
                       g.at("length_scale").get<double>(),
                       g.at("noise_variance").get<double>()},
        g.at("target_mean").get<double>()));
  }
  if (model.gps.size() != model.resolutions.size() - 1) {
    throw Error(Errc::bad_params, "regressor model needs |S|-1 gps");
  }
  return model;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_failure, "cannot open " + path);
  out << text;
  if (!out) throw Error(Errc::io_failure, "write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string aggregation_report_to_json(const AggregationReport& report) {
  json j;
  j["final_ladder"] = json::parse(ladder_to_json(report.final_ladder));
  j["total_encodes"] = report.total_encodes;
  j["disagreements"] = report.disagreements;
  json points = json::array();
  for (const AggregationPoint& p : report.points) {
    points.push_back({{"log2_rate", p.log2_rate},
                      {"classifier_index", p.classifier_index},
                      {"regressor_index", p.regressor_index},
                      {"agree", p.agree},
                      {"encodes", p.encodes},
                      {"chosen_index", p.chosen_index}});
  }
  j["points"] = std::move(points);
  return j.dump(2) + "\n";
}

namespace {

json metrics_to_json(const CvMetrics& m) {
  return {{"accuracy", m.accuracy},
          {"bdbr_vs_gt", m.bdbr_vs_gt},
          {"bdbr_vs_static", m.bdbr_vs_static},
          {"encodes", m.encodes}};
}

}  // namespace

std::string cv_report_to_json(const CvReport& report) {
  json j;
  j["version"] = 1;
  j["methods"] = report.methods;
  j["folds"] = report.per_fold.size();
  json per_fold = json::array();
  for (std::size_t f = 0; f < report.per_fold.size(); ++f) {
    json fold;
    fold["fold"] = f;
    json metrics;
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
      metrics[report.methods[m]] = metrics_to_json(report.per_fold[f][m]);
    }
    fold["metrics"] = std::move(metrics);
    per_fold.push_back(std::move(fold));
  }
  j["per_fold"] = std::move(per_fold);
  json averaged;
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    averaged[report.methods[m]] = metrics_to_json(report.averaged[m]);
  }
  j["averaged"] = std::move(averaged);
  j["fold_chunks"] = report.fold_chunks;
  j["total_disagreements"] = report.total_disagreements;
  return j.dump(2) + "\n";
}

void write_cv_report_csv(std::ostream& out, const CvReport& report) {
  out << "fold,method,accuracy,bdbr_vs_gt,bdbr_vs_static,encodes\n";
  for (std::size_t f = 0; f < report.per_fold.size(); ++f) {
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
      const CvMetrics& metrics = report.per_fold[f][m];
      out << f << ',' << report.methods[m] << ',' << format_double(metrics.accuracy)
          << ',' << format_double(metrics.bdbr_vs_gt) << ','
          << format_double(metrics.bdbr_vs_static) << ','
          << format_double(metrics.encodes) << '\n';
    }
  }
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    const CvMetrics& metrics = report.averaged[m];
    out << "mean," << report.methods[m] << ',' << format_double(metrics.accuracy)
        << ',' << format_double(metrics.bdbr_vs_gt) << ','
        << format_double(metrics.bdbr_vs_static) << ','
        << format_double(metrics.encodes) << '\n';
  }
}

void write_cv_per_sequence_csv(std::ostream& out, const CvReport& report) {
  out << "chunk_id,fold,method,accuracy,bdbr_vs_gt,bdbr_vs_static,encodes\n";
  for (const CvSequenceResult& row : report.per_sequence) {
    out << row.chunk_id << ',' << row.fold << ',' << row.method << ','
        << format_double(row.accuracy) << ',' << format_double(row.bdbr_vs_gt) << ','
        << format_double(row.bdbr_vs_static) << ',' << row.encodes << '\n';
  }
}

SyntheticParams synthetic_params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::bad_params, std::string("synthetic params json: ") + e.what());
  }
  SyntheticParams params;
  params.ceiling_db = j.at("ceiling_db").get<std::vector<double>>();
  params.steepness = j.at("steepness").get<std::vector<double>>();
  params.onset_log2 = j.at("onset_log2").get<std::vector<double>>();
  return params;
}

AppConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::bad_config, std::string("config json: ") + e.what());
  }
  if (j.contains("version") && j.at("version").get<int>() != 1) {
    throw Error(Errc::version_mismatch, "unsupported config version");
  }

  AppConfig cfg;
  if (j.contains("resolutions")) {
    std::vector<std::tuple<int, int, std::string>> entries;
    for (const json& r : j.at("resolutions")) {
      entries.emplace_back(r.at("width").get<int>(), r.at("height").get<int>(),
                           r.at("label").get<std::string>());
    }
    cfg.resolutions = ResolutionSet::from_list(entries);
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (g.contains("min_bps")) cfg.min_bps = g.at("min_bps").get<double>();
    if (g.contains("max_bps")) cfg.max_bps = g.at("max_bps").get<double>();
    if (g.contains("points")) cfg.grid_points = g.at("points").get<int>();
  }
  if (j.contains("glcm")) {
    const json& g = j.at("glcm");
    if (g.contains("gray_levels")) cfg.glcm.gray_levels = g.at("gray_levels").get<int>();
    if (g.contains("distance")) cfg.glcm.distance = g.at("distance").get<int>();
    if (g.contains("directions")) {
      cfg.glcm.directions_deg = g.at("directions").get<std::vector<int>>();
    }
    if (g.contains("symmetric")) cfg.glcm.symmetric = g.at("symmetric").get<bool>();
  }
  if (j.contains("gbt")) {
    const json& g = j.at("gbt");
    if (g.contains("rounds")) cfg.gbt.rounds = g.at("rounds").get<int>();
    if (g.contains("max_depth")) cfg.gbt.max_depth = g.at("max_depth").get<int>();
    if (g.contains("learning_rate")) {
      cfg.gbt.learning_rate = g.at("learning_rate").get<double>();
    }
    if (g.contains("min_leaf")) cfg.gbt.min_leaf = g.at("min_leaf").get<int>();
  }
  if (j.contains("gp")) {
    const json& g = j.at("gp");
    const auto axis = [](const json& a, GpGridAxis& out) {
      if (a.contains("min")) out.min = a.at("min").get<double>();
      if (a.contains("max")) out.max = a.at("max").get<double>();
      if (a.contains("count")) out.count = a.at("count").get<int>();
    };
    if (g.contains("length_scale")) axis(g.at("length_scale"), cfg.gp.length_scale);
    if (g.contains("signal_variance")) {
      axis(g.at("signal_variance"), cfg.gp.signal_variance);
    }
    if (g.contains("noise_variance")) {
      axis(g.at("noise_variance"), cfg.gp.noise_variance);
    }
    if (g.contains("jitter")) cfg.gp.jitter = g.at("jitter").get<double>();
  }
  if (j.contains("rfe_target_k")) cfg.rfe_target_k = j.at("rfe_target_k").get<int>();
  if (j.contains("aggregator") && j.at("aggregator").contains("fast")) {
    cfg.aggregator_fast = j.at("aggregator").at("fast").get<bool>();
  }
  if (j.contains("encoder")) {
    const json& e = j.at("encoder");
    if (e.contains("template")) {
      cfg.encoder_template = e.at("template").get<std::string>();
    }
    if (e.contains("cache_dir")) cfg.cache_dir = e.at("cache_dir").get<std::string>();
    if (e.contains("workdir")) cfg.workdir = e.at("workdir").get<std::string>();
  }
  if (j.contains("chunk_frames")) cfg.chunk_frames = j.at("chunk_frames").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

AppConfig load_config_file(const std::string& path) {
  return config_from_json(read_text_file(path));
}

}  // namespace ladder
