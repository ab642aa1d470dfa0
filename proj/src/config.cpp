#include "myoeval/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "myoeval/error.hpp"

namespace myoeval {

std::string_view metric_mode_name(MetricMode m) { return m == MetricMode::raw ? "raw" : "smoothed"; }

MetricMode parse_metric_mode(std::string_view name) {
  if (name == "raw") return MetricMode::raw;
  if (name == "smoothed") return MetricMode::smoothed;
  throw ParameterError("metric mode must be 'raw' or 'smoothed', got '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (subjects < 1) throw ParameterError("experiment.subjects must be at least 1");
  if (training_sets < 2) throw ParameterError("experiment.training_sets must be at least 2");
  if (test_sets < 1) throw ParameterError("experiment.test_sets must be at least 1");
  if (channels < 1) throw ParameterError("signal.channels must be at least 1");
  if (!(sample_rate_hz > 0.0)) throw ParameterError("signal.sample_rate_hz must be positive");
  if (!(prompt_duration_s > 0.0) || !(rep_duration_s > 0.0)) throw ParameterError("durations must be positive");
  frames.validate();
  if (thresholds.zc < 0.0 || thresholds.ssc < 0.0) throw ParameterError("feature thresholds must be non-negative");
  if (classifiers.empty()) throw ParameterError("classifiers.kinds must name at least one classifier");
  std::set<ClassifierKind> seen;
  for (auto k : classifiers) {
    if (!is_implemented(k)) {
      throw NotImplementedError("classifier " + std::string(classifier_name(k)) +
                                " is not implemented (available: LDA, QDA, KNN)");
    }
    if (!seen.insert(k).second) throw ParameterError("classifier listed twice: " + std::string(classifier_name(k)));
  }
  if (regularization < 0.0) throw ParameterError("classifiers.regularization must be non-negative");
  if (knn_k < 1) throw ParameterError("classifiers.k must be at least 1");
  if (majority_window == 0 || majority_window % 2 == 0) throw ParameterError("stream.majority_window must be odd");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("metrics.alpha must lie in (0, 1)");
}

namespace {

using Keys = std::set<std::string>;

void check_keys(const YAML::Node& node, const std::string& section, const Keys& allowed) {
  if (!node.IsMap()) throw FormatError("config section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw FormatError("unknown config key '" + section + "." + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const std::string& section, const std::string& key, T& out) {
  const auto v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw FormatError("config key '" + section + "." + key + "' has a malformed value");
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("config is not valid YAML: ") + e.what());
  }
  ExperimentConfig cfg;
  if (root.IsNull()) return cfg;
  check_keys(root, "<root>",
             {"version", "experiment", "signal", "filter", "frames", "features", "classifiers", "stream", "metrics",
              "data", "output"});
  int version = 1;
  read(root, "", "version", version);
  if (version != 1) throw FormatError("unsupported config version " + std::to_string(version));

  if (auto n = root["experiment"]) {
    check_keys(n, "experiment", {"subjects", "seed", "training_sets", "test_sets", "threads"});
    read(n, "experiment", "subjects", cfg.subjects);
    read(n, "experiment", "seed", cfg.seed);
    read(n, "experiment", "training_sets", cfg.training_sets);
    read(n, "experiment", "test_sets", cfg.test_sets);
    read(n, "experiment", "threads", cfg.threads);
  }
  if (auto n = root["signal"]) {
    check_keys(n, "signal", {"channels", "sample_rate_hz", "prompt_duration_s", "rep_duration_s"});
    read(n, "signal", "channels", cfg.channels);
    read(n, "signal", "sample_rate_hz", cfg.sample_rate_hz);
    read(n, "signal", "prompt_duration_s", cfg.prompt_duration_s);
    read(n, "signal", "rep_duration_s", cfg.rep_duration_s);
  }
  if (auto n = root["filter"]) {
    check_keys(n, "filter", {"centers_hz", "order", "half_width_hz"});
    read(n, "filter", "centers_hz", cfg.notch_centers_hz);
    read(n, "filter", "order", cfg.notch.order);
    read(n, "filter", "half_width_hz", cfg.notch.half_width_hz);
  }
  if (auto n = root["frames"]) {
    check_keys(n, "frames", {"length", "increment"});
    read(n, "frames", "length", cfg.frames.length);
    read(n, "frames", "increment", cfg.frames.increment);
  }
  if (auto n = root["features"]) {
    check_keys(n, "features", {"zc_threshold", "ssc_threshold"});
    read(n, "features", "zc_threshold", cfg.thresholds.zc);
    read(n, "features", "ssc_threshold", cfg.thresholds.ssc);
  }
  if (auto n = root["classifiers"]) {
    check_keys(n, "classifiers", {"kinds", "regularization", "k"});
    std::vector<std::string> kinds;
    read(n, "classifiers", "kinds", kinds);
    if (n["kinds"]) {
      cfg.classifiers.clear();
      for (const auto& k : kinds) cfg.classifiers.push_back(parse_classifier_kind(k));
    }
    read(n, "classifiers", "regularization", cfg.regularization);
    read(n, "classifiers", "k", cfg.knn_k);
  }
  if (auto n = root["stream"]) {
    check_keys(n, "stream", {"majority_window", "mv_delay_frames"});
    read(n, "stream", "majority_window", cfg.majority_window);
    read(n, "stream", "mv_delay_frames", cfg.mv_delay_frames);
  }
  if (auto n = root["metrics"]) {
    check_keys(n, "metrics", {"mode", "alpha"});
    std::string mode = std::string(metric_mode_name(cfg.metric_mode));
    read(n, "metrics", "mode", mode);
    try {
      cfg.metric_mode = parse_metric_mode(mode);
    } catch (const ParameterError& e) {
      throw FormatError(e.what());
    }
    read(n, "metrics", "alpha", cfg.alpha);
  }
  if (auto n = root["data"]) {
    check_keys(n, "data", {"directory"});
    std::string dir;
    read(n, "data", "directory", dir);
    if (!dir.empty()) cfg.data_dir = dir;
  }
  if (auto n = root["output"]) {
    check_keys(n, "output", {"directory"});
    std::string dir;
    read(n, "output", "directory", dir);
    if (!dir.empty()) cfg.output_dir = dir;
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ParameterError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : cfg.classifiers) kinds.push_back(classifier_name(k));
  j["version"] = 1;
  j["experiment"] = {{"subjects", cfg.subjects},
                     {"seed", cfg.seed},
                     {"training_sets", cfg.training_sets},
                     {"test_sets", cfg.test_sets}};
  j["signal"] = {{"channels", cfg.channels},
                 {"sample_rate_hz", cfg.sample_rate_hz},
                 {"prompt_duration_s", cfg.prompt_duration_s},
                 {"rep_duration_s", cfg.rep_duration_s}};
  j["filter"] = {{"centers_hz", cfg.notch_centers_hz},
                 {"order", cfg.notch.order},
                 {"half_width_hz", cfg.notch.half_width_hz}};
  j["frames"] = {{"length", cfg.frames.length}, {"increment", cfg.frames.increment}};
  j["features"] = {{"zc_threshold", cfg.thresholds.zc}, {"ssc_threshold", cfg.thresholds.ssc}};
  j["classifiers"] = {{"kinds", kinds}, {"regularization", cfg.regularization}, {"k", cfg.knn_k}};
  j["stream"] = {{"majority_window", cfg.majority_window}, {"mv_delay_frames", cfg.mv_delay_frames}};
  j["metrics"] = {{"mode", metric_mode_name(cfg.metric_mode)}, {"alpha", cfg.alpha}};
  j["data"] = {{"directory", cfg.data_dir ? cfg.data_dir->generic_string() : std::string()}};
  return j;
}

}  // namespace myoeval
