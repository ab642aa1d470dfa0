#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "myoeval/classify.hpp"
#include "myoeval/dsp.hpp"
#include "myoeval/features.hpp"
#include "myoeval/stats.hpp"
#include "myoeval/stream.hpp"

namespace myoeval {

// Metrics are measured on the raw classifier output by default; the smoothed
// stream is always used to locate the spans.
enum class MetricMode { raw, smoothed };

std::string_view metric_mode_name(MetricMode m);
MetricMode parse_metric_mode(std::string_view name);  // ParameterError if unknown

// Every field has a default; a config file only overrides what it names.
struct ExperimentConfig {
  // experiment
  std::size_t subjects = 10;
  std::uint64_t seed = 1;
  int training_sets = 4;
  int test_sets = 3;
  std::size_t threads = 0;  // 0: hardware concurrency

  // signal (synthetic data only)
  std::size_t channels = 8;
  double sample_rate_hz = 1000.0;
  double prompt_duration_s = 3.0;
  double rep_duration_s = 3.0;

  std::vector<double> notch_centers_hz{60.0, 180.0, 300.0};
  NotchSettings notch;
  FrameSpec frames = kDefaultFrameSpec;
  FeatureThresholds thresholds;

  std::vector<ClassifierKind> classifiers{ClassifierKind::LDA, ClassifierKind::QDA, ClassifierKind::KNN};
  double regularization = kDefaultRegularization;
  std::size_t knn_k = kDefaultNeighbors;

  std::size_t majority_window = kDefaultMajorityWindow;
  std::size_t mv_delay_frames = kDefaultMajorityDelay;
  MetricMode metric_mode = MetricMode::raw;
  double alpha = kDefaultAlpha;

  // When set, recordings come from a directory written by `generate`.
  std::optional<std::filesystem::path> data_dir;
  std::filesystem::path output_dir = "myoeval-out";

  // ParameterError for out-of-range values, NotImplementedError for
  // classifier kinds without an implementation.
  void validate() const;

  TrainerSpec trainer(ClassifierKind kind) const { return {kind, regularization, knn_k}; }
};

// YAML text with the sections experiment, signal, filter, frames, features,
// classifiers, stream, metrics, data and output. Unknown keys and malformed
// values raise FormatError. Does not validate ranges.
ExperimentConfig parse_config(std::string_view yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical JSON form used for provenance and hashing. Output paths are not
// part of it.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace myoeval
