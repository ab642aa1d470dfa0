#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "myoeval/classify.hpp"
#include "myoeval/config.hpp"
#include "myoeval/dataset.hpp"
#include "myoeval/metrics.hpp"
#include "myoeval/stats.hpp"
#include "myoeval/stream.hpp"

namespace myoeval {

struct SubjectData {
  int participant = 0;
  std::vector<Recording> training;  // repetition recordings, set_id = training set
  std::vector<Recording> tests;     // continuous recordings, set_id = trial
};

// Synthetic subject `participant` (1-based) under cfg.seed.
SubjectData synthesize_subject(const ExperimentConfig& cfg, int participant);
std::uint64_t subject_seed(std::uint64_t base_seed, int participant);

// Filtered training repetitions as labeled feature frames (label from the
// single prompt of each repetition).
LabeledDataset build_training_dataset(const std::vector<Recording>& training, const ExperimentConfig& cfg);

struct TestEvaluation {
  SegmentLabeling labeling;
  DecisionStream raw;
  DecisionStream smoothed;
  std::vector<SteadyStateMetrics> steady;
  std::vector<TransitionMetrics> transitions;
  std::uint64_t input_hash = 0;  // of the recording as received
};

// Notch filter, features, classification, majority vote, segmentation and
// metrics, in that order. ParameterError when the model does not match the
// recording's channel count; EvaluationError when the recording is shorter
// than one frame or every prompt is discarded.
TestEvaluation evaluate_test_set(const ClassifierModel& model, const Recording& recording,
                                 const ExperimentConfig& cfg);

std::uint64_t recording_hash(const Recording& rec);

struct OfflineRecord {
  std::string classifier;
  int participant = 0;
  std::vector<double> fold_errors;  // percent
  double ter = 0.0;                 // percent, mean over folds
  std::vector<std::string> warnings;
};

struct EvaluationRecord {
  std::string classifier;
  int participant = 0;
  int trial = 0;
  std::uint64_t input_hash = 0;
  bool ok = true;
  std::string error;
  std::size_t prompts = 0;
  std::size_t steady_spans = 0;
  std::size_t transitions = 0;
  std::size_t dropped_transitions = 0;
  std::vector<std::size_t> discarded_prompts;
};

struct MetricComparison {
  std::string table;   // "offline", "steady", "R2A", ...; "groups" for group tests
  std::string metric;
  std::string scope;   // classifier name for group tests, "all" otherwise
  std::vector<std::string> labels;
  KWResult kruskal;
  std::optional<PosthocResult> posthoc;  // present when kruskal.p_value < alpha
};

struct CorrelationEntry {
  std::string table;
  std::string metric;
  std::optional<CorrelationResult> result;
  bool significant = false;
  std::string note;  // why result is absent
};

struct StatisticsBlock {
  double alpha = kDefaultAlpha;
  std::vector<MetricComparison> classifier_comparisons;
  std::vector<MetricComparison> group_comparisons;
  std::vector<CorrelationEntry> correlations;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<std::uint64_t> subject_seeds;
  std::vector<std::string> classifiers;
  std::vector<OfflineRecord> offline;
  MetricTable offline_table;
  AggregateReport aggregate;
  StatisticsBlock statistics;
  std::vector<EvaluationRecord> evaluations;
  double test_prompt_seconds = 0.0;  // prompts after the first, over all test recordings
  double test_recorded_seconds = 0.0;
};

// Offline TER, final models on all training sets, test evaluation, then
// aggregation and statistics. Results are merged in (participant,
// classifier) order, independent of thread scheduling. Stage failures are
// rethrown with the stage named in the message; a single failing test
// recording is recorded and skipped.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

StatisticsBlock compute_statistics(const AggregateReport& aggregate, const std::vector<OfflineRecord>& offline,
                                   double alpha);

// Dataset directory layout: manifest.json plus one recording file per
// training repetition and continuous test, under subjectNN/ folders.
void write_dataset(const std::filesystem::path& dir, const std::vector<SubjectData>& subjects,
                   std::uint64_t seed);
std::vector<SubjectData> load_dataset(const std::filesystem::path& dir);

}  // namespace myoeval
