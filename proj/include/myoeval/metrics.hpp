#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "myoeval/decision.hpp"
#include "myoeval/stream.hpp"

namespace myoeval {

// All rates are percentages of the decisions in the span.
struct SteadyStateMetrics {
  double ter = 0.0;
  double aer = 0.0;
  double ins = 0.0;
  std::size_t decision_count = 0;
  MotionClass cls = MotionClass::NM;
  std::size_t prompt_index = 0;
};

struct TransitionMetrics {
  double t_offset = 0.0;  // ms
  double t_onset = 0.0;
  double t_transition = 0.0;
  double ins = 0.0;
  double tce = 0.0;
  double pnm = 0.0;
  TransitionGroup group = TransitionGroup::R2A;
  MotionClass from = MotionClass::NM;
  MotionClass to = MotionClass::NM;
  std::size_t decision_count = 0;
};

// Adjacent pairs that are both active and differ, over the number of decisions.
double instability_percent(std::span<const MotionClass> decisions);

SteadyStateMetrics steady_metrics(const DecisionStream& stream, const SteadyStateSpan& span);

// Empty spans give zero INS/TCE/PNM; the delays pass through unchanged.
TransitionMetrics transition_metrics(const DecisionStream& stream, const TransitionSpan& span,
                                     const TransitionDelays& delays);

// ---------------------------------------------------------------------------
// Aggregation

// Column order follows the published steady-state and transition tables.
inline constexpr std::array<std::string_view, 3> kSteadyMetricNames = {"AER", "TER", "INS"};
inline constexpr std::array<std::string_view, 6> kTransitionMetricNames = {
    "T_OFFSET", "T_ONSET", "T_TRANSITION", "INS", "TCE", "PNM"};

struct SteadyRecord {
  std::string classifier;
  int participant = 0;
  int trial = 0;
  SteadyStateMetrics metrics;
};

struct TransitionRecord {
  std::string classifier;
  int participant = 0;
  int trial = 0;
  TransitionMetrics metrics;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample (n - 1); 0 when n == 1
  std::size_t n = 0;
};

// Absent (nullopt) when there are no values.
std::optional<Summary> summarize(std::span<const double> values);

// One averaged unit: a (classifier, participant, class) steady state or a
// (classifier, participant, from, to) transition, averaged over trials.
// A metric is absent when no trial contributed to it: INS/TCE/PNM skip
// trials whose transition span was empty.
struct Unit {
  std::string classifier;
  int participant = 0;
  std::optional<TransitionGroup> group;  // nullopt for steady-state units
  MotionClass from = MotionClass::NM;    // steady: the class
  MotionClass to = MotionClass::NM;
  std::vector<std::optional<double>> values;  // kSteadyMetricNames or kTransitionMetricNames order
};

// Rows are classifiers in report order, columns metric names.
struct MetricTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<std::optional<Summary>>> cells;
};

struct ParticipantRow {
  std::string classifier;
  int participant = 0;
  std::string table;  // "steady", "R2A", "A2R" or "A2A"
  std::vector<std::optional<Summary>> cells;
};

struct AggregateReport {
  std::vector<std::string> classifiers;
  std::vector<int> participants;
  MetricTable steady;
  std::array<MetricTable, 3> transitions;  // R2A, A2R, A2A
  std::vector<ParticipantRow> per_participant;
  std::vector<Unit> steady_units;
  std::vector<Unit> transition_units;
  std::size_t steady_span_count = 0;
  std::size_t transition_span_count = 0;
  std::array<std::size_t, 3> transition_spans_per_group{};

  // Unit values of one metric for one classifier (and group), in unit order.
  std::vector<double> steady_values(std::string_view classifier, std::size_t metric) const;
  std::vector<double> transition_values(std::string_view classifier, TransitionGroup group,
                                        std::size_t metric) const;
  // Per-participant mean of the unit values; nullopt where a participant
  // has none.
  std::vector<std::optional<double>> participant_means(std::string_view classifier,
                                                       std::optional<TransitionGroup> group,
                                                       std::size_t metric) const;
};

// Averages over trials per unit, then summarizes per classifier (and group)
// and per participant. `classifier_order` fixes the row order; classifiers
// absent from it are appended in first-seen order.
AggregateReport group_and_aggregate(std::span<const TransitionRecord> transitions,
                                    std::span<const SteadyRecord> steady,
                                    std::span<const std::string> classifier_order = {});

}  // namespace myoeval
