#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "myoeval/motion_class.hpp"

namespace myoeval {

struct PromptEntry {
  double start_s = 0.0;
  MotionClass cls = MotionClass::NM;

  friend bool operator==(const PromptEntry&, const PromptEntry&) = default;
};

// Ordered prompt schedule. Each prompt lasts until the next entry starts; the
// last one lasts until the end of the recording.
struct PromptTimeline {
  std::vector<PromptEntry> entries;
  double prompt_duration_s = 3.0;

  std::size_t size() const { return entries.size(); }

  // Strictly increasing starts, consecutive classes differ, and every start
  // lies in [0, duration_s]. Throws ParameterError.
  void validate(double duration_s) const;

  // True when every ordered pair of distinct classes occurs exactly once as
  // a consecutive (prev, next) pair.
  bool covers_all_transitions() const;

  friend bool operator==(const PromptTimeline&, const PromptTimeline&) = default;
};

enum class RecordingKind { training_repetition, continuous_test };

std::string_view kind_name(RecordingKind kind);

// Channels x time. `set_id` is the repetition set for training data and the
// trial index for continuous tests.
struct Recording {
  std::vector<std::vector<double>> channels;
  double sample_rate = 1000.0;
  PromptTimeline timeline;
  RecordingKind kind = RecordingKind::continuous_test;
  int set_id = 0;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t sample_count() const { return channels.empty() ? 0 : channels.front().size(); }
  double duration_s() const { return static_cast<double>(sample_count()) / sample_rate; }

  // At least one channel, equal lengths, positive rate, valid timeline.
  void validate() const;

  friend bool operator==(const Recording&, const Recording&) = default;
};

// Parameters of the synthetic amplitude-modulated noise model that stands in
// for recorded subjects. Gains and floors are in ADC counts (12-bit range).
struct SyntheticSubjectProfile {
  std::array<std::vector<double>, kClassCount> gains;
  std::array<double, kClassCount> noise_floor{};
  double reaction_delay_mean_ms = 250.0;
  double reaction_delay_spread_ms = 60.0;
  double ramp_mean_ms = 450.0;
  double ramp_spread_ms = 120.0;
  // Fraction of the active-to-active path pulled toward the NM level at the
  // midpoint of the ramp. Must stay below 1 so the dip never reaches NM.
  double release_dip_depth = 0.75;
  // Each active-to-active change in a continuous test scales the dip depth by
  // 1 - dip_depth_spread * U(0, 1), so some changes barely relax.
  double dip_depth_spread = 0.7;
  // Contraction variability. Each prompted contraction scales the active
  // part of its gains by exp(intensity_spread * N(0,1)) and each channel by
  // exp(pattern_spread * N(0,1)); a slow wobble of relative depth
  // fluctuation_depth modulates the level over time.
  double intensity_spread = 0.2;
  double pattern_spread = 0.15;
  double fluctuation_depth = 0.15;
  double sample_rate_hz = 1000.0;
  bool quantize = true;  // round to integer counts, clip to +-2047
  std::uint64_t seed = 1;

  std::size_t channel_count() const { return gains.front().size(); }

  // Throws ParameterError on negative gains, NM not quieter than every active
  // class, non-positive delay/ramp parameters or dip depth outside [0, 1).
  void validate() const;

  // Random per-class spatial patterns over `channels` electrodes.
  static SyntheticSubjectProfile make_default(std::uint64_t seed, std::size_t channels = 8);
};

// `reps` repetitions of each class; returned set-major (rep 0: NM..HO, rep 1...)
// with `set_id` = rep index.
std::vector<Recording> generate_training_set(const SyntheticSubjectProfile& profile, int reps,
                                             double rep_duration_s);

// One continuous recording: an initial NM prompt followed by 42 prompts that
// visit every ordered class pair once. `trial` selects an independent order.
Recording generate_continuous_test(const SyntheticSubjectProfile& profile, double prompt_duration_s,
                                   int trial = 0);

// Random Eulerian circuit over the complete directed graph on the 7 classes,
// starting and ending at NM (43 entries).
std::vector<MotionClass> random_transition_sequence(std::uint64_t seed);

void write_recording(const Recording& rec, std::ostream& out);
void write_recording(const Recording& rec, const std::filesystem::path& path);
Recording read_recording(std::istream& in);
Recording read_recording(const std::filesystem::path& path);

}  // namespace myoeval
