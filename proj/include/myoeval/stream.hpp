#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "myoeval/dataset.hpp"
#include "myoeval/decision.hpp"

namespace myoeval {

enum class TransitionGroup { R2A, A2R, A2A };

inline constexpr TransitionGroup kAllGroups[] = {TransitionGroup::R2A, TransitionGroup::A2R,
                                                 TransitionGroup::A2A};

std::string_view group_name(TransitionGroup g);

// R2A iff from is NM, A2R iff to is NM, otherwise A2A. from == to is a
// ParameterError.
TransitionGroup transition_group(MotionClass from, MotionClass to);

inline constexpr std::size_t kDefaultMajorityWindow = 9;
inline constexpr std::size_t kDefaultMajorityDelay = 4;

// Causal modal filter over the current and previous window - 1 decisions.
// Ties go to the most recent of the tied classes; the emitted decision is
// the highest-confidence member of the winning class inside the window.
// Throws ParameterError for an even or zero window.
DecisionStream majority_vote(const DecisionStream& stream, std::size_t window = kDefaultMajorityWindow);

struct SteadyStateSpan {
  MotionClass cls = MotionClass::NM;
  std::size_t start_frame = 0;  // inclusive
  std::size_t end_frame = 0;    // exclusive
  std::size_t prompt_index = 0;

  std::size_t size() const { return end_frame - start_frame; }
  friend bool operator==(const SteadyStateSpan&, const SteadyStateSpan&) = default;
};

// Frames strictly between two consecutive steady states. Empty when the
// steady states abut.
struct TransitionSpan {
  MotionClass from = MotionClass::NM;
  MotionClass to = MotionClass::NM;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  TransitionGroup group = TransitionGroup::R2A;
  std::size_t from_prompt = 0;
  std::size_t to_prompt = 0;

  std::size_t size() const { return end_frame - start_frame; }
  friend bool operator==(const TransitionSpan&, const TransitionSpan&) = default;
};

struct SegmentLabeling {
  std::vector<SteadyStateSpan> steady;
  std::vector<TransitionSpan> transitions;
  std::vector<std::size_t> discarded_prompts;
  // Prompt changes that produced no transition: each discarded interior
  // prompt merges two changes into one bridge, a discarded first or last
  // prompt leaves its neighbouring change without a side, and a bridge whose
  // two sides share a class is dropped whole. transitions.size() +
  // dropped_transitions == prompts - 1.
  std::size_t dropped_transitions = 0;
  std::size_t frame_count = 0;
  FrameSpec spec = kDefaultFrameSpec;
  double sample_rate = 1000.0;

  double time_ms(std::size_t frame) const {
    return static_cast<double>(frame * spec.increment + spec.length) * 1000.0 / sample_rate;
  }
};

// Steady state of prompt p (class c): starts at the first frame at/after the
// prompt change whose smoothed decision is c, ends at the first frame at/after
// the next prompt change whose smoothed decision is not c. Both bounds move
// back by mv_delay_frames (clamped at 0). Prompts with no matching frame are
// discarded. Throws ParameterError when the timeline extends past the stream.
SegmentLabeling find_steady_states(const DecisionStream& smoothed, const PromptTimeline& timeline,
                                   std::size_t mv_delay_frames = kDefaultMajorityDelay);

struct TransitionDelays {
  double t_offset_ms = 0.0;
  double t_onset_ms = 0.0;
  double t_transition_ms = 0.0;  // always t_onset_ms - t_offset_ms
};

// Delays relative to the prompt change that ended the previous steady
// state's prompt. One entry per labeling.transitions element.
std::vector<TransitionDelays> compute_delays(const SegmentLabeling& labeling,
                                             const PromptTimeline& timeline);

// kind,class,from,to,start_frame,end_frame,group,prompt
void write_labeling_csv(const SegmentLabeling& labeling, std::ostream& out);

}  // namespace myoeval
