#include "myoeval/stream.hpp"

#include <algorithm>
#include <array>
#include <ostream>
#include <string>

#include "myoeval/error.hpp"

namespace myoeval {

std::string_view group_name(TransitionGroup g) {
  switch (g) {
    case TransitionGroup::R2A: return "R2A";
    case TransitionGroup::A2R: return "A2R";
    case TransitionGroup::A2A: return "A2A";
  }
  return "?";
}

TransitionGroup transition_group(MotionClass from, MotionClass to) {
  if (from == to) throw ParameterError("a transition needs two different classes");
  if (is_rest(from)) return TransitionGroup::R2A;
  if (is_rest(to)) return TransitionGroup::A2R;
  return TransitionGroup::A2A;
}

DecisionStream majority_vote(const DecisionStream& stream, std::size_t window) {
  if (window == 0 || window % 2 == 0) {
    throw ParameterError("majority-vote window must be odd and positive, got " + std::to_string(window));
  }
  DecisionStream out = stream;
  std::array<std::size_t, kClassCount> counts{};
  const std::size_t n = stream.size();
  for (std::size_t i = 0; i < n; ++i) {
    ++counts[ordinal(stream.cls(i))];
    if (i >= window) --counts[ordinal(stream.cls(i - window))];
    const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
    const std::size_t top = *std::max_element(counts.begin(), counts.end());
    // The most recent decision whose class reaches the top count wins.
    std::size_t j = i;
    while (counts[ordinal(stream.cls(j))] != top) --j;
    const MotionClass winner = stream.cls(j);
    std::size_t best = j;
    for (std::size_t k = first; k <= i; ++k) {
      if (stream.cls(k) == winner && stream[k].confidence >= stream[best].confidence) best = k;
    }
    out.decisions[i] = stream[best];
  }
  return out;
}

namespace {

// First frame whose decision time is at or after t_ms.
std::size_t first_frame_at(const DecisionStream& s, double t_ms) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (s.time_ms(mid) < t_ms) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

SegmentLabeling find_steady_states(const DecisionStream& smoothed, const PromptTimeline& timeline,
                                   std::size_t mv_delay_frames) {
  if (smoothed.empty()) throw ParameterError("decision stream is empty");
  if (timeline.entries.empty()) throw ParameterError("prompt timeline is empty");
  const std::size_t n = smoothed.size();
  const double last_ms = smoothed.time_ms(n - 1);
  if (timeline.entries.back().start_s * 1000.0 > last_ms) {
    throw ParameterError("timeline extends past the decision stream (last prompt at " +
                         std::to_string(timeline.entries.back().start_s) + " s, last decision at " +
                         std::to_string(last_ms / 1000.0) + " s)");
  }

  SegmentLabeling out;
  out.frame_count = n;
  out.spec = smoothed.spec;
  out.sample_rate = smoothed.sample_rate;

  const std::size_t prompts = timeline.size();
  auto shift = [&](std::size_t f) { return f > mv_delay_frames ? f - mv_delay_frames : 0; };

  std::vector<SteadyStateSpan> kept;
  for (std::size_t p = 0; p < prompts; ++p) {
    const MotionClass c = timeline.entries[p].cls;
    const std::size_t lo = first_frame_at(smoothed, timeline.entries[p].start_s * 1000.0);
    const std::size_t hi = p + 1 < prompts
                               ? first_frame_at(smoothed, timeline.entries[p + 1].start_s * 1000.0)
                               : n;
    std::size_t start = lo;
    while (start < hi && smoothed.cls(start) != c) ++start;
    if (start == hi) {
      out.discarded_prompts.push_back(p);
      continue;
    }
    std::size_t end = std::max(hi, start + 1);
    while (end < n && smoothed.cls(end) == c) ++end;

    SteadyStateSpan span{c, shift(start), shift(end), p};
    // Keep spans ordered and disjoint; a span squeezed to nothing is discarded.
    while (!kept.empty() && kept.back().end_frame > span.start_frame) {
      kept.back().end_frame = span.start_frame;
      if (kept.back().start_frame < kept.back().end_frame) break;
      out.discarded_prompts.push_back(kept.back().prompt_index);
      kept.pop_back();
    }
    if (span.start_frame >= span.end_frame) {
      out.discarded_prompts.push_back(p);
      continue;
    }
    kept.push_back(span);
  }
  std::sort(out.discarded_prompts.begin(), out.discarded_prompts.end());

  if (kept.empty()) {
    out.dropped_transitions = prompts - 1;
    return out;
  }
  out.dropped_transitions += kept.front().prompt_index;
  out.dropped_transitions += prompts - 1 - kept.back().prompt_index;
  for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
    const auto& a = kept[i];
    const auto& b = kept[i + 1];
    const std::size_t changes = b.prompt_index - a.prompt_index;
    if (a.cls == b.cls) {
      out.dropped_transitions += changes;
      continue;
    }
    out.dropped_transitions += changes - 1;
    out.transitions.push_back({a.cls, b.cls, a.end_frame, b.start_frame, transition_group(a.cls, b.cls),
                               a.prompt_index, b.prompt_index});
  }
  out.steady = std::move(kept);
  return out;
}

std::vector<TransitionDelays> compute_delays(const SegmentLabeling& labeling,
                                             const PromptTimeline& timeline) {
  std::vector<TransitionDelays> out;
  out.reserve(labeling.transitions.size());
  for (const auto& t : labeling.transitions) {
    if (t.from_prompt + 1 >= timeline.size()) throw ParameterError("labeling does not match timeline");
    const double change_ms = timeline.entries[t.from_prompt + 1].start_s * 1000.0;
    TransitionDelays d;
    d.t_offset_ms = labeling.time_ms(t.start_frame) - change_ms;
    d.t_onset_ms = labeling.time_ms(t.end_frame) - change_ms;
    d.t_transition_ms = d.t_onset_ms - d.t_offset_ms;
    out.push_back(d);
  }
  return out;
}

void write_labeling_csv(const SegmentLabeling& labeling, std::ostream& out) {
  out << "kind,class,from,to,start_frame,end_frame,group,prompt\n";
  // Order by start frame; an empty transition precedes the span it abuts.
  struct Row {
    std::size_t start;
    int rank;
    std::size_t index;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < labeling.steady.size(); ++i) rows.push_back({labeling.steady[i].start_frame, 1, i});
  for (std::size_t i = 0; i < labeling.transitions.size(); ++i) {
    rows.push_back({labeling.transitions[i].start_frame, 0, i});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.start != b.start ? a.start < b.start : a.rank < b.rank;
  });
  for (const Row& r : rows) {
    if (r.rank == 1) {
      const auto& s = labeling.steady[r.index];
      out << "steady," << class_name(s.cls) << ",,," << s.start_frame << ',' << s.end_frame << ",,"
          << s.prompt_index << '\n';
    } else {
      const auto& t = labeling.transitions[r.index];
      out << "transition,," << class_name(t.from) << ',' << class_name(t.to) << ',' << t.start_frame << ','
          << t.end_frame << ',' << group_name(t.group) << ',' << t.to_prompt << '\n';
    }
  }
}

}  // namespace myoeval
