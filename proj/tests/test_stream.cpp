#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "myoeval/error.hpp"
#include "myoeval/stream.hpp"
#include "support.hpp"

using namespace myoeval;
using testing::concat;
using testing::repeat;
using testing::stream_of;

namespace {

constexpr auto NM = MotionClass::NM;
constexpr auto WF = MotionClass::WF;
constexpr auto WE = MotionClass::WE;
constexpr auto CG = MotionClass::CG;
constexpr auto HO = MotionClass::HO;

// One-sample frames at 1 kHz: frame f is decided at (f + 1) ms.
constexpr FrameSpec kUnitFrames{1, 1};

PromptTimeline timeline_of(const std::vector<MotionClass>& classes, double prompt_s) {
  PromptTimeline t;
  t.prompt_duration_s = prompt_s;
  const double prompt_ms = std::round(prompt_s * 1000.0);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    t.entries.push_back({prompt_ms * static_cast<double>(i) / 1000.0, classes[i]});
  }
  return t;
}

// Class of the prompt active at each frame's decision time.
std::vector<MotionClass> ideal_decisions(const PromptTimeline& t, std::size_t frames) {
  std::vector<MotionClass> out;
  for (std::size_t f = 0; f < frames; ++f) {
    const double ms = static_cast<double>(f + 1);
    std::size_t p = 0;
    while (p + 1 < t.size() && t.entries[p + 1].start_s * 1000.0 <= ms) ++p;
    out.push_back(t.entries[p].cls);
  }
  return out;
}

// Windowed counts, ties to the class seen most recently.
std::vector<MotionClass> vote_by_counting(const std::vector<MotionClass>& d, std::size_t window) {
  std::vector<MotionClass> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
    std::array<int, kClassCount> count{};
    std::array<std::size_t, kClassCount> last{};
    for (std::size_t k = first; k <= i; ++k) {
      ++count[ordinal(d[k])];
      last[ordinal(d[k])] = k;
    }
    int best = -1;
    for (std::size_t c = 0; c < kClassCount; ++c) {
      if (count[c] == 0) continue;
      if (best < 0 || count[c] > count[best] || (count[c] == count[best] && last[c] > last[best])) {
        best = static_cast<int>(c);
      }
    }
    out.push_back(static_cast<MotionClass>(best));
  }
  return out;
}

}  // namespace

TEST_CASE("transition groups") {
  CHECK(transition_group(NM, WF) == TransitionGroup::R2A);
  CHECK(transition_group(WF, NM) == TransitionGroup::A2R);
  CHECK(transition_group(WF, WE) == TransitionGroup::A2A);
  CHECK_THROWS_AS(transition_group(WF, WF), ParameterError);
  std::array<int, 3> seen{};
  for (auto a : kAllClasses)
    for (auto b : kAllClasses)
      if (a != b) ++seen[static_cast<int>(transition_group(a, b))];
  CHECK(seen == std::array<int, 3>{6, 6, 30});
}

TEST_CASE("majority vote examples") {
  const auto spike = stream_of(concat({repeat(WF, 3), {WE}, repeat(WF, 5)}));
  const auto smoothed = majority_vote(spike, 9);
  for (std::size_t i = 0; i < smoothed.size(); ++i) CHECK(smoothed.cls(i) == WF);

  const auto step = stream_of(concat({repeat(WF, 5), repeat(WE, 5)}));
  CHECK(majority_vote(step, 9).cls(9) == WE);
  CHECK(majority_vote(step, 9).cls(8) == WF);
  CHECK(majority_vote(step, 1).decisions == step.decisions);

  CHECK_THROWS_AS(majority_vote(step, 8), ParameterError);
  CHECK_THROWS_AS(majority_vote(step, 0), ParameterError);
}

TEST_CASE("majority vote matches window counting") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 60;
    std::vector<MotionClass> d;
    // Few classes so ties are common.
    for (std::size_t i = 0; i < n; ++i) d.push_back(kAllClasses[std::uniform_int_distribution<int>(0, 2)(rng)]);
    auto s = stream_of(d);
    for (auto& dec : s.decisions) dec.confidence = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
    for (std::size_t w : {1, 3, 5, 9, 11}) {
      const auto out = majority_vote(s, w);
      const auto want = vote_by_counting(d, w);
      REQUIRE(out.size() == n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(out.cls(i) == want[i]);
        // Carried decision is the most confident member of its class in the window.
        const std::size_t first = i + 1 >= w ? i + 1 - w : 0;
        double best = 0.0;
        for (std::size_t k = first; k <= i; ++k)
          if (d[k] == want[i]) best = std::max(best, s[k].confidence);
        CHECK(out[i].confidence == best);
      }
    }
  }
}

TEST_CASE("ideal stream gives abutting spans shifted by the vote delay") {
  const auto t = timeline_of({NM, WF, WE, NM, HO}, 0.05);
  const auto s = stream_of(ideal_decisions(t, 250), kUnitFrames);
  const auto lab = find_steady_states(s, t, 4);
  REQUIRE(lab.steady.size() == 5);
  CHECK(lab.discarded_prompts.empty());
  CHECK(lab.dropped_transitions == 0);
  // Prompt p starts at frame 50p - 1 (its decision time is 50p ms).
  for (std::size_t p = 0; p < 5; ++p) {
    const std::size_t first = p == 0 ? 0 : 50 * p - 1;
    CHECK(lab.steady[p].start_frame == (first >= 4 ? first - 4 : 0));
    CHECK(lab.steady[p].cls == t.entries[p].cls);
    CHECK(lab.steady[p].prompt_index == p);
  }
  CHECK(lab.steady.back().end_frame == 246);
  REQUIRE(lab.transitions.size() == 4);
  for (const auto& tr : lab.transitions) CHECK(tr.size() == 0);
  CHECK(lab.transitions[0].group == TransitionGroup::R2A);
  CHECK(lab.transitions[1].group == TransitionGroup::A2A);
  CHECK(lab.transitions[2].group == TransitionGroup::A2R);

  for (const auto& d : compute_delays(lab, t)) CHECK(d.t_transition_ms == 0.0);
}

TEST_CASE("rest, active, rest gives R2A then A2R") {
  const auto t = timeline_of({NM, WF, NM}, 0.05);
  const auto lab = find_steady_states(stream_of(ideal_decisions(t, 150), kUnitFrames), t, 4);
  REQUIRE(lab.transitions.size() == 2);
  CHECK(lab.transitions[0].group == TransitionGroup::R2A);
  CHECK(lab.transitions[1].group == TransitionGroup::A2R);
}

TEST_CASE("a prompt whose class never shows up is bridged") {
  // Prompt frames: NM 0..48, WF 49..98, WE 99..148, HO 149..199.
  const auto t = timeline_of({NM, WF, WE, HO}, 0.05);
  const auto d = concat({repeat(NM, 49), repeat(WF, 50), repeat(CG, 50), repeat(HO, 51)});
  const auto lab = find_steady_states(stream_of(d, kUnitFrames), t, 4);

  REQUIRE(lab.steady.size() == 3);
  CHECK(lab.steady[0] == SteadyStateSpan{NM, 0, 45, 0});
  CHECK(lab.steady[1] == SteadyStateSpan{WF, 45, 95, 1});
  CHECK(lab.steady[2] == SteadyStateSpan{HO, 145, 196, 3});
  CHECK(lab.discarded_prompts == std::vector<std::size_t>{2});
  REQUIRE(lab.transitions.size() == 2);
  CHECK(lab.transitions[0] == TransitionSpan{NM, WF, 45, 45, TransitionGroup::R2A, 0, 1});
  CHECK(lab.transitions[1] == TransitionSpan{WF, HO, 95, 145, TransitionGroup::A2A, 1, 3});
  CHECK(lab.dropped_transitions == 1);

  const auto delays = compute_delays(lab, t);
  REQUIRE(delays.size() == 2);
  // Measured from the change that ended the WF prompt, at 100 ms.
  CHECK(delays[1].t_offset_ms == 96.0 - 100.0);
  CHECK(delays[1].t_onset_ms == 146.0 - 100.0);
  CHECK(delays[1].t_transition_ms == 50.0);
}

TEST_CASE("discarded first prompt and same-class bridges drop their transitions") {
  const auto t = timeline_of({NM, WF, NM, HO}, 0.05);
  // NM never appears during the first prompt.
  auto d = concat({repeat(CG, 49), repeat(WF, 50), repeat(NM, 50), repeat(HO, 51)});
  auto lab = find_steady_states(stream_of(d, kUnitFrames), t, 4);
  CHECK(lab.discarded_prompts == std::vector<std::size_t>{0});
  REQUIRE(lab.transitions.size() == 2);
  CHECK(lab.transitions[0].from == WF);
  CHECK(lab.dropped_transitions == 1);

  // WF missing between two NM prompts: the bridge would be NM to NM.
  d = concat({repeat(NM, 49), repeat(CG, 50), repeat(NM, 50), repeat(HO, 51)});
  lab = find_steady_states(stream_of(d, kUnitFrames), t, 4);
  CHECK(lab.discarded_prompts == std::vector<std::size_t>{1});
  REQUIRE(lab.transitions.size() == 1);
  CHECK(lab.transitions[0].from == NM);
  CHECK(lab.transitions[0].to == HO);
  CHECK(lab.dropped_transitions == 2);
}

TEST_CASE("timeline longer than the stream is rejected") {
  const auto t = timeline_of({NM, WF}, 0.05);
  CHECK_THROWS_AS(find_steady_states(stream_of(repeat(NM, 30), kUnitFrames), t, 4), ParameterError);
  CHECK_THROWS_AS(find_steady_states(DecisionStream{}, t, 4), ParameterError);
}

TEST_CASE("labeling invariants on random streams") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<MotionClass> prompts{NM};
    const std::size_t count = 2 + trial % 10;
    while (prompts.size() < count) {
      const auto c = testing::random_class(rng);
      if (c != prompts.back()) prompts.push_back(c);
    }
    const auto t = timeline_of(prompts, 0.03);
    const std::size_t n = 30 * count;
    // Ideal stream with random corruption.
    auto d = ideal_decisions(t, n);
    const double noise = (trial % 5) * 0.15;
    for (auto& c : d)
      if (std::uniform_real_distribution<double>(0, 1)(rng) < noise) c = testing::random_class(rng);
    const auto smoothed = majority_vote(stream_of(d, kUnitFrames), 5);
    const std::size_t delay = trial % 4;
    const auto lab = find_steady_states(smoothed, t, delay);

    CHECK(lab.transitions.size() + lab.dropped_transitions == count - 1);
    CHECK(lab.steady.size() + lab.discarded_prompts.size() == count);
    for (std::size_t i = 0; i < lab.steady.size(); ++i) {
      const auto& s = lab.steady[i];
      CHECK(s.start_frame < s.end_frame);
      CHECK(s.end_frame <= n);
      CHECK(s.cls == prompts[s.prompt_index]);
      if (i > 0) {
        CHECK(lab.steady[i - 1].end_frame <= s.start_frame);
        CHECK(lab.steady[i - 1].prompt_index < s.prompt_index);
      }
    }
    // Transitions fill the gaps between neighbouring spans of different class.
    std::size_t next = 0;
    for (std::size_t i = 0; i + 1 < lab.steady.size(); ++i) {
      const auto& a = lab.steady[i];
      const auto& b = lab.steady[i + 1];
      if (a.cls == b.cls) continue;
      REQUIRE(next < lab.transitions.size());
      const auto& tr = lab.transitions[next++];
      CHECK(tr.start_frame == a.end_frame);
      CHECK(tr.end_frame == b.start_frame);
      CHECK(tr.from == a.cls);
      CHECK(tr.to == b.cls);
      CHECK(tr.group == transition_group(a.cls, b.cls));
    }
    CHECK(next == lab.transitions.size());

    const auto delays = compute_delays(lab, t);
    REQUIRE(delays.size() == lab.transitions.size());
    for (std::size_t i = 0; i < delays.size(); ++i) {
      CHECK(delays[i].t_transition_ms == delays[i].t_onset_ms - delays[i].t_offset_ms);
      CHECK(std::fabs(delays[i].t_transition_ms / smoothed.frame_ms() -
                       static_cast<double>(lab.transitions[i].size())) < 1e-9);
    }
  }
}

TEST_CASE("delays are measured from the prompt change") {
  SegmentLabeling lab;
  lab.spec = {160, 16};
  lab.sample_rate = 1000.0;
  const std::size_t change_frame = 6963;  // decided at 6973 * 16 ms
  lab.steady = {{WF, 100, change_frame + 10, 0}, {WE, change_frame + 40, change_frame + 200, 1}};
  lab.transitions = {{WF, WE, change_frame + 10, change_frame + 40, TransitionGroup::A2A, 0, 1}};
  PromptTimeline t;
  t.entries = {{0.0, WF}, {6973.0 * 16.0 / 1000.0, WE}};
  const auto d = compute_delays(lab, t);
  REQUIRE(d.size() == 1);
  CHECK(d[0].t_offset_ms == doctest::Approx(160.0).epsilon(1e-12));
  CHECK(d[0].t_onset_ms == doctest::Approx(640.0).epsilon(1e-12));
  CHECK(d[0].t_transition_ms == doctest::Approx(480.0).epsilon(1e-12));
  CHECK(d[0].t_transition_ms == d[0].t_onset_ms - d[0].t_offset_ms);
}

TEST_CASE("labeling CSV lists spans in frame order") {
  const auto t = timeline_of({NM, WF}, 0.05);
  const auto d = concat({repeat(NM, 55), repeat(HO, 5), repeat(WF, 40)});
  const auto lab = find_steady_states(stream_of(d, kUnitFrames), t, 0);
  std::ostringstream out;
  write_labeling_csv(lab, out);
  CHECK(out.str() ==
        "kind,class,from,to,start_frame,end_frame,group,prompt\n"
        "steady,NM,,,0,55,,0\n"
        "transition,,NM,WF,55,60,R2A,1\n"
        "steady,WF,,,60,100,,1\n");
}
