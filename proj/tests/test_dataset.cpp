#include <doctest.h>

#include <set>
#include <sstream>
#include <utility>

#include "myoeval/dataset.hpp"
#include "myoeval/error.hpp"
#include "support.hpp"

using namespace myoeval;

namespace {

std::string to_text(const Recording& rec) {
  std::ostringstream out;
  write_recording(rec, out);
  return out.str();
}

Recording from_text(const std::string& text) {
  std::istringstream in(text);
  return read_recording(in);
}

Recording small_recording() {
  Recording rec;
  rec.sample_rate = 1000.0;
  rec.kind = RecordingKind::continuous_test;
  rec.timeline.prompt_duration_s = 0.002;
  rec.timeline.entries = {{0.0, MotionClass::NM}, {0.002, MotionClass::WF}};
  rec.channels = {{1, -2, 3, 4}, {0.5, 0.25, -0.125, 1e-9}};
  return rec;
}

}  // namespace

TEST_CASE("motion classes round-trip through their names") {
  std::set<std::string_view> names;
  for (auto c : kAllClasses) {
    names.insert(class_name(c));
    CHECK(class_from_name(class_name(c)) == c);
    CHECK(is_rest(c) == (c == MotionClass::NM));
  }
  CHECK(names.size() == 7);
  CHECK_FALSE(parse_class("nm").has_value());
  CHECK_THROWS_AS(class_from_name("XX"), FormatError);
}

TEST_CASE("training set has one ramped recording per class and repetition") {
  const auto profile = SyntheticSubjectProfile::make_default(1);
  const auto set = generate_training_set(profile, 4, 3.0);
  REQUIRE(set.size() == 28);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& rec = set[i];
    CHECK(rec.kind == RecordingKind::training_repetition);
    CHECK(rec.sample_count() == 3000);
    CHECK(rec.channel_count() == 8);
    CHECK(rec.set_id == static_cast<int>(i / 7));
    REQUIRE(rec.timeline.size() == 1);
    CHECK(rec.timeline.entries[0].cls == kAllClasses[i % 7]);
  }

  // The contraction builds up: the last half second is louder than the first
  // 100 ms for every active class.
  for (const auto& rec : set) {
    if (is_rest(rec.timeline.entries[0].cls)) continue;
    double early = 0.0, late = 0.0;
    for (const auto& ch : rec.channels) {
      for (std::size_t t = 0; t < 100; ++t) early += ch[t] * ch[t] / 100.0;
      for (std::size_t t = 2500; t < 3000; ++t) late += ch[t] * ch[t] / 500.0;
    }
    CHECK(late > 4.0 * early);
  }

  CHECK_THROWS_AS(generate_training_set(profile, 0, 3.0), ParameterError);
  CHECK_THROWS_AS(generate_training_set(profile, 1, 0.0), ParameterError);
  CHECK(generate_training_set(profile, 4, 3.0) == set);
}

TEST_CASE("continuous test visits every ordered class pair once") {
  const auto profile = SyntheticSubjectProfile::make_default(1);
  const auto rec = generate_continuous_test(profile, 3.0);
  CHECK(rec.kind == RecordingKind::continuous_test);
  REQUIRE(rec.timeline.size() == 43);
  CHECK(rec.timeline.entries.front().cls == MotionClass::NM);
  CHECK(rec.duration_s() == doctest::Approx(129.0));

  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 1; i < rec.timeline.size(); ++i) {
    const auto a = static_cast<int>(rec.timeline.entries[i - 1].cls);
    const auto b = static_cast<int>(rec.timeline.entries[i].cls);
    CHECK(a != b);
    CHECK(seen.insert({a, b}).second);
    CHECK(rec.timeline.entries[i].start_s == doctest::Approx(3.0 * i));
  }
  CHECK(seen.size() == 42);
  CHECK(rec.timeline.covers_all_transitions());
  CHECK(generate_continuous_test(profile, 3.0) == rec);
  CHECK_THROWS_AS(generate_continuous_test(profile, 0.0), ParameterError);
}

TEST_CASE("transition order depends on the seed but coverage does not") {
  std::set<std::vector<MotionClass>> orders;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto seq = random_transition_sequence(seed);
    REQUIRE(seq.size() == 43);
    CHECK(seq.front() == MotionClass::NM);
    CHECK(seq.back() == MotionClass::NM);
    PromptTimeline t;
    for (std::size_t i = 0; i < seq.size(); ++i) t.entries.push_back({3.0 * i, seq[i]});
    CHECK(t.covers_all_transitions());
    orders.insert(seq);
  }
  CHECK(orders.size() == 20);

  const auto a = generate_continuous_test(SyntheticSubjectProfile::make_default(1), 1.0);
  const auto b = generate_continuous_test(SyntheticSubjectProfile::make_default(2), 1.0);
  CHECK(a.timeline != b.timeline);
}

TEST_CASE("profile validation") {
  auto p = SyntheticSubjectProfile::make_default(3);
  CHECK_NOTHROW(p.validate());

  auto quiet = p;
  quiet.gains[ordinal(MotionClass::WF)] = quiet.gains[ordinal(MotionClass::NM)];
  CHECK_THROWS_AS(quiet.validate(), ParameterError);

  auto negative = p;
  negative.gains[ordinal(MotionClass::HO)][0] = -1.0;
  CHECK_THROWS_AS(negative.validate(), ParameterError);

  auto delay = p;
  delay.reaction_delay_mean_ms = 0.0;
  CHECK_THROWS_AS(delay.validate(), ParameterError);

  auto ramp = p;
  ramp.ramp_spread_ms = -1.0;
  CHECK_THROWS_AS(ramp.validate(), ParameterError);

  auto dip = p;
  dip.release_dip_depth = 1.0;
  CHECK_THROWS_AS(dip.validate(), ParameterError);
}

TEST_CASE("timeline invariants") {
  PromptTimeline t;
  t.entries = {{0.0, MotionClass::NM}, {1.0, MotionClass::WF}};
  CHECK_NOTHROW(t.validate(2.0));
  CHECK_THROWS_AS(t.validate(0.5), ParameterError);

  t.entries = {{0.0, MotionClass::NM}, {0.0, MotionClass::WF}};
  CHECK_THROWS_AS(t.validate(2.0), ParameterError);

  t.entries = {{0.0, MotionClass::NM}, {1.0, MotionClass::NM}};
  CHECK_THROWS_AS(t.validate(2.0), ParameterError);
  CHECK_FALSE(t.covers_all_transitions());
}

TEST_CASE("recording text format round-trips") {
  const auto rec = small_recording();
  CHECK(from_text(to_text(rec)) == rec);

  const auto profile = SyntheticSubjectProfile::make_default(5);
  for (const auto& r : generate_training_set(profile, 1, 0.5)) CHECK(from_text(to_text(r)) == r);
  const auto test = generate_continuous_test(profile, 0.25, 2);
  CHECK(from_text(to_text(test)) == test);

  const auto path = testing::scratch_dir("dataset") / "rec.csv";
  write_recording(test, path);
  CHECK(read_recording(path) == test);
}

TEST_CASE("malformed recording files are rejected with the offending field") {
  const auto text = to_text(small_recording());

  auto expect_error = [](const std::string& bad, const std::string& needle) {
    try {
      from_text(bad);
      FAIL("accepted malformed input");
    } catch (const FormatError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };

  std::string swapped = text;
  swapped.replace(swapped.find("0.002,WF"), 8, "0,WF");
  expect_error(swapped, "not strictly increasing");

  std::string short_row = text;
  short_row.replace(short_row.find("3,-0.125"), 8, "3");
  expect_error(short_row, "expected 2");

  std::string bad_kind = text;
  bad_kind.replace(bad_kind.find("continuous-test"), 15, "nonsense");
  expect_error(bad_kind, "kind");

  std::string bad_value = text;
  bad_value.replace(bad_value.find("0.25"), 4, "abc");
  expect_error(bad_value, "line");

  expect_error("not a recording\n", "magic");
  CHECK_THROWS_AS(read_recording(std::filesystem::path("/nonexistent/rec.csv")), FormatError);
}
