#include <doctest.h>

#include <cmath>
#include <random>

#include "myoeval/error.hpp"
#include "myoeval/features.hpp"

using namespace myoeval;

namespace {

using V = std::vector<double>;

// Pairwise definitions, written out longhand.
std::size_t count_zero_crossings(const V& x, double threshold) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const bool opposite = (x[i] > 0 && x[i + 1] < 0) || (x[i] < 0 && x[i + 1] > 0);
    if (opposite && std::fabs(x[i] - x[i + 1]) >= threshold) ++n;
  }
  return n;
}

std::size_t count_slope_changes(const V& x, double threshold) {
  std::size_t n = 0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double l = x[i] - x[i - 1], r = x[i] - x[i + 1];
    if (l * r > 0 && std::max(std::fabs(l), std::fabs(r)) >= threshold) ++n;
  }
  return n;
}

Recording recording_of(std::vector<V> channels) {
  Recording rec;
  rec.channels = std::move(channels);
  rec.timeline.entries = {{0.0, MotionClass::NM}};
  return rec;
}

}  // namespace

TEST_CASE("mean absolute value") {
  CHECK(mav(V{1, -1, 2, -2}) == 1.5);
  CHECK(mav(V{0, 0, 0}) == 0.0);
  CHECK(mav(V{3}) == 3.0);
  CHECK_THROWS_AS(mav(V{}), ParameterError);
}

TEST_CASE("waveform length") {
  CHECK(wl(V{0, 1, 0, 1}) == 3.0);
  CHECK(wl(V{2, 2, 2}) == 0.0);
  CHECK(wl(V{0, 5}) == 5.0);
  CHECK_THROWS_AS(wl(V{1}), ParameterError);
}

TEST_CASE("zero crossings") {
  CHECK(zc(V{1, -1, 1, -1}, 0.0) == 3);
  CHECK(zc(V{1, 2, 3}, 0.0) == 0);
  // Each pair of [1, -1, 1] differs by exactly 2.
  const V alt{1, -1, 1};
  for (double t : {0.0, 2.0, 2.1, 2.5, 3.0}) CHECK(zc(alt, t) == count_zero_crossings(alt, t));
  CHECK(zc(alt, 2.0) == 2);
  CHECK(zc(alt, 2.1) == 0);
  CHECK(zc(alt, 2.5) == 0);
  CHECK(zc(alt, 3.0) == 0);
  CHECK_THROWS_AS(zc(alt, -1.0), ParameterError);
}

TEST_CASE("slope sign changes") {
  CHECK(ssc(V{0, 1, 0, 1, 0}, 0.0) == 3);
  CHECK(ssc(V{1, 2, 3, 4, 5}, 0.0) == 0);
  CHECK(ssc(V{0, 2, 1, 3, 0}, 0.0) == count_slope_changes(V{0, 2, 1, 3, 0}, 0.0));
  CHECK(ssc(V{0, 2, 1, 3, 0}, 0.0) == 3);
  CHECK(ssc(V{0, 2, 1, 3, 0}, 2.5) == 1);
  CHECK_THROWS_AS(ssc(V{1, 2}, 0.0), ParameterError);
}

TEST_CASE("feature definitions agree with longhand counts on random frames") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> small(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    V x(3 + trial % 40);
    // Integer-valued frames hit exact zeros and ties.
    for (auto& v : x) v = trial % 2 ? noise(rng) : small(rng);
    const double t = trial % 3 == 0 ? 0.0 : std::fabs(noise(rng));
    CHECK(zc(x, t) == count_zero_crossings(x, t));
    CHECK(ssc(x, t) == count_slope_changes(x, t));
    CHECK(zc(x, t) <= x.size());
    CHECK(ssc(x, t) <= x.size());
  }
}

TEST_CASE("amplitude scaling and concatenation") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    V x(64);
    for (auto& v : x) v = noise(rng);
    const double g = 0.1 + 10.0 * std::fabs(noise(rng));
    V y = x;
    for (auto& v : y) v *= g;
    CHECK(mav(y) == doctest::Approx(g * mav(x)).epsilon(1e-12));
    CHECK(wl(y) == doctest::Approx(g * wl(x)).epsilon(1e-12));
    CHECK(zc(y, 0.0) == zc(x, 0.0));
    CHECK(ssc(y, 0.0) == ssc(x, 0.0));

    const std::size_t cut = 1 + trial % 62;
    const V left(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(cut) + 1);
    const V right(x.begin() + static_cast<std::ptrdiff_t>(cut), x.end());
    CHECK(wl(x) == doctest::Approx(wl(left) + wl(right)).epsilon(1e-12));
  }
}

TEST_CASE("feature extraction layout") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 50.0);
  std::vector<V> channels(8, V(3000));
  for (auto& ch : channels)
    for (auto& v : ch) v = noise(rng);
  const auto rec = recording_of(channels);
  const auto series = extract_features(rec);
  REQUIRE(series.size() == 178);
  CHECK(series.dimension() == 32);
  for (std::size_t f = 0; f < series.size(); ++f) {
    const auto& fr = series.frames[f];
    REQUIRE(fr.values.size() == 32);
    CHECK(fr.index.ordinal == f);
    for (double v : fr.values) CHECK(std::isfinite(v));
  }

  // Channel-major MAV, WL, ZC, SSC for frame 5 of channel 3.
  const auto& fr = series.frames[5];
  const V frame(channels[3].begin() + 80, channels[3].begin() + 240);
  CHECK(fr.values[12] == doctest::Approx(mav(frame)));
  CHECK(fr.values[13] == doctest::Approx(wl(frame)));
  CHECK(fr.values[14] == zc(frame, 0.0));
  CHECK(fr.values[15] == ssc(frame, 0.0));

  const auto one = extract_features(recording_of({channels[0]}));
  CHECK(one.dimension() == 4);
  CHECK(one.frames.front().values.size() == 4);

  const auto quiet = extract_features(recording_of({V(500, 0.0)}));
  for (const auto& f : quiet.frames)
    for (double v : f.values) CHECK(v == 0.0);

  CHECK(extract_features(recording_of({V(100, 1.0)})).empty());
}
