#include <doctest.h>

#include <complex>
#include <random>

#include "myoeval/dsp.hpp"
#include "myoeval/error.hpp"
#include "oracles.hpp"

using namespace myoeval;

namespace {

// |H(e^jw)| evaluated directly from the section coefficients.
double magnitude(const SosFilter& f, double freq_hz, double rate_hz) {
  const std::complex<double> z = std::polar(1.0, -2.0 * M_PI * freq_hz / rate_hz);
  std::complex<double> h = 1.0;
  for (const auto& s : f.sections()) {
    h *= (s.b0 + s.b1 * z + s.b2 * z * z) / (1.0 + s.a1 * z + s.a2 * z * z);
  }
  return std::abs(h);
}

}  // namespace

TEST_CASE("frame counts") {
  CHECK(frame_count(3000, {160, 16}) == 178);
  CHECK(frame_count(160, {160, 16}) == 1);
  CHECK(frame_count(159, {160, 16}) == 0);
  CHECK(segment_frames(159, {160, 16}).empty());

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t len = std::uniform_int_distribution<std::size_t>(1, 300)(rng);
    const std::size_t inc = std::uniform_int_distribution<std::size_t>(1, len)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 3000)(rng);
    const FrameSpec spec{len, inc};
    const auto frames = segment_frames(n, spec);
    REQUIRE(frames.size() == oracle::frame_count_by_walking(n, len, inc));
    CHECK(frame_count(n, spec) == frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
      CHECK(frames[i].ordinal == i);
      CHECK(frames[i].start_sample == i * inc);
      CHECK(frames[i].end_sample - frames[i].start_sample == len);
      CHECK(frames[i].end_sample <= n);
    }
  }
}

TEST_CASE("frame spec validation") {
  CHECK_THROWS_AS(FrameSpec({0, 1}).validate(), ParameterError);
  CHECK_THROWS_AS(FrameSpec({10, 0}).validate(), ParameterError);
  CHECK_THROWS_AS(FrameSpec({10, 11}).validate(), ParameterError);
  CHECK_NOTHROW(FrameSpec({10, 10}).validate());
}

TEST_CASE("band-stop removes the power-line tone and passes low frequencies") {
  const double fs = 1000.0;
  const auto tone = oracle::sine(60.0, fs, 10000);
  const auto out = bandstop_filter(tone, fs, 60.0);
  REQUIRE(out.size() == tone.size());
  CHECK(oracle::rms_after(out, 3000) < 0.1 * oracle::rms_after(tone, 3000));

  const auto low = oracle::sine(10.0, fs, 10000);
  const double ratio = oracle::rms_after(bandstop_filter(low, fs, 60.0), 3000) / oracle::rms_after(low, 3000);
  CHECK(ratio == doctest::Approx(1.0).epsilon(0.05));

  const std::vector<double> zeros(500, 0.0);
  for (double v : bandstop_filter(zeros, fs, 60.0)) CHECK(v == 0.0);
}

TEST_CASE("band-stop response shape") {
  const double fs = 1000.0;
  for (double center : kPowerLineCenters) {
    const auto f = design_bandstop(fs, center);
    CHECK(f.sections().size() == 3);
    CHECK(magnitude(f, 0.0, fs) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(magnitude(f, center, fs) < 0.1);
    CHECK(magnitude(f, center - 2.0, fs) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
    CHECK(magnitude(f, center + 2.0, fs) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
    CHECK(magnitude(f, center - 20.0, fs) > 0.99);
  }
  CHECK_THROWS_AS(design_bandstop(fs, 500.0), ParameterError);
  CHECK_THROWS_AS(design_bandstop(fs, 0.0), ParameterError);
  CHECK_THROWS_AS(design_bandstop(fs, 60.0, {0, 2.0}), ParameterError);
}

TEST_CASE("band-stop is linear and stable") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(4000), y(4000), mix(4000);
  const double a = 0.7, b = -1.3;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = u(rng);
    y[i] = u(rng);
    mix[i] = a * x[i] + b * y[i];
  }
  for (double center : kPowerLineCenters) {
    const auto fx = bandstop_filter(x, 1000.0, center);
    const auto fy = bandstop_filter(y, 1000.0, center);
    const auto fm = bandstop_filter(mix, 1000.0, center);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::fabs(fm[i] - (a * fx[i] + b * fy[i])) < 1e-9);
      CHECK(std::fabs(fx[i]) <= 100.0);
    }
  }
}

TEST_CASE("notch bank attenuates every listed tone") {
  const double fs = 1000.0;
  Recording rec;
  rec.sample_rate = fs;
  rec.timeline.entries = {{0.0, MotionClass::NM}};
  std::vector<double> x(10000, 0.0);
  for (double f : kPowerLineCenters) {
    const auto s = oracle::sine(f, fs, x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += s[i];
  }
  rec.channels = {x, x};
  const auto out = apply_notch_bank(rec, kPowerLineCenters);
  CHECK(out.timeline == rec.timeline);
  CHECK(out.sample_rate == rec.sample_rate);
  REQUIRE(out.channel_count() == 2);

  // Each tone's amplitude after filtering, by projection onto sin and cos.
  for (double f : kPowerLineCenters) {
    double s = 0.0, c = 0.0;
    const std::size_t skip = 4000;
    for (std::size_t i = skip; i < x.size(); ++i) {
      s += out.channels[0][i] * std::sin(2.0 * M_PI * f * i / fs);
      c += out.channels[0][i] * std::cos(2.0 * M_PI * f * i / fs);
    }
    const double amplitude = 2.0 * std::hypot(s, c) / static_cast<double>(x.size() - skip);
    CHECK(20.0 * std::log10(amplitude) < -20.0);
  }

  const auto same = apply_notch_bank(rec, std::vector<double>{});
  CHECK(same.channels == rec.channels);
  const std::vector<double> above{600.0};
  CHECK_THROWS_AS(apply_notch_bank(rec, above), ParameterError);
}
