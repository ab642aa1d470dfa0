#include "myoeval/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "myoeval/error.hpp"

namespace myoeval {

using cplx = std::complex<double>;

void FrameSpec::validate() const {
  if (length < 1) throw ParameterError("frame length must be at least 1 sample");
  if (increment < 1 || increment > length) {
    throw ParameterError("frame increment must lie in [1, frame length]");
  }
}

std::size_t frame_count(std::size_t length, const FrameSpec& spec) {
  spec.validate();
  if (length < spec.length) return 0;
  return (length - spec.length) / spec.increment + 1;
}

std::vector<FrameIndex> segment_frames(std::size_t length, const FrameSpec& spec) {
  const std::size_t n = frame_count(length, spec);
  std::vector<FrameIndex> frames(n);
  for (std::size_t i = 0; i < n; ++i) {
    frames[i] = {i, i * spec.increment, i * spec.increment + spec.length};
  }
  return frames;
}

std::vector<double> SosFilter::apply(std::span<const double> signal) const {
  std::vector<double> y(signal.begin(), signal.end());
  for (const Biquad& s : sections_) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : y) {
      const double x = v;
      const double out = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * out + z2;
      z2 = s.b2 * x - s.a2 * out;
      v = out;
    }
  }
  return y;
}

SosFilter design_bandstop(double sample_rate, double center_hz, const NotchSettings& settings) {
  if (!(sample_rate > 0.0)) throw ParameterError("sample_rate must be positive");
  const double nyquist = sample_rate / 2.0;
  if (!(center_hz > 0.0) || !(center_hz < nyquist)) {
    throw ParameterError("band-stop center " + std::to_string(center_hz) +
                         " Hz must lie in (0, Nyquist = " + std::to_string(nyquist) + " Hz)");
  }
  if (settings.order < 1) throw ParameterError("filter order must be at least 1");
  const double lo = center_hz - settings.half_width_hz;
  const double hi = center_hz + settings.half_width_hz;
  if (!(settings.half_width_hz > 0.0) || !(lo > 0.0) || !(hi < nyquist)) {
    throw ParameterError("band-stop edges must lie strictly inside (0, Nyquist)");
  }

  const double k = 2.0 * sample_rate;
  const double w_lo = k * std::tan(M_PI * lo / sample_rate);
  const double w_hi = k * std::tan(M_PI * hi / sample_rate);
  const double w0_sq = w_lo * w_hi;
  const double bw = w_hi - w_lo;
  const int n = settings.order;

  // Each prototype pole p maps to the roots of s^2 - (bw/p) s + w0^2.
  std::vector<cplx> analog;
  for (int i = 0; i < n; ++i) {
    const cplx p = std::polar(1.0, M_PI * (2.0 * i + n + 1) / (2.0 * n));
    const cplx b = bw / p;
    const cplx disc = std::sqrt(b * b - 4.0 * w0_sq);
    analog.push_back((b + disc) / 2.0);
    analog.push_back((b - disc) / 2.0);
  }

  std::vector<cplx> upper;
  std::vector<double> real;
  for (const cplx& s : analog) {
    const cplx z = (k + s) / (k - s);
    if (std::abs(z.imag()) > 1e-12 * std::abs(z)) {
      if (z.imag() > 0.0) upper.push_back(z);
    } else {
      real.push_back(z.real());
    }
  }
  std::sort(real.begin(), real.end());

  // Zero pair on the unit circle at the digital center frequency.
  const double w0_digital = 2.0 * std::atan(std::sqrt(w0_sq) / k);
  const double zc = -2.0 * std::cos(w0_digital);

  std::vector<Biquad> sections;
  auto push = [&](double a1, double a2) {
    const double gain = (1.0 + a1 + a2) / (2.0 + zc);  // unit DC gain
    sections.push_back({gain, gain * zc, gain, a1, a2});
  };
  for (const cplx& z : upper) push(-2.0 * z.real(), std::norm(z));
  for (std::size_t i = 0; i + 1 < real.size(); i += 2) {
    push(-(real[i] + real[i + 1]), real[i] * real[i + 1]);
  }
  if (sections.size() != static_cast<std::size_t>(n)) {
    throw NumericalError("band-stop design produced an unpaired pole");
  }
  return SosFilter(std::move(sections));
}

std::vector<double> bandstop_filter(std::span<const double> signal, double sample_rate,
                                    double center_hz, const NotchSettings& settings) {
  return design_bandstop(sample_rate, center_hz, settings).apply(signal);
}

Recording apply_notch_bank(const Recording& rec, std::span<const double> centers_hz,
                           const NotchSettings& settings) {
  std::vector<SosFilter> filters;
  for (double c : centers_hz) filters.push_back(design_bandstop(rec.sample_rate, c, settings));
  Recording out = rec;
  for (auto& channel : out.channels) {
    for (const auto& f : filters) channel = f.apply(channel);
  }
  return out;
}

}  // namespace myoeval
