#include "myoeval/features.hpp"

#include <cmath>

#include "myoeval/error.hpp"

namespace myoeval {

double mav(std::span<const double> frame) {
  if (frame.empty()) throw ParameterError("mav needs a nonempty frame");
  double s = 0.0;
  for (double x : frame) s += std::abs(x);
  return s / static_cast<double>(frame.size());
}

double wl(std::span<const double> frame) {
  if (frame.size() < 2) throw ParameterError("wl needs at least 2 samples");
  double s = 0.0;
  for (std::size_t i = 1; i < frame.size(); ++i) s += std::abs(frame[i] - frame[i - 1]);
  return s;
}

std::size_t zc(std::span<const double> frame, double threshold) {
  if (threshold < 0.0) throw ParameterError("zc threshold must be non-negative");
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < frame.size(); ++i) {
    const double a = frame[i], b = frame[i + 1];
    if (a * b < 0.0 && std::abs(a - b) >= threshold) ++n;
  }
  return n;
}

std::size_t ssc(std::span<const double> frame, double threshold) {
  if (threshold < 0.0) throw ParameterError("ssc threshold must be non-negative");
  if (frame.size() < 3) throw ParameterError("ssc needs at least 3 samples");
  std::size_t n = 0;
  for (std::size_t i = 1; i + 1 < frame.size(); ++i) {
    const double left = frame[i] - frame[i - 1];
    const double right = frame[i] - frame[i + 1];
    if (left * right > 0.0 && std::max(std::abs(left), std::abs(right)) >= threshold) ++n;
  }
  return n;
}

FeatureFrameSeries extract_features(const Recording& rec, const FrameSpec& spec,
                                    const FeatureThresholds& thresholds) {
  rec.validate();
  FeatureFrameSeries series;
  series.spec = spec;
  series.channel_count = rec.channel_count();
  series.sample_rate = rec.sample_rate;
  const auto frames = segment_frames(rec.sample_count(), spec);
  series.frames.reserve(frames.size());
  for (const FrameIndex& f : frames) {
    FeatureVector v;
    v.reserve(series.dimension());
    for (const auto& channel : rec.channels) {
      const std::span<const double> w(channel.data() + f.start_sample, spec.length);
      v.push_back(mav(w));
      v.push_back(spec.length >= 2 ? wl(w) : 0.0);
      v.push_back(static_cast<double>(zc(w, thresholds.zc)));
      v.push_back(spec.length >= 3 ? static_cast<double>(ssc(w, thresholds.ssc)) : 0.0);
    }
    series.frames.push_back({f, std::move(v)});
  }
  return series;
}

}  // namespace myoeval
