#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "myoeval/dataset.hpp"
#include "myoeval/dsp.hpp"

namespace myoeval {

// Hudgins time-domain set. Per channel, in this order: MAV, WL, ZC, SSC.
// Vectors are channel-major: [MAV_0, WL_0, ZC_0, SSC_0, MAV_1, ...].
inline constexpr std::size_t kFeaturesPerChannel = 4;

using FeatureVector = std::vector<double>;

struct FeatureThresholds {
  double zc = 0.0;
  double ssc = 0.0;
};

double mav(std::span<const double> frame);
double wl(std::span<const double> frame);
std::size_t zc(std::span<const double> frame, double threshold);
std::size_t ssc(std::span<const double> frame, double threshold);

struct FeatureFrame {
  FrameIndex index;
  FeatureVector values;
};

struct FeatureFrameSeries {
  std::vector<FeatureFrame> frames;
  FrameSpec spec;
  std::size_t channel_count = 0;
  double sample_rate = 1000.0;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  std::size_t dimension() const { return channel_count * kFeaturesPerChannel; }
};

// One vector per frame; an empty series when the recording is shorter than
// one frame.
FeatureFrameSeries extract_features(const Recording& rec, const FrameSpec& spec = kDefaultFrameSpec,
                                    const FeatureThresholds& thresholds = {});

}  // namespace myoeval
