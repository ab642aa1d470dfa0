#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "myoeval/dataset.hpp"

namespace myoeval {

// Sliding-window segmentation in samples. At 1 kHz the default is a 160 ms
// frame advanced every 16 ms.
struct FrameSpec {
  std::size_t length = 160;
  std::size_t increment = 16;

  // length >= 1 and 1 <= increment <= length; throws ParameterError.
  void validate() const;

  friend bool operator==(const FrameSpec&, const FrameSpec&) = default;
};

inline constexpr FrameSpec kDefaultFrameSpec{160, 16};

struct FrameIndex {
  std::size_t ordinal = 0;
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;  // exclusive; also the frame's decision time

  friend bool operator==(const FrameIndex&, const FrameIndex&) = default;
};

// floor((length - frame_length) / increment) + 1, or 0 when too short.
std::size_t frame_count(std::size_t length, const FrameSpec& spec);
std::vector<FrameIndex> segment_frames(std::size_t length, const FrameSpec& spec);

// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Cascade of biquads run forward in direct form II transposed, starting from
// a zero state.
class SosFilter {
 public:
  SosFilter() = default;
  explicit SosFilter(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

  const std::vector<Biquad>& sections() const { return sections_; }
  std::vector<double> apply(std::span<const double> signal) const;

 private:
  std::vector<Biquad> sections_;
};

struct NotchSettings {
  int order = 3;              // Butterworth prototype order
  double half_width_hz = 2.0;  // -3 dB edges at center +- half_width
};

// Digital Butterworth band-stop via the lowpass-to-bandstop transform and a
// prewarped bilinear transform. Unit gain at DC. Produces `order` sections.
SosFilter design_bandstop(double sample_rate, double center_hz, const NotchSettings& settings = {});

std::vector<double> bandstop_filter(std::span<const double> signal, double sample_rate,
                                    double center_hz, const NotchSettings& settings = {});

inline constexpr double kPowerLineCenters[] = {60.0, 180.0, 300.0};

// Applies one band-stop per center to every channel, in the order given.
Recording apply_notch_bank(const Recording& rec, std::span<const double> centers_hz,
                           const NotchSettings& settings = {});

}  // namespace myoeval
