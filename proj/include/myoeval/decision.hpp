#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "myoeval/dsp.hpp"
#include "myoeval/motion_class.hpp"

namespace myoeval {

// One classifier output. `scores` is indexed by class ordinal and sums to 1;
// classes unknown to the model score 0.
struct Decision {
  MotionClass cls = MotionClass::NM;
  double confidence = 0.0;
  std::array<double, kClassCount> scores{};

  friend bool operator==(const Decision&, const Decision&) = default;
};

// Per-frame decisions over a continuous recording. Frame i is decided at its
// end sample, so time_ms(i) = (i * increment + length) / rate.
struct DecisionStream {
  std::vector<Decision> decisions;
  FrameSpec spec = kDefaultFrameSpec;
  double sample_rate = 1000.0;

  std::size_t size() const { return decisions.size(); }
  bool empty() const { return decisions.empty(); }
  const Decision& operator[](std::size_t i) const { return decisions[i]; }
  MotionClass cls(std::size_t i) const { return decisions[i].cls; }

  // Defined for any ordinal, including one past the end.
  double time_ms(std::size_t frame) const {
    return static_cast<double>(frame * spec.increment + spec.length) * 1000.0 / sample_rate;
  }
  double frame_ms() const { return static_cast<double>(spec.increment) * 1000.0 / sample_rate; }
};

}  // namespace myoeval
