#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "myoeval/decision.hpp"
#include "myoeval/motion_class.hpp"

namespace testing {

inline myoeval::DecisionStream stream_of(const std::vector<myoeval::MotionClass>& classes,
                                         myoeval::FrameSpec spec = myoeval::kDefaultFrameSpec) {
  myoeval::DecisionStream s;
  s.spec = spec;
  for (auto c : classes) {
    myoeval::Decision d;
    d.cls = c;
    d.confidence = 1.0;
    d.scores[myoeval::ordinal(c)] = 1.0;
    s.decisions.push_back(d);
  }
  return s;
}

inline std::vector<myoeval::MotionClass> repeat(myoeval::MotionClass c, std::size_t n) {
  return std::vector<myoeval::MotionClass>(n, c);
}

inline std::vector<myoeval::MotionClass> concat(std::initializer_list<std::vector<myoeval::MotionClass>> parts) {
  std::vector<myoeval::MotionClass> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("myoeval-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline myoeval::MotionClass random_class(std::mt19937_64& rng) {
  return static_cast<myoeval::MotionClass>(std::uniform_int_distribution<int>(0, 6)(rng));
}

}  // namespace testing
