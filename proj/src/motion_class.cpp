#include "myoeval/motion_class.hpp"

#include <string>

#include "myoeval/error.hpp"

namespace myoeval {

namespace {
constexpr std::array<std::string_view, kClassCount> kNames = {"NM", "WF", "WE", "WP",
                                                              "WS", "CG", "HO"};
}

std::string_view class_name(MotionClass c) { return kNames.at(ordinal(c)); }

std::optional<MotionClass> parse_class(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return kAllClasses[i];
  }
  return std::nullopt;
}

MotionClass class_from_name(std::string_view name) {
  if (auto c = parse_class(name)) return *c;
  throw FormatError("unknown motion class '" + std::string(name) + "'");
}

}  // namespace myoeval
