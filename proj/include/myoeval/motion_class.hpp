#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace myoeval {

// The seven contraction classes. NM is the only rest class; ordinals are
// stable and used for tie-breaking and serialization order.
enum class MotionClass : int { NM = 0, WF, WE, WP, WS, CG, HO };

inline constexpr std::size_t kClassCount = 7;

inline constexpr std::array<MotionClass, kClassCount> kAllClasses = {
    MotionClass::NM, MotionClass::WF, MotionClass::WE, MotionClass::WP,
    MotionClass::WS, MotionClass::CG, MotionClass::HO};

constexpr std::size_t ordinal(MotionClass c) { return static_cast<std::size_t>(c); }

constexpr bool is_rest(MotionClass c) { return c == MotionClass::NM; }
constexpr bool is_active(MotionClass c) { return c != MotionClass::NM; }

std::string_view class_name(MotionClass c);

// Accepts the two-letter code (case-sensitive). Returns nullopt otherwise.
std::optional<MotionClass> parse_class(std::string_view name);

// Throws FormatError for unknown names.
MotionClass class_from_name(std::string_view name);

}  // namespace myoeval
