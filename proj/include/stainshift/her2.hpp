#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace stainshift {

enum class Her2Class : std::uint8_t { kZero = 0, kOnePlus = 1, kTwoPlus = 2, kThreePlus = 3 };

inline constexpr int kHer2ClassCount = 4;

// Membrane DAB concentration (OD units) painted for each class by the
// synthetic generator. Strictly increasing with the class.
inline constexpr std::array<double, kHer2ClassCount> kMembraneDabIntensity{0.0, 0.3, 0.7, 1.2};

inline constexpr double membrane_dab_intensity(Her2Class c) {
  return kMembraneDabIntensity[static_cast<std::size_t>(c)];
}

// Label-map value of a class; 0 is reserved for background.
inline constexpr std::uint8_t label_of(Her2Class c) { return static_cast<std::uint8_t>(c) + 1; }

inline constexpr std::string_view her2_score_name(Her2Class c) {
  constexpr std::array<std::string_view, kHer2ClassCount> names{"0", "1+", "2+", "3+"};
  return names[static_cast<std::size_t>(c)];
}

inline std::optional<Her2Class> parse_her2_score(std::string_view s) {
  for (int k = 0; k < kHer2ClassCount; ++k) {
    const auto c = static_cast<Her2Class>(k);
    if (her2_score_name(c) == s) return c;
  }
  return std::nullopt;
}

}  // namespace stainshift
