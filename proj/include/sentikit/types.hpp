#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sentikit {

/// Three-way polarity label. The declaration order is the fixed class order
/// used everywhere a tie-break or matrix index is needed.
enum class Polarity { negative = 0, neutral = 1, positive = 2 };

inline constexpr std::array<Polarity, 3> kPolarities = {Polarity::negative, Polarity::neutral,
                                                        Polarity::positive};

inline constexpr std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::negative: return "negative";
    case Polarity::neutral: return "neutral";
    case Polarity::positive: return "positive";
  }
  return "?";
}

inline std::optional<Polarity> parse_polarity(std::string_view s) {
  if (s == "negative") return Polarity::negative;
  if (s == "neutral") return Polarity::neutral;
  if (s == "positive") return Polarity::positive;
  return std::nullopt;
}

inline Polarity parse_polarity_or_throw(std::string_view s) {
  auto p = parse_polarity(s);
  if (!p) throw std::invalid_argument("unknown polarity label: " + std::string(s));
  return *p;
}

inline constexpr std::size_t index_of(Polarity p) { return static_cast<std::size_t>(p); }

}  // namespace sentikit
