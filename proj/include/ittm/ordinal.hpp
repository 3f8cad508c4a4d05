#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace ittm {

/// Ordinal time below omega squared: omega * limits + offset.
struct OrdinalTime {
  std::uint64_t limits = 0;
  std::uint64_t offset = 0;

  static constexpr OrdinalTime finite(std::uint64_t n) { return {0, n}; }
  static constexpr OrdinalTime omega(std::uint64_t k = 1) { return {k, 0}; }

  constexpr bool is_limit() const { return limits >= 1 && offset == 0; }
  constexpr bool is_finite() const { return limits == 0; }
  constexpr OrdinalTime successor() const { return {limits, offset + 1}; }
  /// The next limit ordinal strictly above this one.
  constexpr OrdinalTime next_limit() const { return {limits + 1, 0}; }

  // Member order gives the lexicographic order on (limits, offset).
  friend constexpr auto operator<=>(const OrdinalTime&, const OrdinalTime&) = default;
};

/// Renders `17`, `w`, `w+3`, `w*2`, `w*2+1`.
inline std::string format_ordinal(OrdinalTime t) {
  if (t.limits == 0) return std::to_string(t.offset);
  std::string out = "w";
  if (t.limits > 1) out += "*" + std::to_string(t.limits);
  if (t.offset > 0) out += "+" + std::to_string(t.offset);
  return out;
}

}  // namespace ittm
