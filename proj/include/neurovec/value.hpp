#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

#include "neurovec/error.hpp"

namespace neurovec {

enum class ColumnKind { kNumeric, kCategorical };

inline std::string_view to_string(ColumnKind k) {
  return k == ColumnKind::kNumeric ? "numeric" : "categorical";
}

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// Parses a finite decimal number ("2", "-0.5", "+1e3", ".5"). Surrounding
/// whitespace is ignored; anything else (including "nan", "inf") yields nullopt.
inline std::optional<double> parse_decimal(std::string_view cell) {
  auto s = trim(cell);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  const char c0 = s.front() == '-' && s.size() > 1 ? s[1] : s.front();
  if (!((c0 >= '0' && c0 <= '9') || c0 == '.')) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

/// Shortest decimal string that parses back to exactly `v`. Negative zero
/// renders as "0".
inline std::string format_shortest(double v) {
  if (v == 0.0) v = 0.0;
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

/// Options that shape how numeric cells become token values.
struct ValueFormat {
  /// When set, numeric values are rounded to this many decimals before rendering.
  std::optional<int> quantizeDecimals;
};

/// Rounds to a fixed number of decimals, then renders shortest round-trip.
inline std::string format_numeric(double v, const ValueFormat& fmt = {}) {
  if (!fmt.quantizeDecimals) return format_shortest(v);
  std::array<char, 400> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                       std::chars_format::fixed, *fmt.quantizeDecimals);
  double rounded = 0.0;
  std::from_chars(buf.data(), ptr, rounded);
  return format_shortest(rounded);
}

/// Canonical string for a raw cell: trimmed text for categorical columns,
/// shortest round-trip rendering for numeric ones ("2", "2.0", "2.00" -> "2").
inline std::string canonical_value(std::string_view cell, ColumnKind kind,
                                   const ValueFormat& fmt = {}) {
  if (kind == ColumnKind::kCategorical) return std::string(trim(cell));
  const auto v = parse_decimal(cell);
  if (!v) {
    throw DataError("cell '" + std::string(cell) + "' is not a number");
  }
  return format_numeric(*v, fmt);
}

}  // namespace neurovec
