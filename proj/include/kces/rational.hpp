#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace kces {

/// Exact non-negative rational used for per-byte instruction counts and link
/// bandwidths. Always stored reduced with a positive denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);

  bool is_positive() const { return num > 0; }

  /// Accepts "3", "13/10" or a plain decimal such as "1.3".
  static Rational parse(std::string_view text);
  std::string str() const;

  friend bool operator==(const Rational&, const Rational&) = default;
};

/// ceil(a / b) for a >= 0, b > 0.
inline std::int64_t ceil_div(__int128 a, __int128 b) {
  return static_cast<std::int64_t>((a + b - 1) / b);
}

}  // namespace kces
