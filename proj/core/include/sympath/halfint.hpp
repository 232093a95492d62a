#pragma once

#include <cstdint>
#include <compare>
#include <iosfwd>
#include <string>

namespace sympath {

/// Exact half-integer, stored as twice its value. The only carrier for
/// indices in public signatures; floating-point indices are forbidden.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  constexpr explicit HalfInt(std::int64_t twice) : twice_(twice) {}

  static constexpr HalfInt whole(std::int64_t k) { return HalfInt(2 * k); }
  static constexpr HalfInt halves(std::int64_t p) { return HalfInt(p); }

  constexpr std::int64_t twice() const { return twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  constexpr double value() const { return static_cast<double>(twice_) / 2.0; }

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
  constexpr HalfInt operator*(std::int64_t k) const { return HalfInt(twice_ * k); }
  HalfInt& operator+=(HalfInt o) { twice_ += o.twice_; return *this; }
  HalfInt& operator-=(HalfInt o) { twice_ -= o.twice_; return *this; }

  constexpr auto operator<=>(const HalfInt&) const = default;

  /// "3/2" for odd numerators, plain integer string otherwise.
  std::string str() const;

 private:
  std::int64_t twice_ = 0;
};

constexpr HalfInt operator*(std::int64_t k, HalfInt h) { return h * k; }

std::ostream& operator<<(std::ostream& os, HalfInt h);

}  // namespace sympath
