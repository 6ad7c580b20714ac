// Copyright 2026 The qref Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QREF_NUMERIC_H_
#define QREF_NUMERIC_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qref {

// Exact fixed-point decimal with 18 fractional digits, stored in a 128-bit
// integer. Covers magnitudes up to ~1.7e20, which is plenty for attribute
// values and predicate constants. Converted to double only at the LP boundary.
class Decimal {
 public:
  static constexpr int kFractionDigits = 18;
  static constexpr __int128 kScale = static_cast<__int128>(1000000000000000000LL);

  constexpr Decimal() = default;

  static Decimal from_int(std::int64_t v) { return Decimal(static_cast<__int128>(v) * kScale); }
  static Decimal from_units(__int128 units) { return Decimal(units); }

  // Accepts [+-]digits[.digits][e[+-]digits]. Returns nullopt on anything else
  // (including inf/nan and values with more than 18 fractional digits).
  static std::optional<Decimal> try_parse(std::string_view text);
  static Decimal parse(std::string_view text);

  __int128 units() const { return units_; }
  double to_double() const;
  // Shortest exact rendering: "3.7", "-12", "0.05".
  std::string to_string() const;

  bool is_zero() const { return units_ == 0; }
  bool is_negative() const { return units_ < 0; }

  Decimal operator-() const { return Decimal(-units_); }
  Decimal operator+(Decimal o) const { return Decimal(units_ + o.units_); }
  Decimal operator-(Decimal o) const { return Decimal(units_ - o.units_); }
  Decimal& operator+=(Decimal o) { units_ += o.units_; return *this; }
  Decimal& operator-=(Decimal o) { units_ -= o.units_; return *this; }
  // Truncating division by a small integer (used to halve domain gaps).
  Decimal div_int(std::int64_t d) const { return Decimal(units_ / d); }
  Decimal abs() const { return Decimal(units_ < 0 ? -units_ : units_); }

  friend bool operator==(Decimal a, Decimal b) = default;
  friend std::strong_ordering operator<=>(Decimal a, Decimal b) { return a.units_ <=> b.units_; }

 private:
  explicit constexpr Decimal(__int128 units) : units_(units) {}
  __int128 units_ = 0;
};

// Normalized fraction of 64-bit integers (denominator > 0, gcd 1). Used for
// quantities that must compare exactly: deviation, epsilon, Jaccard ratios.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  // Exact conversion; throws std::overflow_error if it does not fit.
  static Rational from_decimal(Decimal d);
  // "3", "0.25" or "1/3". Throws std::invalid_argument.
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string to_string() const;

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational& operator+=(const Rational& o) { return *this = *this + o; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  // Largest integer <= this.
  std::int64_t floor() const;

 private:
  static Rational make(__int128 num, __int128 den);
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace qref

#endif  // QREF_NUMERIC_H_
