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

#include "qref/numeric.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace qref {
namespace {

constexpr __int128 kMaxUnits = (static_cast<__int128>(1) << 126);

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::string u128_to_string(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

std::optional<Decimal> Decimal::try_parse(std::string_view text) {
  std::size_t i = 0;
  auto n = text.size();
  while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  while (n > i && std::isspace(static_cast<unsigned char>(text[n - 1]))) --n;
  if (i == n) return std::nullopt;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  __int128 mantissa = 0;
  int frac_digits = 0;
  int digits = 0;
  bool seen_point = false;
  for (; i < n; ++i) {
    char c = text[i];
    if (c == '.') {
      if (seen_point) return std::nullopt;
      seen_point = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) break;
    if (mantissa > kMaxUnits / 10) return std::nullopt;
    mantissa = mantissa * 10 + (c - '0');
    ++digits;
    if (seen_point) ++frac_digits;
  }
  if (digits == 0) return std::nullopt;
  int exponent = 0;
  if (i < n && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool exp_negative = false;
    if (i < n && (text[i] == '+' || text[i] == '-')) {
      exp_negative = text[i] == '-';
      ++i;
    }
    int exp_digits = 0;
    for (; i < n && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 100) return std::nullopt;
      ++exp_digits;
    }
    if (exp_digits == 0) return std::nullopt;
    if (exp_negative) exponent = -exponent;
  }
  if (i != n) return std::nullopt;
  int shift = kFractionDigits - frac_digits + exponent;
  if (shift < 0) {
    // Only accept if the dropped digits are zeros.
    for (int s = 0; s < -shift; ++s) {
      if (mantissa % 10 != 0) return std::nullopt;
      mantissa /= 10;
    }
  } else {
    for (int s = 0; s < shift; ++s) {
      if (mantissa > kMaxUnits / 10) return std::nullopt;
      mantissa *= 10;
    }
  }
  return Decimal(negative ? -mantissa : mantissa);
}

Decimal Decimal::parse(std::string_view text) {
  auto d = try_parse(text);
  if (!d) throw std::invalid_argument("not a decimal number: '" + std::string(text) + "'");
  return *d;
}

double Decimal::to_double() const {
  // Split to keep the integer part exact for large values.
  __int128 whole = units_ / kScale;
  __int128 frac = units_ % kScale;
  return static_cast<double>(whole) + static_cast<double>(frac) / 1e18;
}

std::string Decimal::to_string() const {
  bool negative = units_ < 0;
  unsigned __int128 mag = negative ? static_cast<unsigned __int128>(-units_)
                                   : static_cast<unsigned __int128>(units_);
  unsigned __int128 whole = mag / static_cast<unsigned __int128>(kScale);
  unsigned __int128 frac = mag % static_cast<unsigned __int128>(kScale);
  std::string out = negative ? "-" : "";
  out += u128_to_string(whole);
  if (frac != 0) {
    std::string f = u128_to_string(frac);
    f.insert(0, static_cast<std::size_t>(kFractionDigits) - f.size(), '0');
    while (!f.empty() && f.back() == '0') f.pop_back();
    out += "." + f;
  }
  return out;
}

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  *this = make(num, den);
}

Rational Rational::make(__int128 num, __int128 den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  constexpr __int128 kMax = std::numeric_limits<std::int64_t>::max();
  if (num > kMax || num < -kMax || den > kMax) throw std::overflow_error("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

Rational Rational::from_decimal(Decimal d) { return make(d.units(), Decimal::kScale); }

Rational Rational::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    auto d = Decimal::try_parse(text);
    if (!d) throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    return from_decimal(*d);
  }
  auto num = Decimal::try_parse(text.substr(0, slash));
  auto den = Decimal::try_parse(text.substr(slash + 1));
  if (!num || !den || *den == Decimal()) {
    throw std::invalid_argument("not a fraction: '" + std::string(text) + "'");
  }
  return from_decimal(*num) / from_decimal(*den);
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator+(const Rational& o) const {
  return make(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
              static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
  return make(static_cast<__int128>(num_) * o.den_ - static_cast<__int128>(o.num_) * den_,
              static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
  return make(static_cast<__int128>(num_) * o.num_, static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
  return make(static_cast<__int128>(num_) * o.den_, static_cast<__int128>(den_) * o.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num_) * b.den_ <=> static_cast<__int128>(b.num_) * a.den_;
}

std::int64_t Rational::floor() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

}  // namespace qref
