#pragma once

// Scalar support shared by every module: exact rationals over GMP integers
// and IEEE doubles. Algorithms are written once against the `Scalar` concept.

#include <gmpxx.h>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bratteli {

using Integer = mpz_class;
using Rational = mpq_class;

template <class S>
concept Scalar = std::same_as<S, double> || std::same_as<S, Rational>;

enum class NumericMode { rational, floating };

inline std::string_view to_string(NumericMode m) {
  return m == NumericMode::rational ? "rational" : "float";
}

inline NumericMode parse_mode(std::string_view s) {
  if (s == "rational" || s == "exact") return NumericMode::rational;
  if (s == "float" || s == "double") return NumericMode::floating;
  throw std::invalid_argument("unknown numeric mode: " + std::string(s));
}

template <Scalar S>
struct numeric_traits;

template <>
struct numeric_traits<double> {
  static constexpr bool exact = false;
  static constexpr NumericMode mode = NumericMode::floating;
  /// Slack allowed when checking that probability vectors sum to one.
  static constexpr double normalization_tolerance = 1e-12;
  /// Reduced-cost threshold of the transport simplex.
  static constexpr double optimality_tolerance = 1e-9;
};

template <>
struct numeric_traits<Rational> {
  static constexpr bool exact = true;
  static constexpr NumericMode mode = NumericMode::rational;
  static constexpr double normalization_tolerance = 0.0;
  static constexpr double optimality_tolerance = 0.0;
};

inline double to_double(double x) { return x; }
inline double to_double(const Rational& q) { return q.get_d(); }

template <Scalar S>
S from_ratio(long num, long den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  if constexpr (std::same_as<S, double>) {
    return static_cast<double>(num) / static_cast<double>(den);
  } else {
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
}

template <Scalar S>
S convert(const Rational& q) {
  if constexpr (std::same_as<S, double>) {
    return q.get_d();
  } else {
    return q;
  }
}

template <Scalar S>
S abs_value(const S& x) {
  if constexpr (std::same_as<S, double>) {
    return std::fabs(x);
  } else {
    return abs(x);
  }
}

template <Scalar S>
bool is_zero(const S& x) {
  if constexpr (std::same_as<S, double>) {
    return x == 0.0;
  } else {
    return sgn(x) == 0;
  }
}

/// True when `x` equals one exactly (rational) or within the normalization slack.
template <Scalar S>
bool is_one(const S& x) {
  if constexpr (std::same_as<S, double>) {
    return std::fabs(x - 1.0) <= numeric_traits<double>::normalization_tolerance;
  } else {
    return x == 1;
  }
}

/// Neumaier compensated summation for doubles; plain accumulation for rationals.
template <Scalar S>
class Accumulator {
 public:
  void add(const S& x) {
    if constexpr (std::same_as<S, double>) {
      const double t = sum_ + x;
      if (std::fabs(sum_) >= std::fabs(x)) {
        comp_ += (sum_ - t) + x;
      } else {
        comp_ += (x - t) + sum_;
      }
      sum_ = t;
    } else {
      sum_ += x;
    }
  }

  S value() const {
    if constexpr (std::same_as<S, double>) {
      return sum_ + comp_;
    } else {
      return sum_;
    }
  }

 private:
  S sum_{0};
  S comp_{0};
};

/// Parses "p/q", an integer, or a decimal literal ("0.25" becomes 1/4) exactly.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  if (const auto dot = s.find('.'); dot != std::string::npos) {
    if (s.find_first_of("eE/") != std::string::npos) {
      throw std::invalid_argument("unsupported rational literal: " + s);
    }
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    Integer num;
    if (num.set_str(digits, 10) != 0) throw std::invalid_argument("bad rational literal: " + s);
    Integer den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(s.size() - dot - 1));
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  Rational q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + s);
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
  q.canonicalize();
  return q;
}

template <Scalar S>
S parse_scalar(std::string_view text) {
  if constexpr (std::same_as<S, double>) {
    if (text.find('/') != std::string_view::npos) return parse_rational(text).get_d();
    std::size_t used = 0;
    const std::string s(text);
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad number: " + s);
    return x;
  } else {
    return parse_rational(text);
  }
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace bratteli
