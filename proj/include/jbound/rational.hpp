#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jbound/errors.hpp"

namespace jbound {

// Exact arbitrary-precision fraction. Invariants: denominator > 0, always
// reduced to lowest terms. This is the currency of all LP, density and
// closure arithmetic; nothing in those paths touches floating point.
class Rational {
public:
  Rational() : v_(0) {}
  Rational(long n) : v_(n) {}  // NOLINT: implicit by design, mirrors integer literals
  Rational(long n, long d) : v_(n, d) {
    if (d == 0) throw domain_error("rational with zero denominator");
    v_.canonicalize();
  }
  explicit Rational(const mpz_class& n) : v_(n) {}
  Rational(const mpz_class& n, const mpz_class& d) : v_(n, d) {
    if (d == 0) throw domain_error("rational with zero denominator");
    v_.canonicalize();
  }

  // Exact conversion of the binary expansion of a finite double.
  static Rational from_double(double d);

  // Accepts "p", "-p" or "p/q" with q > 0.
  static std::optional<Rational> parse(std::string_view text);

  mpz_class num() const { return v_.get_num(); }
  mpz_class den() const { return v_.get_den(); }

  int sign() const { return sgn(v_); }
  bool is_zero() const { return sgn(v_) == 0; }
  bool is_integer() const { return v_.get_den() == 1; }

  double to_double() const { return v_.get_d(); }
  std::string str() const;

  mpz_class floor() const;
  mpz_class ceil() const;

  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw domain_error("rational division by zero");
    v_ /= o.v_;
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a) { Rational r; r.v_ = -a.v_; return r; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

private:
  mpq_class v_;
};

Rational abs(const Rational& r);

// Least common multiple of the denominators, as a positive integer.
mpz_class common_denominator(const std::vector<Rational>& values);

// floor(2^y) computed exactly for y = p/q >= 0, via the truncated q-th root
// of 2^p.
mpz_class floor_exp2(const Rational& y);

// The exponent k with v = 2^k, when v is a positive power of two.
std::optional<unsigned long> exact_log2(const mpz_class& v);
std::optional<unsigned long> exact_log2_u64(uint64_t v);

// The rational with the smallest denominator in the closed interval
// [lo, hi], lo <= hi, both non-negative. Stern-Brocot descent.
Rational simplest_in_interval(const Rational& lo, const Rational& hi);

}  // namespace jbound
