#include "jbound/rational.hpp"

#include <mpfr.h>

#include <cmath>

namespace jbound {

Rational Rational::from_double(double d) {
  if (!std::isfinite(d)) throw domain_error("cannot convert non-finite double to rational");
  Rational r;
  r.v_ = mpq_class(d);  // mpq_set_d is exact for finite doubles
  return r;
}

std::optional<Rational> Rational::parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string s(text);
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      mpz_class n(s);
      return Rational(n);
    }
    const std::string ns = s.substr(0, slash);
    const std::string ds = s.substr(slash + 1);
    if (ns.empty() || ds.empty()) return std::nullopt;
    mpz_class n(ns);
    mpz_class d(ds);
    if (d <= 0) return std::nullopt;
    return Rational(n, d);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

std::string Rational::str() const {
  if (is_integer()) return num().get_str();
  return num().get_str() + "/" + den().get_str();
}

mpz_class Rational::floor() const {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), num().get_mpz_t(), den().get_mpz_t());
  return q;
}

mpz_class Rational::ceil() const {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), num().get_mpz_t(), den().get_mpz_t());
  return q;
}

Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

mpz_class common_denominator(const std::vector<Rational>& values) {
  mpz_class l = 1;
  for (const auto& v : values) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.den().get_mpz_t());
  return l;
}

mpz_class floor_exp2(const Rational& y) {
  if (y.sign() < 0) throw domain_error("floor_exp2 requires a non-negative exponent");
  const mpz_class p = y.num();
  const mpz_class q = y.den();
  if (q == 1) {
    if (!p.fits_ulong_p()) throw capability_error("floor_exp2 exponent out of supported range");
    return mpz_class(1) << p.get_ui();
  }
  if (p <= 100000 && q.fits_ulong_p()) {
    // Small numerator: the truncated q-th root of 2^p is exact.
    mpz_class pow2;
    mpz_ui_pow_ui(pow2.get_mpz_t(), 2, p.get_ui());
    mpz_class root;
    mpz_root(root.get_mpz_t(), pow2.get_mpz_t(), q.get_ui());
    return root;
  }
  // Huge reduced denominator (log costs rounded through a double). The value
  // 2^{p/q} is irrational for q > 1, so interval arithmetic at increasing
  // precision eventually brackets it strictly between two integers.
  for (mpfr_prec_t prec = 128; prec <= (mpfr_prec_t{1} << 20); prec *= 2) {
    mpfr_t lo, hi;
    mpfr_init2(lo, prec);
    mpfr_init2(hi, prec);
    mpq_class exponent(p, q);
    mpfr_set_q(lo, exponent.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(hi, exponent.get_mpq_t(), MPFR_RNDU);
    mpfr_exp2(lo, lo, MPFR_RNDD);
    mpfr_exp2(hi, hi, MPFR_RNDU);
    mpfr_floor(lo, lo);
    mpfr_floor(hi, hi);
    mpz_class flo, fhi;
    mpfr_get_z(flo.get_mpz_t(), lo, MPFR_RNDN);
    mpfr_get_z(fhi.get_mpz_t(), hi, MPFR_RNDN);
    mpfr_clear(lo);
    mpfr_clear(hi);
    if (flo == fhi) return flo;
  }
  throw internal_error("floor_exp2 failed to separate 2^y from an integer");
}

std::optional<unsigned long> exact_log2(const mpz_class& v) {
  if (v <= 0) return std::nullopt;
  if (mpz_popcount(v.get_mpz_t()) != 1) return std::nullopt;
  return mpz_scan1(v.get_mpz_t(), 0);
}

std::optional<unsigned long> exact_log2_u64(uint64_t v) {
  if (v == 0 || (v & (v - 1)) != 0) return std::nullopt;
  unsigned long k = 0;
  while ((v >> k) != 1) ++k;
  return k;
}

namespace {

Rational simplest_rec(const Rational& lo, const Rational& hi) {
  // Preconditions: 0 <= lo <= hi.
  const mpz_class fl = lo.floor();
  if (lo == Rational(fl)) return lo;           // lo itself is an integer
  if (Rational(fl + 1) <= hi) return Rational(fl + 1);  // an integer lies inside
  // Both endpoints share the integer part; recurse on the reciprocal of the
  // fractional parts (order swaps).
  const Rational lo_frac = lo - Rational(fl);
  const Rational hi_frac = hi - Rational(fl);
  const Rational inner = simplest_rec(Rational(1) / hi_frac, Rational(1) / lo_frac);
  return Rational(fl) + Rational(1) / inner;
}

}  // namespace

Rational simplest_in_interval(const Rational& lo, const Rational& hi) {
  if (lo.sign() < 0) throw domain_error("simplest_in_interval requires non-negative bounds");
  if (hi < lo) throw domain_error("simplest_in_interval requires lo <= hi");
  return simplest_rec(lo, hi);
}

}  // namespace jbound
