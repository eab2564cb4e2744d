#pragma once

// Scalar tower used throughout the library: an exact complex rational built on
// GMP rationals, and std::complex<double>. Algorithms are written once against
// scalar_traits<S> and instantiated for both.

#include <cmath>
#include <complex>
#include <concepts>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <gmpxx.h>

#include "nmren/error.hpp"

namespace nmren {

/// Absolute tolerance for structural comparison of float scalars.
inline constexpr double kFloatTolerance = 1e-12;
/// Two float bases closer than this are the same exponential mode.
inline constexpr double kBaseMatchTolerance = 1e-9;

class ExactComplex {
 public:
  ExactComplex() = default;
  ExactComplex(long re) : re_(re) {}  // NOLINT(google-explicit-constructor)
  ExactComplex(mpq_class re, mpq_class im = 0) : re_(std::move(re)), im_(std::move(im)) {
    re_.canonicalize();
    im_.canonicalize();
  }

  static ExactComplex ratio(long num, long den) {
    if (den == 0) throw Error("scalar", "zero denominator");
    mpq_class q(num, den);
    q.canonicalize();
    return ExactComplex(q);
  }
  static ExactComplex i() { return ExactComplex(mpq_class(0), mpq_class(1)); }

  const mpq_class& re() const { return re_; }
  const mpq_class& im() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  bool is_real() const { return sgn(im_) == 0; }

  ExactComplex conj() const { return ExactComplex(re_, -im_); }
  mpq_class norm() const { return mpq_class(re_ * re_ + im_ * im_); }

  ExactComplex inverse() const {
    if (is_zero()) throw Error("scalar", "division by zero");
    mpq_class n = norm();
    return ExactComplex(mpq_class(re_ / n), mpq_class(-im_ / n));
  }

  std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }

  ExactComplex& operator+=(const ExactComplex& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  ExactComplex& operator-=(const ExactComplex& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  ExactComplex& operator*=(const ExactComplex& o) {
    mpq_class r = re_ * o.re_ - im_ * o.im_;
    mpq_class i = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }
  ExactComplex& operator/=(const ExactComplex& o) { return *this *= o.inverse(); }

  friend ExactComplex operator+(ExactComplex a, const ExactComplex& b) { return a += b; }
  friend ExactComplex operator-(ExactComplex a, const ExactComplex& b) { return a -= b; }
  friend ExactComplex operator*(ExactComplex a, const ExactComplex& b) { return a *= b; }
  friend ExactComplex operator/(ExactComplex a, const ExactComplex& b) { return a /= b; }
  friend ExactComplex operator-(const ExactComplex& a) { return ExactComplex(-a.re_, -a.im_); }
  friend bool operator==(const ExactComplex& a, const ExactComplex& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

  std::string to_string() const {
    if (sgn(im_) == 0) return re_.get_str();
    if (sgn(re_) == 0) return im_.get_str() + "i";
    return "(" + re_.get_str() + (sgn(im_) > 0 ? "+" : "") + im_.get_str() + "i)";
  }

 private:
  mpq_class re_{0};
  mpq_class im_{0};
};

using FloatComplex = std::complex<double>;

namespace detail {

inline std::optional<mpq_class> exact_rational_sqrt(const mpq_class& q) {
  if (sgn(q) < 0) return std::nullopt;
  mpz_class num = q.get_num();
  mpz_class den = q.get_den();
  if (mpz_perfect_square_p(num.get_mpz_t()) == 0 || mpz_perfect_square_p(den.get_mpz_t()) == 0)
    return std::nullopt;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
  mpq_class out(rn, rd);
  out.canonicalize();
  return out;
}

}  // namespace detail

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<ExactComplex> {
  static constexpr bool exact = true;
  static constexpr const char* name = "exact";

  static ExactComplex zero() { return {}; }
  static ExactComplex one() { return ExactComplex(1L); }
  static ExactComplex from_int(long v) { return ExactComplex(v); }
  // Binary doubles convert exactly.
  static ExactComplex from_double(double re, double im = 0.0) {
    return ExactComplex(mpq_class(re), mpq_class(im));
  }
  static ExactComplex from_complex(std::complex<double> z) { return from_double(z.real(), z.imag()); }
  static ExactComplex imag_unit() { return ExactComplex::i(); }
  static ExactComplex from_mpq(const mpq_class& q) { return ExactComplex(q); }

  static bool is_zero(const ExactComplex& s) { return s.is_zero(); }
  static bool approx_equal(const ExactComplex& a, const ExactComplex& b) { return a == b; }
  static bool same_base(const ExactComplex& a, const ExactComplex& b) { return a == b; }
  static double distance(const ExactComplex& a, const ExactComplex& b) {
    return std::abs((a - b).to_complex());
  }
  static int compare(const ExactComplex& a, const ExactComplex& b) {
    int c = cmp(a.re(), b.re());
    if (c != 0) return c < 0 ? -1 : 1;
    c = cmp(a.im(), b.im());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  static double magnitude(const ExactComplex& s) { return std::abs(s.to_complex()); }
  static std::complex<double> to_complex(const ExactComplex& s) { return s.to_complex(); }
  static ExactComplex conj(const ExactComplex& s) { return s.conj(); }
  static ExactComplex inverse(const ExactComplex& s) { return s.inverse(); }

  // Square root in Q(i) when it exists; nullopt for irrational roots.
  static std::optional<ExactComplex> sqrt(const ExactComplex& z) {
    if (z.is_zero()) return zero();
    if (z.is_real()) {
      if (sgn(z.re()) >= 0) {
        auto r = detail::exact_rational_sqrt(z.re());
        if (!r) return std::nullopt;
        return ExactComplex(*r);
      }
      auto r = detail::exact_rational_sqrt(mpq_class(-z.re()));
      if (!r) return std::nullopt;
      return ExactComplex(mpq_class(0), *r);
    }
    auto modulus = detail::exact_rational_sqrt(z.norm());
    if (!modulus) return std::nullopt;
    auto x = detail::exact_rational_sqrt(mpq_class((*modulus + z.re()) / 2));
    if (!x || sgn(*x) == 0) return std::nullopt;
    mpq_class y = z.im() / (2 * *x);
    return ExactComplex(*x, y);
  }

  static std::string to_string(const ExactComplex& s) { return s.to_string(); }
};

template <>
struct scalar_traits<FloatComplex> {
  static constexpr bool exact = false;
  static constexpr const char* name = "float";

  static FloatComplex zero() { return {0.0, 0.0}; }
  static FloatComplex one() { return {1.0, 0.0}; }
  static FloatComplex from_int(long v) { return {static_cast<double>(v), 0.0}; }
  static FloatComplex from_double(double re, double im = 0.0) { return {re, im}; }
  static FloatComplex from_complex(std::complex<double> z) { return z; }
  static FloatComplex imag_unit() { return {0.0, 1.0}; }
  static FloatComplex from_mpq(const mpq_class& q) { return {q.get_d(), 0.0}; }

  static bool is_zero(const FloatComplex& s) { return std::abs(s) <= kFloatTolerance; }
  static bool approx_equal(const FloatComplex& a, const FloatComplex& b) {
    return std::abs(a - b) <= kFloatTolerance;
  }
  static bool same_base(const FloatComplex& a, const FloatComplex& b) {
    return std::abs(a - b) <= kBaseMatchTolerance;
  }
  static double distance(const FloatComplex& a, const FloatComplex& b) { return std::abs(a - b); }
  static int compare(const FloatComplex& a, const FloatComplex& b) {
    if (a.real() != b.real()) return a.real() < b.real() ? -1 : 1;
    if (a.imag() != b.imag()) return a.imag() < b.imag() ? -1 : 1;
    return 0;
  }
  static double magnitude(const FloatComplex& s) { return std::abs(s); }
  static std::complex<double> to_complex(const FloatComplex& s) { return s; }
  static FloatComplex conj(const FloatComplex& s) { return std::conj(s); }
  static FloatComplex inverse(const FloatComplex& s) {
    if (s == zero()) throw Error("scalar", "division by zero");
    return 1.0 / s;
  }
  static std::optional<FloatComplex> sqrt(const FloatComplex& z) { return std::sqrt(z); }

  static std::string to_string(const FloatComplex& s) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "(%.17g%+.17gi)", s.real(), s.imag());
    return buf;
  }
};

template <class S>
concept Scalar = requires(const S& a, const S& b) {
  { a + b } -> std::convertible_to<S>;
  { a - b } -> std::convertible_to<S>;
  { a * b } -> std::convertible_to<S>;
  { -a } -> std::convertible_to<S>;
  { scalar_traits<S>::zero() } -> std::same_as<S>;
  { scalar_traits<S>::is_zero(a) } -> std::same_as<bool>;
  { scalar_traits<S>::to_complex(a) } -> std::same_as<std::complex<double>>;
};

/// r^n for any integer n; negative powers go through the inverse.
template <Scalar S>
S ipow(const S& base, long n) {
  using T = scalar_traits<S>;
  S b = n < 0 ? T::inverse(base) : base;
  unsigned long e = n < 0 ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
  S acc = T::one();
  while (e != 0) {
    if ((e & 1UL) != 0) acc = acc * b;
    e >>= 1;
    if (e != 0) b = b * b;
  }
  return acc;
}

}  // namespace nmren
