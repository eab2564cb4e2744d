#pragma once

// Polynomials in the integration constants (amplitudes) A, B, K0, ... .
// Perturbation orders carry these as sequence coefficients so that secular
// coefficients such as A - A^2 B come out symbolically.

#include <algorithm>
#include <complex>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmren/scalar.hpp"

namespace nmren {

/// Exponent vector indexed by amplitude id; trailing zeros are trimmed.
class Monomial {
 public:
  Monomial() = default;
  static Monomial variable(int id, int power = 1) {
    Monomial m;
    if (power > 0) {
      m.exps_.assign(static_cast<std::size_t>(id) + 1, 0);
      m.exps_[id] = power;
    }
    return m;
  }

  int exponent(int id) const {
    return id < static_cast<int>(exps_.size()) ? exps_[id] : 0;
  }
  int degree() const {
    int d = 0;
    for (int e : exps_) d += e;
    return d;
  }
  bool is_constant() const { return exps_.empty(); }
  const std::vector<int>& exponents() const { return exps_; }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial out;
    out.exps_.assign(std::max(a.exps_.size(), b.exps_.size()), 0);
    for (std::size_t i = 0; i < a.exps_.size(); ++i) out.exps_[i] += a.exps_[i];
    for (std::size_t i = 0; i < b.exps_.size(); ++i) out.exps_[i] += b.exps_[i];
    out.trim();
    return out;
  }
  friend auto operator<=>(const Monomial&, const Monomial&) = default;
  friend bool operator==(const Monomial&, const Monomial&) = default;

  Monomial without(int id) const {
    Monomial out = *this;
    if (id < static_cast<int>(out.exps_.size())) out.exps_[id] = 0;
    out.trim();
    return out;
  }

 private:
  void trim() {
    while (!exps_.empty() && exps_.back() == 0) exps_.pop_back();
  }
  std::vector<int> exps_;
};

template <Scalar S>
class AmpPoly {
  using T = scalar_traits<S>;

 public:
  AmpPoly() = default;
  AmpPoly(const S& constant) {  // NOLINT(google-explicit-constructor)
    if (!T::is_zero(constant)) terms_.emplace(Monomial{}, constant);
  }
  static AmpPoly variable(int id) {
    AmpPoly p;
    p.terms_.emplace(Monomial::variable(id), T::one());
    return p;
  }
  static AmpPoly monomial(const Monomial& m, const S& c) {
    AmpPoly p;
    if (!T::is_zero(c)) p.terms_.emplace(m, c);
    return p;
  }

  const std::map<Monomial, S>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int total_degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  AmpPoly& operator+=(const AmpPoly& o) {
    for (const auto& [m, c] : o.terms_) accumulate(m, c);
    return *this;
  }
  AmpPoly& operator-=(const AmpPoly& o) {
    for (const auto& [m, c] : o.terms_) accumulate(m, -c);
    return *this;
  }
  AmpPoly& operator*=(const S& s) {
    if (T::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second = it->second * s;
      if (T::is_zero(it->second)) {
        it = terms_.erase(it);
      } else {
        ++it;
      }
    }
    return *this;
  }

  friend AmpPoly operator+(AmpPoly a, const AmpPoly& b) { return a += b; }
  friend AmpPoly operator-(AmpPoly a, const AmpPoly& b) { return a -= b; }
  friend AmpPoly operator-(AmpPoly a) { return a *= -T::one(); }
  friend AmpPoly operator*(AmpPoly a, const S& s) { return a *= s; }
  friend AmpPoly operator*(const S& s, AmpPoly a) { return a *= s; }
  friend AmpPoly operator*(const AmpPoly& a, const AmpPoly& b) {
    AmpPoly out;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.accumulate(ma * mb, ca * cb);
    return out;
  }
  friend bool operator==(const AmpPoly& a, const AmpPoly& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    auto ib = b.terms_.begin();
    for (const auto& [m, c] : a.terms_) {
      if (!(m == ib->first) || !T::approx_equal(c, ib->second)) return false;
      ++ib;
    }
    return true;
  }

  /// Coefficient of a given monomial (zero when absent).
  S coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? T::zero() : it->second;
  }

  /// Part of the polynomial whose monomials have total degree exactly d.
  AmpPoly homogeneous_part(int d) const {
    AmpPoly out;
    for (const auto& [m, c] : terms_)
      if (m.degree() == d) out.terms_.emplace(m, c);
    return out;
  }

  /// c when the polynomial is exactly c·x_id, otherwise nullopt.
  std::optional<S> as_multiple_of(int id) const {
    if (terms_.size() != 1) return std::nullopt;
    const auto& [m, c] = *terms_.begin();
    if (!(m == Monomial::variable(id))) return std::nullopt;
    return c;
  }

  AmpPoly substitute(int id, const AmpPoly& replacement) const {
    AmpPoly out;
    for (const auto& [m, c] : terms_) {
      AmpPoly term = AmpPoly::monomial(m.without(id), c);
      for (int k = 0; k < m.exponent(id); ++k) term = term * replacement;
      out += term;
    }
    return out;
  }

  /// Partial derivative in variable id.
  AmpPoly derivative(int id) const {
    AmpPoly out;
    for (const auto& [m, c] : terms_) {
      int e = m.exponent(id);
      if (e == 0) continue;
      out.accumulate(m.without(id) * Monomial::variable(id, e - 1), c * T::from_int(e));
    }
    return out;
  }

  /// Value with every variable replaced by a scalar (exact when S is exact).
  S value(std::span<const S> values) const {
    S acc = T::zero();
    for (const auto& [m, c] : terms_) {
      S t = c;
      const auto& e = m.exponents();
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (i >= values.size()) throw Error("renorm", "amplitude value missing for evaluation");
        for (int k = 0; k < e[i]; ++k) t = t * values[i];
      }
      acc = acc + t;
    }
    return acc;
  }

  std::complex<double> evaluate(std::span<const std::complex<double>> values) const {
    std::complex<double> acc{0.0, 0.0};
    for (const auto& [m, c] : terms_) {
      std::complex<double> t = T::to_complex(c);
      const auto& e = m.exponents();
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (i >= values.size()) throw Error("renorm", "amplitude value missing for evaluation");
        for (int k = 0; k < e[i]; ++k) t *= values[i];
      }
      acc += t;
    }
    return acc;
  }

  std::string to_string(std::span<const std::string> names) const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) out += " + ";
      first = false;
      out += T::to_string(c);
      const auto& e = m.exponents();
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        out += "*" + (i < names.size() ? names[i] : "a" + std::to_string(i));
        if (e[i] > 1) out += "^" + std::to_string(e[i]);
      }
    }
    return out;
  }

 private:
  void accumulate(const Monomial& m, const S& c) {
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      if (!T::is_zero(c)) terms_.emplace(m, c);
      return;
    }
    it->second = it->second + c;
    if (T::is_zero(it->second)) terms_.erase(it);
  }

  std::map<Monomial, S> terms_;
};

// Uniform coefficient interface for sequences whose coefficients are either
// plain scalars or amplitude polynomials.
template <Scalar S>
bool coeff_is_zero(const S& c) {
  return scalar_traits<S>::is_zero(c);
}
template <Scalar S>
bool coeff_is_zero(const AmpPoly<S>& c) {
  return c.is_zero();
}
template <Scalar S>
bool coeff_equal(const S& a, const S& b) {
  return scalar_traits<S>::approx_equal(a, b);
}
template <Scalar S>
bool coeff_equal(const AmpPoly<S>& a, const AmpPoly<S>& b) {
  return a == b;
}

}  // namespace nmren
