#pragma once

// Polynomials in the shifted values y(n), y(n+1), ..., y(n+q): the nonlinear
// perturbation operators of the worked problems, applied symbolically to
// amplitude-bearing sequences or numerically to trajectories.

#include <functional>
#include <vector>

#include "nmren/amp_poly.hpp"
#include "nmren/lindiff.hpp"
#include "nmren/seqalg.hpp"

namespace nmren {

template <Scalar S>
class ShiftPoly {
  using T = scalar_traits<S>;

 public:
  ShiftPoly() = default;
  explicit ShiftPoly(AmpPoly<S> p) : poly_(std::move(p)) {}

  /// The monomial y(n + j).
  static ShiftPoly y(int j) {
    if (j < 0) throw Error("renorm", "negative shift in operator");
    return ShiftPoly(AmpPoly<S>::variable(j));
  }
  static ShiftPoly constant(const S& c) { return ShiftPoly(AmpPoly<S>(c)); }
  static ShiftPoly from_recurrence(const LinearRecurrence<S>& rec) {
    ShiftPoly out;
    for (int j = 0; j <= rec.order(); ++j) out = out + y(j) * rec.at(j);
    return out;
  }

  const AmpPoly<S>& poly() const { return poly_; }
  bool is_zero() const { return poly_.is_zero(); }

  int max_shift() const {
    int q = 0;
    for (const auto& [m, c] : poly_.terms()) q = std::max(q, static_cast<int>(m.exponents().size()) - 1);
    return q;
  }

  friend ShiftPoly operator+(const ShiftPoly& a, const ShiftPoly& b) { return ShiftPoly(a.poly_ + b.poly_); }
  friend ShiftPoly operator-(const ShiftPoly& a, const ShiftPoly& b) { return ShiftPoly(a.poly_ - b.poly_); }
  friend ShiftPoly operator*(const ShiftPoly& a, const ShiftPoly& b) { return ShiftPoly(a.poly_ * b.poly_); }
  friend ShiftPoly operator*(const ShiftPoly& a, const S& s) { return ShiftPoly(a.poly_ * s); }

  /// d/dy(n+j).
  ShiftPoly derivative(int j) const { return ShiftPoly(poly_.derivative(j)); }

  /// The linear recurrence when the operator is linear and homogeneous,
  /// otherwise nullopt.
  std::optional<LinearRecurrence<S>> as_recurrence() const {
    if (poly_.total_degree() > 1 || !T::is_zero(poly_.coefficient(Monomial{}))) return std::nullopt;
    std::vector<S> coeffs;
    for (int j = max_shift(); j >= 0; --j) coeffs.push_back(poly_.coefficient(Monomial::variable(j)));
    try {
      return LinearRecurrence<S>(std::move(coeffs));
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  S evaluate(const std::function<S(long)>& y, long n) const {
    std::vector<S> window;
    for (int j = 0; j <= max_shift(); ++j) window.push_back(y(n + j));
    return poly_.value(window);
  }

  /// Symbolic image of an amplitude-bearing sequence.
  PolySeq<S> apply(const PolySeq<S>& seq) const {
    const long m = seq.anchor();
    PolySeq<S> acc(m);
    std::vector<PolySeq<S>> shifted;
    for (int j = 0; j <= max_shift(); ++j) shifted.push_back(shift(seq, j));
    for (const auto& [mono, c] : poly_.terms()) {
      PolySeq<S> term = make_term<S, AmpPoly<S>>(AmpPoly<S>(c), T::one(), m, 0);
      const auto& e = mono.exponents();
      for (std::size_t j = 0; j < e.size(); ++j)
        if (e[j] > 0) term = product(term, power(shifted[j], e[j]));
      acc = add(acc, term);
    }
    return acc;
  }

  /// Frechet derivative M'(y0)[y1] = sum_j (dM/dy(n+j))(y0) * y1(n+j).
  PolySeq<S> linearized(const PolySeq<S>& y0, const PolySeq<S>& y1) const {
    PolySeq<S> acc(y0.anchor());
    for (int j = 0; j <= max_shift(); ++j) {
      ShiftPoly d = derivative(j);
      if (d.is_zero()) continue;
      acc = add(acc, product(d.apply(y0), shift(y1, j)));
    }
    return acc;
  }

 private:
  AmpPoly<S> poly_;
};

}  // namespace nmren
