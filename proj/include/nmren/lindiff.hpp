#pragma once

// Linear constant-coefficient difference equations
//   c_p y(n+p) + ... + c_1 y(n+1) + c_0 y(n) = f(n)
// with exponential-binomial forcing. Resonant forcing produces the secular
// terms the renormalization step feeds on.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nmren/combinatorics.hpp"
#include "nmren/error.hpp"
#include "nmren/linalg.hpp"
#include "nmren/seqalg.hpp"

namespace nmren {

/// Below this distance a forcing base counts as a characteristic root; above
/// kNearResonance it is safely nonresonant.
inline constexpr double kNearResonance = 1e-4;

template <Scalar S>
class LinearRecurrence {
  using T = scalar_traits<S>;

 public:
  /// coeffs = [c_p, ..., c_1, c_0], highest shift first.
  explicit LinearRecurrence(std::vector<S> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() < 2) throw Error("lindiff", "recurrence needs order >= 1");
    if (T::is_zero(coeffs_.front())) throw Error("lindiff", "degenerate recurrence: leading coefficient is zero");
    if (T::is_zero(coeffs_.back())) throw Error("lindiff", "degenerate recurrence: c_0 is zero (reduce the order)");
  }

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<S>& coeffs() const { return coeffs_; }
  /// Coefficient of y(n + j).
  const S& at(int j) const { return coeffs_.at(static_cast<std::size_t>(order() - j)); }

  /// Characteristic polynomial sum_j c_j x^j.
  S characteristic(const S& x) const {
    S acc = T::zero();
    for (const auto& c : coeffs_) acc = acc * x + c;
    return acc;
  }

  /// w_l(r) = sum_j c_j r^j C(j, l): the image of r^n C(n-m, k) is
  /// sum_l w_l r^n C(n-m, k-l). w_l vanishes for l below the root multiplicity.
  S image_weight(const S& r, int l) const {
    S acc = T::zero();
    for (int j = l; j <= order(); ++j) acc = acc + at(j) * ipow(r, j) * binomial<S>(j, l);
    return acc;
  }

  template <class C>
  ExpBinomSeq<S, C> apply(const ExpBinomSeq<S, C>& s) const {
    ExpBinomSeq<S, C> acc(s.anchor());
    for (int j = 0; j <= order(); ++j) acc = add(acc, scale(shift(s, j), at(j)));
    return acc;
  }

  /// Left-hand side at n for an arbitrary sequence.
  S lhs(const std::function<S(long)>& y, long n) const {
    S acc = T::zero();
    for (int j = 0; j <= order(); ++j) acc = acc + at(j) * y(n + j);
    return acc;
  }

 private:
  std::vector<S> coeffs_;
};

template <Scalar S>
struct Root {
  S value;
  int multiplicity = 1;
};

template <Scalar S>
class RootSet {
  using T = scalar_traits<S>;

 public:
  RootSet() = default;
  explicit RootSet(std::vector<Root<S>> roots) : roots_(std::move(roots)) {
    for (const auto& r : roots_) {
      if (r.multiplicity < 1) throw Error("lindiff", "root multiplicity must be positive");
      if (T::is_zero(r.value)) throw Error("lindiff", "zero characteristic root");
    }
    std::sort(roots_.begin(), roots_.end(),
              [](const Root<S>& a, const Root<S>& b) { return T::compare(a.value, b.value) < 0; });
    for (std::size_t i = 0; i < roots_.size(); ++i)
      for (std::size_t j = i + 1; j < roots_.size(); ++j)
        if (T::same_base(roots_[i].value, roots_[j].value))
          throw Error("lindiff", "distinct roots closer than the matching tolerance");
  }

  const std::vector<Root<S>>& roots() const { return roots_; }
  std::size_t size() const { return roots_.size(); }

  int total_multiplicity() const {
    int p = 0;
    for (const auto& r : roots_) p += r.multiplicity;
    return p;
  }

  int multiplicity_of(const S& x) const {
    for (const auto& r : roots_)
      if (T::same_base(r.value, x)) return r.multiplicity;
    return 0;
  }

  double nearest_distance(const S& x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : roots_) best = std::min(best, T::distance(r.value, x));
    return best;
  }

 private:
  std::vector<Root<S>> roots_;
};

namespace detail {

template <Scalar S>
RootSet<S> quadratic_roots(const S& a, const S& b, const S& c) {
  using T = scalar_traits<S>;
  S disc = b * b - T::from_int(4) * a * c;
  S two_a = T::from_int(2) * a;
  if constexpr (T::exact) {
    if (T::is_zero(disc)) return RootSet<S>({{-b / two_a, 2}});
    auto sq = T::sqrt(disc);
    if (!sq) throw Error("lindiff", "characteristic roots are irrational; use float scalars");
    return RootSet<S>({{(-b + *sq) / two_a, 1}, {(-b - *sq) / two_a, 1}});
  } else {
    // Rounding splits a double root by about sqrt(eps), so test the
    // discriminant relative to its parts instead of the root gap.
    if (std::abs(disc) <= kFloatTolerance * (std::abs(b * b) + std::abs(4.0 * a * c)))
      return RootSet<S>({{-b / two_a, 2}});
    S sq = *T::sqrt(disc);
    // Pick the sign that avoids cancellation, then use Vieta for the other root.
    S q = std::abs(b + sq) >= std::abs(b - sq) ? -(b + sq) / 2.0 : -(b - sq) / 2.0;
    S r1 = q / a;
    S r2 = c / q;
    return RootSet<S>({{r1, 1}, {r2, 1}});
  }
}

inline RootSet<FloatComplex> companion_roots(const LinearRecurrence<FloatComplex>& rec) {
  const int p = rec.order();
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(p, p);
  const FloatComplex lead = rec.at(p);
  for (int j = 0; j < p; ++j) comp(0, j) = -rec.at(p - 1 - j) / lead;
  for (int i = 1; i < p; ++i) comp(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
  if (solver.info() != Eigen::Success) throw Error("lindiff", "companion eigenvalue iteration failed");

  std::vector<FloatComplex> eig(solver.eigenvalues().data(), solver.eigenvalues().data() + p);
  // A root of multiplicity mu comes back split by about eps^(1/mu), which is
  // ~1e-5 for a triple root. Single-link clustering gathers the pieces and the
  // cluster mean recovers the root to near machine precision.
  const double cluster = 1e-4;
  std::vector<int> label(eig.size(), -1);
  int groups = 0;
  for (std::size_t i = 0; i < eig.size(); ++i) {
    if (label[i] >= 0) continue;
    label[i] = groups;
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t j = 0; j < eig.size(); ++j) {
        if (label[j] >= 0) continue;
        for (std::size_t k = 0; k < eig.size(); ++k) {
          if (label[k] == groups && std::abs(eig[j] - eig[k]) <= cluster * std::max(1.0, std::abs(eig[k]))) {
            label[j] = groups;
            grew = true;
            break;
          }
        }
      }
    }
    ++groups;
  }
  std::vector<Root<FloatComplex>> roots;
  for (int g = 0; g < groups; ++g) {
    FloatComplex sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < eig.size(); ++i)
      if (label[i] == g) {
        sum += eig[i];
        ++count;
      }
    FloatComplex r = sum / static_cast<double>(count);
    if (count == 1) {
      // Newton polish, kept only when it lowers the characteristic residual.
      FloatComplex dp = 0.0;
      for (int j = 1; j <= p; ++j) dp += rec.at(j) * static_cast<double>(j) * std::pow(r, j - 1);
      if (std::abs(dp) > 0.0) {
        FloatComplex polished = r - rec.characteristic(r) / dp;
        if (std::abs(rec.characteristic(polished)) < std::abs(rec.characteristic(r))) r = polished;
      }
    }
    roots.push_back({r, count});
  }
  return RootSet<FloatComplex>(std::move(roots));
}

}  // namespace detail

template <Scalar S>
RootSet<S> char_roots(const LinearRecurrence<S>& rec) {
  using T = scalar_traits<S>;
  if (rec.order() == 1) return RootSet<S>({{-rec.at(0) / rec.at(1), 1}});
  if (rec.order() == 2) return detail::quadratic_roots(rec.at(2), rec.at(1), rec.at(0));
  if constexpr (T::exact) {
    throw Error("lindiff", "exact root finding is limited to order <= 2; use float scalars");
  } else {
    return detail::companion_roots(rec);
  }
}

/// r^n C(n-m, j) for each root r and j below its multiplicity.
template <Scalar S>
std::vector<Seq<S>> homogeneous_basis(const RootSet<S>& roots, long m) {
  std::vector<Seq<S>> basis;
  for (const auto& r : roots.roots())
    for (int j = 0; j < r.multiplicity; ++j) basis.push_back(make_term(scalar_traits<S>::one(), r.value, m, j));
  return basis;
}

namespace detail {

/// Characteristic multiplicity of r. Exact scalars read it off the image
/// weights; floats match against the computed roots with the base tolerance.
template <Scalar S>
int resonance_multiplicity(const LinearRecurrence<S>& rec, const std::optional<RootSet<S>>& roots, const S& r) {
  using T = scalar_traits<S>;
  if constexpr (T::exact) {
    int mu = 0;
    while (mu <= rec.order() && T::is_zero(rec.image_weight(r, mu))) ++mu;
    return mu;
  } else {
    return roots->multiplicity_of(r);
  }
}

template <Scalar S>
std::optional<RootSet<S>> try_roots(const LinearRecurrence<S>& rec) {
  if constexpr (scalar_traits<S>::exact) {
    try {
      return char_roots(rec);
    } catch (const Error&) {
      return std::nullopt;
    }
  } else {
    return char_roots(rec);
  }
}

}  // namespace detail

/// Undetermined coefficients in the anchored binomial basis. For a forcing
/// base r of characteristic multiplicity mu and top degree d the ansatz is
/// sum_{j=mu}^{mu+d} alpha_j r^n C(n-m, j); degrees >= 1 in the result are
/// exactly the secular terms. Coefficients may be scalars or amplitude
/// polynomials.
template <Scalar S, class C>
ExpBinomSeq<S, C> particular_solution(const LinearRecurrence<S>& rec, const ExpBinomSeq<S, C>& forcing,
                                      Diagnostics* diag = nullptr) {
  using T = scalar_traits<S>;
  if (forcing.is_zero()) return forcing;
  const long m = forcing.anchor();
  auto roots = detail::try_roots(rec);

  // Group forcing terms by base; canonical order keeps a base's terms adjacent.
  std::vector<typename ExpBinomSeq<S, C>::Term> out;
  const auto& terms = forcing.terms();
  for (std::size_t start = 0; start < terms.size();) {
    std::size_t stop = start;
    while (stop < terms.size() && T::same_base(terms[stop].base, terms[start].base)) ++stop;
    const S r = terms[start].base;
    int d = 0;
    for (std::size_t i = start; i < stop; ++i) d = std::max(d, terms[i].degree);

    const int mu = detail::resonance_multiplicity(rec, roots, r);
    if (mu == 0 && roots && diag != nullptr) {
      double dist = roots->nearest_distance(r);
      if (dist < kNearResonance)
        diag->warn("lindiff", "forcing base " + T::to_string(r) + " is within " + std::to_string(dist) +
                                  " of a characteristic root; secular detection is fragile");
    }

    // Row t collects the coefficient of r^n C(n-m, t); column i is alpha_{mu+i}.
    std::vector<S> w(static_cast<std::size_t>(mu + d) + 1);
    for (int l = 0; l <= mu + d; ++l) w[l] = rec.image_weight(r, l);
    std::vector<std::vector<S>> a(d + 1, std::vector<S>(d + 1, T::zero()));
    for (int t = 0; t <= d; ++t)
      for (int i = 0; i <= d; ++i)
        if (mu + i - t >= 0) a[t][i] = w[mu + i - t];
    std::vector<C> rhs(d + 1, C(T::zero()));
    for (std::size_t i = start; i < stop; ++i) rhs[terms[i].degree] = rhs[terms[i].degree] + terms[i].coeff;

    std::vector<C> alpha;
    try {
      alpha = detail::solve_linear<S, C>(std::move(a), std::move(rhs), "lindiff", "ansatz");
    } catch (const Error&) {
      throw Error("lindiff", "singular ansatz system for forcing base " + T::to_string(r));
    }
    for (int i = 0; i <= d; ++i) out.push_back({alpha[i], r, mu + i});
    start = stop;
  }
  return ExpBinomSeq<S, C>(m, std::move(out));
}

/// Homogeneous part fitted to y(0..p-1) plus the particular solution.
template <Scalar S>
Seq<S> solve(const LinearRecurrence<S>& rec, const Seq<S>& forcing, const std::vector<S>& initial,
             Diagnostics* diag = nullptr) {
  const int p = rec.order();
  if (static_cast<int>(initial.size()) != p)
    throw Error("lindiff", "need " + std::to_string(p) + " initial values, got " + std::to_string(initial.size()));
  const long m = forcing.is_zero() ? 0 : forcing.anchor();
  auto part = particular_solution(rec, forcing, diag);
  auto basis = homogeneous_basis(char_roots(rec), m);

  std::vector<std::vector<S>> casorati(p, std::vector<S>(p));
  std::vector<S> rhs(p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) casorati[i][j] = eval(basis[j], i);
    rhs[i] = initial[i] - eval(part, i);
  }
  std::vector<S> coef;
  try {
    coef = detail::solve_linear<S, S>(std::move(casorati), std::move(rhs), "lindiff", "Casorati system");
  } catch (const Error&) {
    throw Error("lindiff", "singular Casorati system (nearly repeated characteristic roots)");
  }
  Seq<S> out = part;
  if (out.is_zero()) out = Seq<S>(m);
  for (int j = 0; j < p; ++j) out = add(out, scale(basis[j], coef[j]));
  return out;
}

/// First-order cross-check: a y(n+1) + b y(n) = f(n) summed directly,
/// y(n) = rho^n [y(0) + sum_{j<n} f(j) / (a rho^(j+1))] with rho = -b/a.
template <Scalar S>
S variation_of_constants_order1(const LinearRecurrence<S>& rec, const std::function<S(long)>& forcing, const S& y0,
                                long n) {
  if (rec.order() != 1) throw Error("lindiff", "variation of constants is implemented for order 1 only");
  if (n < 0) throw Error("lindiff", "variation of constants runs forward from n = 0");
  const S a = rec.at(1);
  const S rho = -rec.at(0) / a;
  S sum = y0;
  for (long j = 0; j < n; ++j) sum = sum + forcing(j) / (a * ipow(rho, j + 1));
  return ipow(rho, n) * sum;
}

}  // namespace nmren
