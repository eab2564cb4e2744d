#pragma once

// Exponential-binomial sequences n -> sum c * r^n * C(n-m, k), all terms on a
// common anchor m. The set is closed under shift, forward difference, sums,
// scalar multiples and pointwise products, and every solution the
// renormalization engine produces lives here.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "nmren/amp_poly.hpp"
#include "nmren/combinatorics.hpp"
#include "nmren/error.hpp"
#include "nmren/scalar.hpp"

namespace nmren {

/// Basis function n -> base^n * C(n - anchor, degree).
template <Scalar S>
struct BinomKernel {
  S base;
  long anchor = 0;
  int degree = 0;
};

template <Scalar S, class C = S>
class ExpBinomSeq {
  using T = scalar_traits<S>;

 public:
  using scalar_type = S;
  using coeff_type = C;

  struct Term {
    C coeff;
    S base;
    int degree = 0;
  };

  ExpBinomSeq() = default;
  explicit ExpBinomSeq(long anchor) : anchor_(anchor) {}
  ExpBinomSeq(long anchor, std::vector<Term> terms) : anchor_(anchor), terms_(std::move(terms)) {
    canonicalize();
  }

  long anchor() const { return anchor_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  BinomKernel<S> kernel(std::size_t i) const {
    return {terms_.at(i).base, anchor_, terms_.at(i).degree};
  }

  int max_degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, t.degree);
    return d;
  }

  /// Structural equality of canonical forms (tolerant for float scalars).
  friend bool operator==(const ExpBinomSeq& a, const ExpBinomSeq& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    if (!a.terms_.empty() && a.anchor_ != b.anchor_) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
      const auto& x = a.terms_[i];
      const auto& y = b.terms_[i];
      if (x.degree != y.degree || !T::same_base(x.base, y.base) || !coeff_equal(x.coeff, y.coeff))
        return false;
    }
    return true;
  }

  /// Re-sorts and merges terms; exposed so tests can check idempotence.
  ExpBinomSeq canonical() const {
    ExpBinomSeq out = *this;
    out.canonicalize();
    return out;
  }

 private:
  void canonicalize() {
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (auto& t : terms_) {
      if (t.degree < 0) throw Error("seqalg", "negative binomial degree");
      if (coeff_is_zero(t.coeff)) continue;
      if (T::is_zero(t.base)) throw Error("seqalg", "zero base in a sequence term");
      auto it = std::find_if(merged.begin(), merged.end(), [&](const Term& m) {
        return m.degree == t.degree && T::same_base(m.base, t.base);
      });
      if (it == merged.end()) {
        merged.push_back(std::move(t));
      } else {
        it->coeff = it->coeff + t.coeff;
      }
    }
    std::erase_if(merged, [](const Term& t) { return coeff_is_zero(t.coeff); });
    std::stable_sort(merged.begin(), merged.end(), [](const Term& a, const Term& b) {
      int c = T::compare(a.base, b.base);
      if (c != 0) return c < 0;
      return a.degree < b.degree;
    });
    terms_ = std::move(merged);
  }

  long anchor_ = 0;
  std::vector<Term> terms_;
};

template <Scalar S>
using Seq = ExpBinomSeq<S, S>;
template <Scalar S>
using PolySeq = ExpBinomSeq<S, AmpPoly<S>>;

/// n -> c * r^n * C(n-m, k). A zero coefficient gives the empty sequence.
template <Scalar S, class C>
ExpBinomSeq<S, C> make_term(const C& c, const S& r, long m, int k) {
  if (k < 0) throw Error("seqalg", "binomial degree must be nonnegative");
  if (scalar_traits<S>::is_zero(r)) throw Error("seqalg", "base must be nonzero");
  if (coeff_is_zero(c)) return ExpBinomSeq<S, C>(m);
  return ExpBinomSeq<S, C>(m, {{c, r, k}});
}

template <Scalar S>
Seq<S> make_term(const S& c, const S& r, long m, int k) {
  return make_term<S, S>(c, r, m, k);
}

namespace detail {

template <Scalar S, class C>
long common_anchor(const ExpBinomSeq<S, C>& a, const ExpBinomSeq<S, C>& b) {
  if (a.is_zero()) return b.anchor();
  if (b.is_zero()) return a.anchor();
  if (a.anchor() != b.anchor())
    throw Error("seqalg", "anchor mismatch (" + std::to_string(a.anchor()) + " vs " +
                              std::to_string(b.anchor()) + "); reanchor first");
  return a.anchor();
}

}  // namespace detail

template <Scalar S, class C>
ExpBinomSeq<S, C> add(const ExpBinomSeq<S, C>& a, const ExpBinomSeq<S, C>& b) {
  long m = detail::common_anchor(a, b);
  auto terms = a.terms();
  terms.insert(terms.end(), b.terms().begin(), b.terms().end());
  return ExpBinomSeq<S, C>(m, std::move(terms));
}

template <Scalar S, class C>
ExpBinomSeq<S, C> scale(const ExpBinomSeq<S, C>& s, const S& c) {
  auto terms = s.terms();
  for (auto& t : terms) t.coeff = t.coeff * c;
  return ExpBinomSeq<S, C>(s.anchor(), std::move(terms));
}

template <Scalar S, class C>
ExpBinomSeq<S, C> subtract(const ExpBinomSeq<S, C>& a, const ExpBinomSeq<S, C>& b) {
  return add(a, scale(b, -scalar_traits<S>::one()));
}

template <Scalar S, class C>
ExpBinomSeq<S, C> operator+(const ExpBinomSeq<S, C>& a, const ExpBinomSeq<S, C>& b) {
  return add(a, b);
}
template <Scalar S, class C>
ExpBinomSeq<S, C> operator-(const ExpBinomSeq<S, C>& a, const ExpBinomSeq<S, C>& b) {
  return subtract(a, b);
}

/// n -> s(n + j), via Vandermonde: C(n+j-m, k) = sum_i C(j, i) C(n-m, k-i).
template <Scalar S, class C>
ExpBinomSeq<S, C> shift(const ExpBinomSeq<S, C>& s, long j) {
  if (j == 0) return s;
  std::vector<typename ExpBinomSeq<S, C>::Term> out;
  for (const auto& t : s.terms()) {
    S rj = ipow(t.base, j);
    for (int i = 0; i <= t.degree; ++i) {
      S w = rj * binomial<S>(j, i);
      if (scalar_traits<S>::is_zero(w)) continue;
      out.push_back({t.coeff * w, t.base, t.degree - i});
    }
  }
  return ExpBinomSeq<S, C>(s.anchor(), std::move(out));
}

/// Forward difference. Per term:
/// delta[r^n C(n-m,k)] = (r-1) r^n C(n-m,k) + r * r^n C(n-m,k-1).
template <Scalar S, class C>
ExpBinomSeq<S, C> delta(const ExpBinomSeq<S, C>& s) {
  using T = scalar_traits<S>;
  std::vector<typename ExpBinomSeq<S, C>::Term> out;
  for (const auto& t : s.terms()) {
    S rm1 = t.base - T::one();
    if (!T::is_zero(rm1)) out.push_back({t.coeff * rm1, t.base, t.degree});
    if (t.degree > 0) out.push_back({t.coeff * t.base, t.base, t.degree - 1});
  }
  return ExpBinomSeq<S, C>(s.anchor(), std::move(out));
}

/// Pointwise product. Bases multiply; binomial factors multiply through the
/// Stirling conversion in binomial_product_coefficients.
template <Scalar S, class C>
ExpBinomSeq<S, C> product(const ExpBinomSeq<S, C>& a, const ExpBinomSeq<S, C>& b) {
  long m = detail::common_anchor(a, b);
  if (a.is_zero() || b.is_zero()) return ExpBinomSeq<S, C>(m);
  std::vector<typename ExpBinomSeq<S, C>::Term> out;
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      S base = ta.base * tb.base;
      C coeff = ta.coeff * tb.coeff;
      if (ta.degree == 0 && tb.degree == 0) {
        out.push_back({std::move(coeff), base, 0});
        continue;
      }
      auto weights = binomial_product_coefficients(ta.degree, tb.degree);
      for (int j = 0; j < static_cast<int>(weights.size()); ++j) {
        if (sgn(weights[j]) == 0) continue;
        out.push_back({coeff * scalar_traits<S>::from_mpq(mpq_class(weights[j])), base, j});
      }
    }
  }
  return ExpBinomSeq<S, C>(m, std::move(out));
}

template <Scalar S, class C>
ExpBinomSeq<S, C> power(const ExpBinomSeq<S, C>& s, int e) {
  if (e < 0) throw Error("seqalg", "negative sequence power");
  ExpBinomSeq<S, C> acc = make_term<S, C>(C(scalar_traits<S>::one()), scalar_traits<S>::one(), s.anchor(), 0);
  for (int i = 0; i < e; ++i) acc = product(acc, s);
  return acc;
}

/// Same sequence on a new anchor. The polynomial factor C(n-m,k) of each term
/// is re-expanded from its difference table at the new anchor.
template <Scalar S, class C>
ExpBinomSeq<S, C> reanchor(const ExpBinomSeq<S, C>& s, long m_new) {
  if (m_new == s.anchor()) return s;
  std::vector<typename ExpBinomSeq<S, C>::Term> out;
  for (const auto& t : s.terms()) {
    std::vector<mpz_class> diff(static_cast<std::size_t>(t.degree) + 1);
    for (int i = 0; i <= t.degree; ++i) diff[i] = binomial_integer(m_new + i - s.anchor(), t.degree);
    // diff[j] <- delta^j p(m_new)
    for (int level = 1; level <= t.degree; ++level)
      for (int i = t.degree; i >= level; --i) diff[i] -= diff[i - 1];
    for (int j = 0; j <= t.degree; ++j) {
      if (sgn(diff[j]) == 0) continue;
      out.push_back({t.coeff * scalar_traits<S>::from_mpq(mpq_class(diff[j])), t.base, j});
    }
  }
  return ExpBinomSeq<S, C>(m_new, std::move(out));
}

template <Scalar S, class C>
C eval(const ExpBinomSeq<S, C>& s, long n) {
  C acc = C(scalar_traits<S>::zero());
  for (const auto& t : s.terms()) acc = acc + t.coeff * (ipow(t.base, n) * binomial<S>(n - s.anchor(), t.degree));
  return acc;
}

/// Replaces every coefficient by f(coeff); used to lift scalar sequences into
/// amplitude-polynomial sequences and to evaluate them back.
template <class C2, Scalar S, class C, class F>
ExpBinomSeq<S, C2> map_coefficients(const ExpBinomSeq<S, C>& s, F&& f) {
  std::vector<typename ExpBinomSeq<S, C2>::Term> out;
  out.reserve(s.size());
  for (const auto& t : s.terms()) out.push_back({f(t.coeff), t.base, t.degree});
  return ExpBinomSeq<S, C2>(s.anchor(), std::move(out));
}

template <Scalar S>
PolySeq<S> lift(const Seq<S>& s) {
  return map_coefficients<AmpPoly<S>>(s, [](const S& c) { return AmpPoly<S>(c); });
}

template <Scalar S, class C>
std::string to_string(const ExpBinomSeq<S, C>& s) {
  if (s.is_zero()) return "0";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& t = s.terms()[i];
    if (i != 0) out += " + ";
    if constexpr (std::is_same_v<C, S>) {
      out += scalar_traits<S>::to_string(t.coeff);
    } else {
      out += "[" + t.coeff.to_string({}) + "]";
    }
    out += "*" + scalar_traits<S>::to_string(t.base) + "^n";
    if (t.degree > 0)
      out += "*C(n-" + std::to_string(s.anchor()) + "," + std::to_string(t.degree) + ")";
  }
  return out;
}

}  // namespace nmren
