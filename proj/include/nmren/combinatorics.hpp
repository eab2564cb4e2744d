#pragma once

// Generalized binomials and the Stirling-number bridge between the falling
// factorial basis C(x,k) and monomials x^p.

#include <vector>

#include <gmpxx.h>

#include "nmren/error.hpp"
#include "nmren/scalar.hpp"

namespace nmren {

/// Largest binomial degree the product tables support.
inline constexpr int kMaxBinomialDegree = 64;

/// C(x, k) = x(x-1)...(x-k+1)/k! for any integer x, including negative x.
inline mpz_class binomial_integer(long x, int k) {
  if (k < 0) return 0;
  mpz_class out;
  mpz_class top(x);
  mpz_bin_ui(out.get_mpz_t(), top.get_mpz_t(), static_cast<unsigned long>(k));
  return out;
}

template <Scalar S>
S binomial(long x, int k) {
  if constexpr (scalar_traits<S>::exact) {
    return scalar_traits<S>::from_mpq(mpq_class(binomial_integer(x, k)));
  } else {
    if (k < 0) return scalar_traits<S>::zero();
    double acc = 1.0;
    for (int i = 0; i < k; ++i) acc = acc * static_cast<double>(x - i) / static_cast<double>(i + 1);
    return scalar_traits<S>::from_double(acc);
  }
}

namespace detail {

struct StirlingTables {
  // first[n][k]: signed Stirling numbers of the first kind, x^(falling n) = sum_k first[n][k] x^k.
  // second[n][k]: Stirling numbers of the second kind, x^n = sum_k second[n][k] x^(falling k).
  std::vector<std::vector<mpz_class>> first;
  std::vector<std::vector<mpz_class>> second;
  std::vector<mpz_class> factorial;

  StirlingTables() {
    const int n_max = 2 * kMaxBinomialDegree;
    first.assign(n_max + 1, std::vector<mpz_class>(n_max + 1, 0));
    second.assign(n_max + 1, std::vector<mpz_class>(n_max + 1, 0));
    factorial.assign(n_max + 1, 1);
    first[0][0] = 1;
    second[0][0] = 1;
    for (int n = 1; n <= n_max; ++n) {
      factorial[n] = factorial[n - 1] * n;
      for (int k = 1; k <= n; ++k) {
        first[n][k] = first[n - 1][k - 1] - mpz_class(n - 1) * first[n - 1][k];
        second[n][k] = second[n - 1][k - 1] + mpz_class(k) * second[n - 1][k];
      }
    }
  }
};

inline const StirlingTables& stirling_tables() {
  static const StirlingTables tables;
  return tables;
}

}  // namespace detail

inline const mpz_class& stirling_first(int n, int k) { return detail::stirling_tables().first.at(n).at(k); }
inline const mpz_class& stirling_second(int n, int k) { return detail::stirling_tables().second.at(n).at(k); }

/// Coefficients c_j with C(x,a)·C(x,b) = sum_j c_j C(x,j), computed through the
/// monomial basis: C(x,k) = sum_p s(k,p) x^p / k! and x^p = sum_j S(p,j) j! C(x,j).
inline std::vector<mpz_class> binomial_product_coefficients(int a, int b) {
  if (a < 0 || b < 0 || a > kMaxBinomialDegree || b > kMaxBinomialDegree)
    throw Error("seqalg", "binomial degree outside the supported range 0.." +
                              std::to_string(kMaxBinomialDegree));
  const auto& t = detail::stirling_tables();
  std::vector<mpq_class> mono(static_cast<std::size_t>(a + b + 1), mpq_class(0));
  for (int p = 0; p <= a; ++p) {
    if (sgn(t.first[a][p]) == 0) continue;
    for (int q = 0; q <= b; ++q) {
      if (sgn(t.first[b][q]) == 0) continue;
      mono[p + q] += mpq_class(t.first[a][p] * t.first[b][q]);
    }
  }
  mpz_class denom = t.factorial[a] * t.factorial[b];
  std::vector<mpz_class> out(static_cast<std::size_t>(a + b + 1), mpz_class(0));
  for (int j = 0; j <= a + b; ++j) {
    mpq_class acc = 0;
    for (int p = j; p <= a + b; ++p) acc += mono[p] * mpq_class(t.second[p][j]);
    acc *= mpq_class(t.factorial[j]);
    acc /= mpq_class(denom);
    acc.canonicalize();
    if (acc.get_den() != 1) throw Error("seqalg", "non-integral binomial product coefficient");
    out[j] = acc.get_num();
  }
  return out;
}

}  // namespace nmren
