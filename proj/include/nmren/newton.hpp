#pragma once

// Newton-Maclaurin expansion y(n) = sum_k delta^k y(m) C(n-m, k) of arbitrary
// sequences about an integer anchor m.

#include <functional>
#include <span>
#include <vector>

#include "nmren/combinatorics.hpp"
#include "nmren/error.hpp"
#include "nmren/seqalg.hpp"

namespace nmren {

/// Deterministic map n -> y(n). Must be safe to call concurrently.
template <Scalar S>
using SequenceOracle = std::function<S(long)>;

template <Scalar S>
struct DifferenceTable {
  long anchor = 0;
  std::vector<S> values;  // values[k] = delta^k y(anchor)

  std::size_t order() const { return values.empty() ? 0 : values.size() - 1; }
};

template <Scalar S, class C>
SequenceOracle<S> oracle_of(const ExpBinomSeq<S, C>& s) {
  return [s](long n) { return eval(s, n); };
}

/// delta^k y(m) = sum_{j=0}^{k} (-1)^{k-j} C(k,j) y(m+j), for k = 0..K.
template <Scalar S>
DifferenceTable<S> difference_table(const SequenceOracle<S>& y, long m, int order) {
  if (order < 0) throw Error("newton", "truncation order must be nonnegative");
  std::vector<S> samples;
  samples.reserve(static_cast<std::size_t>(order) + 1);
  for (int j = 0; j <= order; ++j) samples.push_back(y(m + j));
  DifferenceTable<S> table{m, {}};
  table.values.reserve(samples.size());
  for (int k = 0; k <= order; ++k) {
    S acc = scalar_traits<S>::zero();
    for (int j = 0; j <= k; ++j) {
      S w = binomial<S>(k, j);
      acc = ((k - j) % 2 == 0) ? acc + w * samples[j] : acc - w * samples[j];
    }
    table.values.push_back(acc);
  }
  return table;
}

/// Same table built by repeated differencing of the sample row.
template <Scalar S>
DifferenceTable<S> difference_table_recursive(const SequenceOracle<S>& y, long m, int order) {
  if (order < 0) throw Error("newton", "truncation order must be nonnegative");
  std::vector<S> row;
  for (int j = 0; j <= order; ++j) row.push_back(y(m + j));
  DifferenceTable<S> table{m, {}};
  for (int k = 0; k <= order; ++k) {
    table.values.push_back(row.front());
    for (std::size_t j = 0; j + 1 < row.size(); ++j) row[j] = row[j + 1] - row[j];
    row.pop_back();
  }
  return table;
}

template <Scalar S>
S newton_reconstruct(const DifferenceTable<S>& table, long n) {
  S acc = scalar_traits<S>::zero();
  for (std::size_t k = 0; k < table.values.size(); ++k)
    acc = acc + table.values[k] * binomial<S>(n - table.anchor, static_cast<int>(k));
  return acc;
}

/// Conditioning scale of newton_reconstruct: sum_k |delta^k y(m)| |C(n-m,k)|.
template <Scalar S>
double reconstruction_magnitude(const DifferenceTable<S>& table, long n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < table.values.size(); ++k)
    acc += scalar_traits<S>::magnitude(table.values[k]) *
           scalar_traits<S>::magnitude(binomial<S>(n - table.anchor, static_cast<int>(k)));
  return acc;
}

/// The truncated expansion as an exponential-binomial sequence (base 1 terms).
template <Scalar S>
Seq<S> newton_series(const DifferenceTable<S>& table) {
  std::vector<typename Seq<S>::Term> terms;
  for (std::size_t k = 0; k < table.values.size(); ++k)
    terms.push_back({table.values[k], scalar_traits<S>::one(), static_cast<int>(k)});
  return Seq<S>(table.anchor, std::move(terms));
}

/// Partial difference in the anchor: y(n, m+1) - y(n, m) for the order-K
/// truncated expansions. Vanishes for polynomials of degree <= K.
template <Scalar S>
S partial_delta_m(const SequenceOracle<S>& y, long m, long n, int order) {
  auto here = difference_table(y, m, order);
  auto next = difference_table(y, m + 1, order);
  return newton_reconstruct(next, n) - newton_reconstruct(here, n);
}

/// Residuals Y_k(m) - delta^k Y_0(m) for k = 1..r, where tables_k[k-1] is the
/// difference table of Y_k (only its leading entry is used).
template <Scalar S>
std::vector<S> renorm_consistency_ladder(const DifferenceTable<S>& y0_table,
                                         std::span<const DifferenceTable<S>> tables_k) {
  std::vector<S> residuals;
  residuals.reserve(tables_k.size());
  for (std::size_t k = 1; k <= tables_k.size(); ++k) {
    const auto& tk = tables_k[k - 1];
    if (tk.anchor != y0_table.anchor) throw Error("newton", "difference tables must share an anchor");
    if (tk.values.empty()) throw Error("newton", "empty difference table");
    if (y0_table.values.size() <= k)
      throw Error("newton", "Y0 table too short for consistency order " + std::to_string(k));
    residuals.push_back(tk.values.front() - y0_table.values[k]);
  }
  return residuals;
}

}  // namespace nmren
