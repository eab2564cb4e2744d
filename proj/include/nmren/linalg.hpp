#pragma once

#include <string>
#include <vector>

#include "nmren/error.hpp"
#include "nmren/scalar.hpp"

namespace nmren::detail {

/// Gaussian elimination for a square scalar matrix and a right-hand side whose
/// entries may be any module over S (scalars or amplitude polynomials).
/// Exact scalars pivot on the first nonzero entry, floats on the largest.
template <Scalar S, class C>
std::vector<C> solve_linear(std::vector<std::vector<S>> a, std::vector<C> b, const std::string& module,
                            const std::string& what) {
  using T = scalar_traits<S>;
  const std::size_t n = a.size();
  if (b.size() != n) throw Error(module, "dimension mismatch in " + what);
  double scale = 0.0;
  for (const auto& row : a) {
    if (row.size() != n) throw Error(module, "non-square system in " + what);
    for (const auto& v : row) scale = std::max(scale, T::magnitude(v));
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = n;
    if constexpr (T::exact) {
      for (std::size_t r = col; r < n; ++r)
        if (!T::is_zero(a[r][col])) {
          pivot = r;
          break;
        }
    } else {
      double best = 0.0;
      for (std::size_t r = col; r < n; ++r) {
        double mag = T::magnitude(a[r][col]);
        if (mag > best) {
          best = mag;
          pivot = r;
        }
      }
      if (pivot != n && best <= 1e-13 * std::max(scale, 1.0)) pivot = n;
    }
    if (pivot == n) throw Error(module, "singular system in " + what);
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    S inv = T::inverse(a[col][col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      if (T::is_zero(a[r][col]) && T::exact) continue;
      S factor = a[r][col] * inv;
      for (std::size_t c = col; c < n; ++c) a[r][c] = a[r][c] - factor * a[col][c];
      b[r] = b[r] - b[col] * factor;
    }
  }
  std::vector<C> x(n, C(T::zero()));
  for (std::size_t i = n; i-- > 0;) {
    C acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc = acc - x[c] * a[i][c];
    x[i] = acc * T::inverse(a[i][i]);
  }
  return x;
}

}  // namespace nmren::detail
