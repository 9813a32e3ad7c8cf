#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>

namespace cagefit {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

using Vec6 = Vec<6>;
using Mat6 = Mat<6>;

/// LU factorization with partial pivoting for small dense systems.
/// Factors in place; the permutation is kept as a row-index map.
template <std::size_t N>
class LuDecomposition {
 public:
  explicit LuDecomposition(const Mat<N>& a) : lu_(a) {
    for (std::size_t i = 0; i < N; ++i) perm_[i] = i;
    for (std::size_t k = 0; k < N; ++k) {
      std::size_t pivot = k;
      for (std::size_t i = k + 1; i < N; ++i)
        if (std::abs(lu_[perm_[i]][k]) > std::abs(lu_[perm_[pivot]][k]))
          pivot = i;
      std::swap(perm_[k], perm_[pivot]);
      const double d = lu_[perm_[k]][k];
      if (d == 0.0 || !std::isfinite(d)) {
        singular_ = true;
        return;
      }
      for (std::size_t i = k + 1; i < N; ++i) {
        const double m = lu_[perm_[i]][k] / d;
        lu_[perm_[i]][k] = m;
        for (std::size_t j = k + 1; j < N; ++j)
          lu_[perm_[i]][j] -= m * lu_[perm_[k]][j];
      }
    }
  }

  bool singular() const { return singular_; }

  Vec<N> solve(const Vec<N>& b) const {
    Vec<N> y{};
    for (std::size_t i = 0; i < N; ++i) {
      double s = b[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) s -= lu_[perm_[i]][j] * y[j];
      y[i] = s;
    }
    for (std::size_t i = N; i-- > 0;) {
      double s = y[i];
      for (std::size_t j = i + 1; j < N; ++j) s -= lu_[perm_[i]][j] * y[j];
      y[i] = s / lu_[perm_[i]][i];
    }
    return y;
  }

 private:
  Mat<N> lu_;
  std::array<std::size_t, N> perm_{};
  bool singular_ = false;
};

template <std::size_t N>
double one_norm(const Mat<N>& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < N; ++i) col += std::abs(a[i][j]);
    best = std::max(best, col);
  }
  return best;
}

/// 1-norm condition estimate via explicit inverse columns. N is tiny here,
/// so the extra N solves cost nothing and the estimate is exact.
template <std::size_t N>
double condition_estimate(const Mat<N>& a, const LuDecomposition<N>& lu) {
  if (lu.singular()) return std::numeric_limits<double>::infinity();
  double inv_norm = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    Vec<N> e{};
    e[j] = 1.0;
    const Vec<N> col = lu.solve(e);
    double sum = 0.0;
    for (double v : col) sum += std::abs(v);
    inv_norm = std::max(inv_norm, sum);
  }
  return one_norm(a) * inv_norm;
}

/// Solves a x = b, refusing near-singular systems. Returns nullopt when a
/// pivot vanishes or the condition estimate exceeds `cond_limit`.
template <std::size_t N>
std::optional<Vec<N>> solve_checked(const Mat<N>& a, const Vec<N>& b,
                                    double cond_limit = 1e14) {
  LuDecomposition<N> lu(a);
  if (lu.singular() || condition_estimate(a, lu) > cond_limit)
    return std::nullopt;
  return lu.solve(b);
}

template <std::size_t N>
double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

/// a^T v
template <std::size_t N>
Vec<N> transpose_apply(const Mat<N>& a, const Vec<N>& v) {
  Vec<N> out{};
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < N; ++i) out[j] += a[i][j] * v[i];
  return out;
}

/// a^T a, the Gauss-Newton normal matrix.
template <std::size_t N>
Mat<N> normal_matrix(const Mat<N>& a) {
  Mat<N> out{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < N; ++k) s += a[k][i] * a[k][j];
      out[i][j] = s;
    }
  return out;
}

/// Forward-difference Jacobian of fn: R^N -> R^N, column j = (f(x+h e_j)-f(x))/h.
template <std::size_t N, class Fn>
Mat<N> forward_jacobian(Fn&& fn, const Vec<N>& x, double h) {
  const Vec<N> f0 = fn(x);
  Mat<N> j{};
  for (std::size_t c = 0; c < N; ++c) {
    Vec<N> xp = x;
    xp[c] += h;
    const Vec<N> fp = fn(xp);
    for (std::size_t r = 0; r < N; ++r) j[r][c] = (fp[r] - f0[r]) / h;
  }
  return j;
}

}  // namespace cagefit
