#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "exkit/error.hpp"
#include "exkit/ring.hpp"

namespace exkit::linalg {

/// Z/p for prime p.
struct PrimeField {
  std::int64_t p;
  using value_type = std::int64_t;
  value_type zero() const { return 0; }
  value_type one() const { return 1 % p; }
  value_type add(value_type a, value_type b) const { return detail::mod(a + b, p); }
  value_type sub(value_type a, value_type b) const { return detail::mod(a - b, p); }
  value_type mul(value_type a, value_type b) const { return detail::mulmod(a, b, p); }
  value_type inv(value_type a) const { return *detail::inverse_mod(a, p); }
  bool is_zero(value_type a) const { return a == 0; }
};

struct RationalField {
  using value_type = mpq_class;
  value_type zero() const { return 0; }
  value_type one() const { return 1; }
  value_type add(const value_type& a, const value_type& b) const { return a + b; }
  value_type sub(const value_type& a, const value_type& b) const { return a - b; }
  value_type mul(const value_type& a, const value_type& b) const { return a * b; }
  value_type inv(const value_type& a) const { return 1 / a; }
  bool is_zero(const value_type& a) const { return sgn(a) == 0; }
};

/// Dense row-major matrix over a field. Vectors are n x 1 matrices.
template <class F>
struct Matrix {
  using V = typename F::value_type;
  F field;
  std::size_t rows = 0, cols = 0;
  std::vector<V> a;

  Matrix() = default;
  Matrix(F f, std::size_t r, std::size_t c) : field(f), rows(r), cols(c), a(r * c, f.zero()) {}

  static Matrix identity(F f, std::size_t n) {
    Matrix m(f, n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = f.one();
    return m;
  }

  V& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const V& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  Matrix column(std::size_t j) const {
    Matrix c(field, rows, 1);
    for (std::size_t i = 0; i < rows; ++i) c(i, 0) = (*this)(i, j);
    return c;
  }

  bool is_zero() const {
    for (const auto& v : a)
      if (!field.is_zero(v)) return false;
    return true;
  }

  friend bool operator==(const Matrix& x, const Matrix& y) {
    return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
  }
};

template <class F>
Matrix<F> operator*(const Matrix<F>& x, const Matrix<F>& y) {
  Matrix<F> z(x.field, x.rows, y.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t l = 0; l < x.cols; ++l) {
      if (x.field.is_zero(x(i, l))) continue;
      for (std::size_t j = 0; j < y.cols; ++j) z(i, j) = x.field.add(z(i, j), x.field.mul(x(i, l), y(l, j)));
    }
  return z;
}

template <class F>
Matrix<F> operator+(const Matrix<F>& x, const Matrix<F>& y) {
  Matrix<F> z = x;
  for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] = x.field.add(x.a[i], y.a[i]);
  return z;
}

template <class F>
Matrix<F> operator-(const Matrix<F>& x, const Matrix<F>& y) {
  Matrix<F> z = x;
  for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] = x.field.sub(x.a[i], y.a[i]);
  return z;
}

template <class F>
Matrix<F> transpose(const Matrix<F>& x) {
  Matrix<F> t(x.field, x.cols, x.rows);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) t(j, i) = x(i, j);
  return t;
}

/// Columns side by side.
template <class F>
Matrix<F> hstack(const F& field, std::size_t rows, const std::vector<Matrix<F>>& cols) {
  std::size_t total = 0;
  for (const auto& c : cols) total += c.cols;
  Matrix<F> m(field, rows, total);
  std::size_t off = 0;
  for (const auto& c : cols) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < c.cols; ++j) m(i, off + j) = c(i, j);
    off += c.cols;
  }
  return m;
}

/// Reduced row echelon form in place; returns pivot columns.
template <class F>
std::vector<std::size_t> rref(Matrix<F>& m) {
  const F& f = m.field;
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols && r < m.rows; ++c) {
    std::size_t piv = m.rows;
    for (std::size_t i = r; i < m.rows; ++i)
      if (!f.is_zero(m(i, c))) { piv = i; break; }
    if (piv == m.rows) continue;
    if (piv != r)
      for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(piv, j), m(r, j));
    const auto s = f.inv(m(r, c));
    for (std::size_t j = 0; j < m.cols; ++j) m(r, j) = f.mul(m(r, j), s);
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == r || f.is_zero(m(i, c))) continue;
      const auto factor = m(i, c);
      for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = f.sub(m(i, j), f.mul(factor, m(r, j)));
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

template <class F>
std::size_t rank(Matrix<F> m) {
  return rref(m).size();
}

/// Basis of the null space {v : m v = 0}, as a matrix whose columns are the basis.
template <class F>
Matrix<F> kernel(const Matrix<F>& m) {
  Matrix<F> r = m;
  auto piv = rref(r);
  std::vector<bool> is_piv(m.cols, false);
  for (auto c : piv) is_piv[c] = true;
  std::vector<Matrix<F>> basis;
  for (std::size_t free = 0; free < m.cols; ++free) {
    if (is_piv[free]) continue;
    Matrix<F> v(m.field, m.cols, 1);
    v(free, 0) = m.field.one();
    for (std::size_t k = 0; k < piv.size(); ++k) v(piv[k], 0) = m.field.sub(m.field.zero(), r(k, free));
    basis.push_back(v);
  }
  return hstack(m.field, m.cols, basis);
}

/// Maximal linearly independent subset of the columns, in order.
template <class F>
Matrix<F> column_basis(const Matrix<F>& m) {
  Matrix<F> r = m;
  auto piv = rref(r);
  std::vector<Matrix<F>> cols;
  for (auto c : piv) cols.push_back(m.column(c));
  return hstack(m.field, m.rows, cols);
}

/// Some X with X * a == b, if one exists (free variables set to zero).
template <class F>
std::optional<Matrix<F>> solve_left(const Matrix<F>& a, const Matrix<F>& b) {
  // X a = b  <=>  a^T X^T = b^T
  const Matrix<F> at = transpose(a), bt = transpose(b);
  Matrix<F> aug = hstack(a.field, at.rows, {at, bt});
  auto piv = rref(aug);
  for (auto c : piv)
    if (c >= at.cols) return std::nullopt;
  Matrix<F> xt(a.field, at.cols, bt.cols);
  for (std::size_t k = 0; k < piv.size(); ++k)
    for (std::size_t j = 0; j < bt.cols; ++j) xt(piv[k], j) = aug(k, at.cols + j);
  return transpose(xt);
}

template <class F>
std::optional<Matrix<F>> inverse(const Matrix<F>& m) {
  Matrix<F> aug = hstack(m.field, m.rows, {m, Matrix<F>::identity(m.field, m.rows)});
  auto piv = rref(aug);
  if (piv.size() < m.rows || piv[m.rows - 1] >= m.cols) return std::nullopt;
  Matrix<F> inv(m.field, m.rows, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.rows; ++j) inv(i, j) = aug(i, m.cols + j);
  return inv;
}

/// Extends `keep` (independent columns) by columns drawn from `candidates`
/// until the span of keep + extension + `avoid` reaches `target_dim`.
/// Returns keep + extension.
template <class F>
Matrix<F> extend_avoiding(const Matrix<F>& keep, const Matrix<F>& avoid, const Matrix<F>& candidates,
                          std::size_t target_dim) {
  const std::size_t n = candidates.rows;
  std::vector<Matrix<F>> chosen;
  for (std::size_t j = 0; j < keep.cols; ++j) chosen.push_back(keep.column(j));
  auto current = [&] {
    std::vector<Matrix<F>> all = chosen;
    all.push_back(avoid);
    return hstack(candidates.field, n, all);
  };
  std::size_t r = rank(current());
  for (std::size_t j = 0; j < candidates.cols && r < target_dim; ++j) {
    chosen.push_back(candidates.column(j));
    std::size_t nr = rank(current());
    if (nr > r) r = nr;
    else chosen.pop_back();
  }
  return hstack(candidates.field, n, chosen);
}

/// Result of splitting the identity f of the corner fRf along a + b = f.
template <class F>
struct KernelSplit {
  Matrix<F> f2, f3;  // orthogonal idempotents, f2 + f3 = f
  Matrix<F> s2, s3;  // corner elements with f2 = s2 a, f3 = s3 b
};

/// Kernel-splitting decomposition in the corner f End(V) f, for a = faf,
/// b = fbf, a + b = f. f2 projects onto a complement W of ker(a) inside fV
/// with W containing ker(b) ∩ fV, along ker(a) ⊕ (1-f)V. With f = 1 this is
/// the plain suitable decomposition of x + (1-x) = 1.
template <class F>
std::optional<KernelSplit<F>> kernel_split(const Matrix<F>& f, const Matrix<F>& a, const Matrix<F>& b) {
  const F& fld = f.field;
  const std::size_t n = f.rows;
  const Matrix<F> id = Matrix<F>::identity(fld, n);
  const Matrix<F> fv = column_basis(f);           // basis of fV
  const Matrix<F> cv = column_basis(id - f);      // basis of (1-f)V
  auto restricted_kernel = [&](const Matrix<F>& x) {
    if (fv.cols == 0) return Matrix<F>(fld, n, 0);
    Matrix<F> coeffs = kernel(x * fv);
    return fv * coeffs;
  };
  const Matrix<F> ka = restricted_kernel(a);  // ker(a) ∩ fV
  const Matrix<F> kb = restricted_kernel(b);  // ker(b) ∩ fV
  if (rank(hstack(fld, n, {ka, kb})) != ka.cols + kb.cols) return std::nullopt;  // a + b != f on fV
  Matrix<F> w = extend_avoiding(kb, ka, fv, fv.cols);
  if (w.cols + ka.cols != fv.cols) return std::nullopt;
  Matrix<F> basis = hstack(fld, n, {w, ka, cv});
  auto binv = inverse(basis);
  if (!binv) return std::nullopt;
  Matrix<F> image = hstack(fld, n, {w, Matrix<F>(fld, n, ka.cols + cv.cols)});
  KernelSplit<F> out{image * *binv, Matrix<F>(fld, n, n), Matrix<F>(fld, n, n), Matrix<F>(fld, n, n)};
  out.f3 = f - out.f2;
  auto s2 = solve_left(a, out.f2);
  auto s3 = solve_left(b, out.f3);
  if (!s2 || !s3) return std::nullopt;
  out.s2 = f * *s2 * f;
  out.s3 = f * *s3 * f;
  return out;
}

}  // namespace exkit::linalg
