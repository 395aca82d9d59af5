#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "reflekt/matrix.hpp"

namespace reflekt {

/// Reduced row echelon form with its pivot columns.
template <class T>
struct Echelon {
  Matrix<T> reduced;
  std::vector<std::size_t> pivots;
};

/// Gauss-Jordan elimination to reduced row echelon form (zero rows dropped).
template <class T>
Echelon<T> rref(Matrix<T> m) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t p = r;
    while (p < m.rows() && m(p, c).is_zero()) ++p;
    if (p == m.rows()) continue;
    m.swap_rows(r, p);
    const T inv = m(r, c).inverse();
    for (std::size_t j = c; j < m.cols(); ++j) m(r, j) = m(r, j) * inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c).is_zero()) continue;
      const T f = m(i, c);
      for (std::size_t j = c; j < m.cols(); ++j)
        if (!m(r, j).is_zero()) m(i, j) -= f * m(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  std::vector<std::size_t> keep(r);
  for (std::size_t i = 0; i < r; ++i) keep[i] = i;
  return {m.select_rows(keep), pivots};
}

namespace detail {

/// Fraction-free (Bareiss) forward elimination. Returns the rank; `det` receives the
/// determinant for square input.
template <class T>
std::size_t bareiss(Matrix<T> m, T* det) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  if (rows == 0 || cols == 0) {
    if (det) *det = one_like(m.zero());
    return 0;
  }
  T prev = one_like(m.zero());
  bool negate = false;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m(p, c).is_zero()) ++p;
    if (p == rows) {
      if (det) {
        *det = zero_like(m.zero());
        return r;  // singular; rank is not needed by callers asking for det
      }
      continue;
    }
    if (p != r) {
      m.swap_rows(r, p);
      negate = !negate;
    }
    const T pivot = m(r, c);
    const T prev_inv = prev.inverse();
    for (std::size_t i = r + 1; i < rows; ++i) {
      const T lead = m(i, c);
      for (std::size_t j = c + 1; j < cols; ++j) {
        T v = pivot * m(i, j);
        if (!lead.is_zero() && !m(r, j).is_zero()) v -= lead * m(r, j);
        m(i, j) = prev.is_one() ? v : v * prev_inv;
      }
      m(i, c) = zero_like(m.zero());
    }
    prev = pivot;
    ++r;
  }
  if (det) {
    if (rows != cols || r < rows)
      *det = zero_like(m.zero());
    else
      *det = negate ? -m(rows - 1, cols - 1) : m(rows - 1, cols - 1);
  }
  return r;
}

}  // namespace detail

template <class T>
std::size_t rank(const Matrix<T>& m) {
  return detail::bareiss<T>(m, nullptr);
}

template <class T>
T det(const Matrix<T>& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("det: matrix is not square");
  T d = m.zero();
  detail::bareiss<T>(m, &d);
  return d;
}

/// A linear subspace of T^d, stored as a reduced echelon basis (one vector per row).
template <class T>
class Subspace {
 public:
  Subspace() = default;
  Subspace(std::size_t ambient, const T& zero) : ambient_(ambient), basis_(0, ambient, zero) {}

  /// Span of the rows of `gens`.
  static Subspace span(const Matrix<T>& gens) {
    Subspace s(gens.cols(), gens.zero());
    s.basis_ = rref(gens).reduced;
    return s;
  }

  static Subspace whole(std::size_t ambient, const T& zero) {
    return span(Matrix<T>::identity(ambient, zero));
  }

  /// Span of the coordinate axes e_i, i in `axes`.
  static Subspace coordinate(std::size_t ambient, const std::vector<std::size_t>& axes, const T& zero) {
    Matrix<T> g(axes.size(), ambient, zero);
    for (std::size_t k = 0; k < axes.size(); ++k) g(k, axes[k]) = one_like(zero);
    return span(g);
  }

  [[nodiscard]] std::size_t ambient_dim() const { return ambient_; }
  [[nodiscard]] std::size_t dim() const { return basis_.rows(); }
  [[nodiscard]] bool is_zero() const { return dim() == 0; }
  [[nodiscard]] const Matrix<T>& basis() const { return basis_; }
  [[nodiscard]] Vector<T> vector(std::size_t k) const { return basis_.row(k); }

  /// Linear functionals cutting out the subspace (rows of the returned matrix).
  [[nodiscard]] Matrix<T> annihilator() const;

  [[nodiscard]] bool contains(const Vector<T>& v) const {
    if (v.size() != ambient_) throw std::invalid_argument("contains: dimension mismatch");
    if (std::all_of(v.begin(), v.end(), [](const T& x) { return x.is_zero(); })) return true;
    Matrix<T> m = basis_;
    m.append_row(v);
    return rank(m) == dim();
  }

  [[nodiscard]] bool is_subspace_of(const Subspace& o) const {
    if (o.ambient_ != ambient_) throw std::invalid_argument("is_subspace_of: dimension mismatch");
    for (std::size_t k = 0; k < dim(); ++k)
      if (!o.contains(vector(k))) return false;
    return true;
  }

  friend bool operator==(const Subspace& a, const Subspace& b) {
    return a.ambient_ == b.ambient_ && a.basis_ == b.basis_;
  }

 private:
  std::size_t ambient_ = 0;
  Matrix<T> basis_;
};

/// Basis of {x : M x = 0}, in reduced echelon form.
template <class T>
Subspace<T> kernel_basis(const Matrix<T>& m) {
  const auto e = rref(m);
  const std::size_t n = m.cols();
  std::vector<bool> is_pivot(n, false);
  for (auto p : e.pivots) is_pivot[p] = true;
  Matrix<T> gens(0, n, m.zero());
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    Vector<T> v(n, zero_like(m.zero()));
    v[f] = one_like(m.zero());
    for (std::size_t r = 0; r < e.pivots.size(); ++r) v[e.pivots[r]] = -e.reduced(r, f);
    gens.append_row(v);
  }
  return Subspace<T>::span(gens);
}

/// Basis of {y : y^T M = 0}, in reduced echelon form.
template <class T>
Subspace<T> left_kernel_basis(const Matrix<T>& m) {
  return kernel_basis(m.transpose());
}

template <class T>
Matrix<T> Subspace<T>::annihilator() const {
  return kernel_basis(basis_).basis();
}

template <class T>
Subspace<T> intersect(const Subspace<T>& a, const Subspace<T>& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw std::invalid_argument("intersect: dimension mismatch");
  return kernel_basis(a.annihilator().vstack(b.annihilator()));
}

template <class T>
Subspace<T> sum(const Subspace<T>& a, const Subspace<T>& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw std::invalid_argument("sum: dimension mismatch");
  return Subspace<T>::span(a.basis().vstack(b.basis()));
}

/// Image M(S).
template <class T>
Subspace<T> image(const Matrix<T>& m, const Subspace<T>& s) {
  if (m.cols() != s.ambient_dim()) throw std::invalid_argument("image: dimension mismatch");
  return Subspace<T>::span((m * s.basis().transpose()).transpose());
}

/// Column space of M.
template <class T>
Subspace<T> column_space(const Matrix<T>& m) {
  return Subspace<T>::span(m.transpose());
}

/// First singular square submatrix of H (1-based-free: indices are 0-based).
struct SubmatrixWitness {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

namespace detail {

inline bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t k = c.size();
  for (std::size_t i = k; i-- > 0;) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

inline std::vector<std::size_t> first_combination(std::size_t k) {
  std::vector<std::size_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = i;
  return c;
}

}  // namespace detail

/// Property C1: every square submatrix is nonsingular. Returns the first singular
/// submatrix by (size, row set, column set) in lexicographic order, if any.
template <class T>
std::optional<SubmatrixWitness> c1_violation(const Matrix<T>& h) {
  const std::size_t kmax = std::min(h.rows(), h.cols());
  for (std::size_t k = 1; k <= kmax; ++k) {
    auto rs = detail::first_combination(k);
    do {
      auto cs = detail::first_combination(k);
      do {
        if (det(h.submatrix(rs, cs)).is_zero()) return SubmatrixWitness{rs, cs};
      } while (detail::next_combination(cs, h.cols()));
    } while (detail::next_combination(rs, h.rows()));
  }
  return std::nullopt;
}

template <class T>
bool has_c1(const Matrix<T>& h) {
  return !c1_violation(h).has_value();
}

/// Generalized cross product: signed maximal minors of an (n-1) x n matrix.
/// Spans the kernel whenever the matrix has rank n-1.
template <class T>
Vector<T> kernel_line(const Matrix<T>& m) {
  const std::size_t n = m.cols();
  if (m.rows() + 1 != n) throw std::invalid_argument("kernel_line expects an (n-1) x n matrix");
  Vector<T> out(n, m.zero());
  std::vector<std::size_t> rows(m.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::size_t> cs;
    for (std::size_t c = 0; c < n; ++c)
      if (c != j) cs.push_back(c);
    T d = n == 1 ? one_like(m.zero()) : det(m.submatrix(rows, cs));
    out[j] = (j % 2 == 0) ? d : -d;
  }
  return out;
}

}  // namespace reflekt
