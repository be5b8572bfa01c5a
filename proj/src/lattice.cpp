#include "mjp/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>
#include <utility>

namespace mjp {

namespace checked {

std::int64_t add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out))
    throw OverflowError("integer overflow in addition");
  return out;
}

std::int64_t sub(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_sub_overflow(a, b, &out))
    throw OverflowError("integer overflow in subtraction");
  return out;
}

std::int64_t mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out))
    throw OverflowError("integer overflow in multiplication");
  return out;
}

}  // namespace checked

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t abs_checked(std::int64_t a) {
  if (a == INT64_MIN) throw OverflowError("integer overflow in abs");
  return a < 0 ? -a : a;
}

// col[dst] -= q * col[src], applied to every row.
void column_axpy(IntMatrix& m, std::size_t dst, std::size_t src, std::int64_t q) {
  if (q == 0) return;
  for (std::size_t i = 0; i < m.rows(); ++i)
    m(i, dst) = checked::sub(m(i, dst), checked::mul(q, m(i, src)));
}

void column_swap(IntMatrix& m, std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t i = 0; i < m.rows(); ++i) std::swap(m(i, a), m(i, b));
}

void column_negate(IntMatrix& m, std::size_t c) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, c) = checked::sub(0, m(i, c));
}

}  // namespace

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("IntMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from_columns(std::size_t rows,
                                  const std::vector<std::vector<std::int64_t>>& cols) {
  IntMatrix m(rows, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != rows) throw std::invalid_argument("IntMatrix: column length mismatch");
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = cols[j][i];
  }
  return m;
}

std::vector<std::int64_t> IntMatrix::column(std::size_t j) const {
  std::vector<std::int64_t> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

std::vector<std::int64_t> IntMatrix::row(std::size_t i) const {
  return {data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
          data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_)};
}

IntMatrix IntMatrix::without_row(std::size_t r) const {
  if (r >= rows_) throw std::out_of_range("without_row: row index out of range");
  IntMatrix m(rows_ - 1, cols_);
  for (std::size_t i = 0, k = 0; i < rows_; ++i) {
    if (i == r) continue;
    for (std::size_t j = 0; j < cols_; ++j) m(k, j) = (*this)(i, j);
    ++k;
  }
  return m;
}

IntMatrix IntMatrix::select_rows(std::span<const std::size_t> idx) const {
  IntMatrix m(idx.size(), cols_);
  for (std::size_t k = 0; k < idx.size(); ++k)
    for (std::size_t j = 0; j < cols_; ++j) m(k, j) = (*this)(idx[k], j);
  return m;
}

IntMatrix IntMatrix::select_columns(std::span<const std::size_t> idx) const {
  IntMatrix m(rows_, idx.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < idx.size(); ++k) m(i, k) = (*this)(i, idx[k]);
  return m;
}

IntMatrix IntMatrix::transposed() const {
  IntMatrix m(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
  return m;
}

bool IntMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](std::int64_t v) { return v == 0; });
}

IntMatrix multiply(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: dimension mismatch");
  IntMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const std::int64_t aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j)
        c(i, j) = checked::add(c(i, j), checked::mul(aik, b(k, j)));
    }
  return c;
}

std::vector<std::int64_t> multiply(const IntMatrix& a, std::span<const std::int64_t> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("multiply: dimension mismatch");
  std::vector<std::int64_t> y(a.rows(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      y[i] = checked::add(y[i], checked::mul(a(i, j), x[j]));
  return y;
}

namespace {

// Bareiss elimination in place; returns the rank. When `det` is given and
// the matrix is square, stores the determinant.
std::size_t bareiss(IntMatrix m, std::int64_t* det) {
  const std::size_t rows = m.rows(), cols = m.cols();
  std::size_t r = 0;
  std::int64_t prev = 1;
  int sign = 1;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && m(piv, c) == 0) ++piv;
    if (piv == rows) continue;
    if (piv != r) {
      for (std::size_t j = 0; j < cols; ++j) std::swap(m(piv, j), m(r, j));
      sign = -sign;
    }
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        const std::int64_t num = checked::sub(checked::mul(m(r, c), m(i, j)),
                                              checked::mul(m(i, c), m(r, j)));
        m(i, j) = num / prev;  // exact by Sylvester's identity
      }
      m(i, c) = 0;
    }
    prev = m(r, c);
    ++r;
  }
  if (det) {
    if (rows != cols) throw std::invalid_argument("determinant: matrix not square");
    *det = (r < rows) ? 0 : checked::mul(sign, rows == 0 ? 1 : m(rows - 1, cols - 1));
  }
  return r;
}

}  // namespace

std::size_t rank(const IntMatrix& a) { return bareiss(a, nullptr); }

std::int64_t determinant(const IntMatrix& a) {
  std::int64_t d = 0;
  bareiss(a, &d);
  return d;
}

std::vector<std::size_t> independent_rows(const IntMatrix& a) {
  std::vector<std::size_t> keep;
  std::size_t current = 0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    keep.push_back(i);
    const std::size_t r = rank(a.select_rows(keep));
    if (r > current) {
      current = r;
    } else {
      keep.pop_back();
    }
  }
  return keep;
}

HermiteForm hermite_normal_form(const IntMatrix& a) {
  const std::size_t n = a.cols();
  HermiteForm out;
  out.pivot_rows = independent_rows(a);
  out.rank = out.pivot_rows.size();

  IntMatrix w = a.select_rows(out.pivot_rows);
  IntMatrix u = IntMatrix::identity(n);

  for (std::size_t k = 0; k < out.rank; ++k) {
    const std::size_t col = k;
    // Euclidean reduction of row k over columns col..n-1.
    for (;;) {
      std::size_t best = n;
      for (std::size_t c = col; c < n; ++c)
        if (w(k, c) != 0 && (best == n || abs_checked(w(k, c)) < abs_checked(w(k, best))))
          best = c;
      if (best == n) throw std::logic_error("hermite_normal_form: dependent row selected");
      column_swap(w, col, best);
      column_swap(u, col, best);
      bool done = true;
      for (std::size_t c = col + 1; c < n; ++c) {
        if (w(k, c) == 0) continue;
        const std::int64_t q = w(k, c) / w(k, col);
        column_axpy(w, c, col, q);
        column_axpy(u, c, col, q);
        if (w(k, c) != 0) done = false;
      }
      if (done) break;
    }
    if (w(k, col) < 0) {
      column_negate(w, col);
      column_negate(u, col);
    }
    for (std::size_t l = 0; l < col; ++l) {
      const std::int64_t q = floor_div(w(k, l), w(k, col));
      column_axpy(w, l, col, q);
      column_axpy(u, l, col, q);
    }
  }

  out.h = multiply(a, u);
  out.u = std::move(u);
  return out;
}

bool is_hermite_normal_form(const IntMatrix& h, std::size_t s) {
  if (s > h.cols()) return false;
  std::vector<std::size_t> piv(s);
  std::size_t prev = 0;
  for (std::size_t j = 0; j < s; ++j) {
    std::size_t i = 0;
    while (i < h.rows() && h(i, j) == 0) ++i;
    if (i == h.rows()) return false;
    if (j > 0 && i <= prev) return false;
    piv[j] = i;
    prev = i;
  }
  for (std::size_t j = s; j < h.cols(); ++j)
    for (std::size_t i = 0; i < h.rows(); ++i)
      if (h(i, j) != 0) return false;
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t l = 0; l < j; ++l)
      if (floor_div(h(piv[j], l), h(piv[j], j)) != 0) return false;
  return true;
}

IntMatrix kernel_basis(const IntMatrix& a) {
  const HermiteForm hf = hermite_normal_form(a);
  std::vector<std::size_t> idx(a.cols() - hf.rank);
  std::iota(idx.begin(), idx.end(), hf.rank);
  return hf.u.select_columns(idx);
}

IntMatrix kernel_basis_excluding_row(const IntMatrix& a, std::size_t j) {
  if (j >= a.rows()) throw std::out_of_range("kernel_basis_excluding_row: row index out of range");
  return kernel_basis(a.without_row(j));
}

IntMatrix drop_kernel_columns(const IntMatrix& a, const IntMatrix& basis) {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < basis.cols(); ++c) {
    const auto col = basis.column(c);
    const auto img = multiply(a, col);
    if (std::any_of(img.begin(), img.end(), [](std::int64_t v) { return v != 0; }))
      keep.push_back(c);
  }
  return basis.select_columns(keep);
}

IntMatrix border_moves(const IntMatrix& a, std::size_t j) {
  return drop_kernel_columns(a, kernel_basis_excluding_row(a, j));
}

bool in_lattice(const IntMatrix& basis, std::span<const std::int64_t> v) {
  if (v.size() != basis.rows()) throw std::invalid_argument("in_lattice: dimension mismatch");
  if (basis.cols() == 0)
    return std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == 0; });
  // The column lattice of `basis` equals that of its Hermite form.
  const HermiteForm hf = hermite_normal_form(basis);
  const std::size_t s = hf.rank;
  std::vector<std::size_t> piv(s);
  for (std::size_t j = 0; j < s; ++j) {
    std::size_t i = 0;
    while (hf.h(i, j) == 0) ++i;
    piv[j] = i;
  }
  std::vector<std::int64_t> x(s, 0);
  for (std::size_t j = 0; j < s; ++j) {
    std::int64_t rhs = v[piv[j]];
    for (std::size_t l = 0; l < j; ++l) rhs = checked::sub(rhs, checked::mul(hf.h(piv[j], l), x[l]));
    if (rhs % hf.h(piv[j], j) != 0) return false;
    x[j] = rhs / hf.h(piv[j], j);
  }
  for (std::size_t i = 0; i < basis.rows(); ++i) {
    std::int64_t acc = 0;
    for (std::size_t j = 0; j < s; ++j) acc = checked::add(acc, checked::mul(hf.h(i, j), x[j]));
    if (acc != v[i]) return false;
  }
  return true;
}

bool same_lattice(const IntMatrix& a, const IntMatrix& b) {
  if (a.rows() != b.rows()) return false;
  for (std::size_t c = 0; c < a.cols(); ++c)
    if (!in_lattice(b, a.column(c))) return false;
  for (std::size_t c = 0; c < b.cols(); ++c)
    if (!in_lattice(a, b.column(c))) return false;
  return true;
}

}  // namespace mjp
