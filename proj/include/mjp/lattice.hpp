#pragma once

// Exact integer linear algebra for jump matrices: column-style Hermite
// normal form with its unimodular transform, and integer kernel bases.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace mjp {

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

namespace checked {
std::int64_t add(std::int64_t a, std::int64_t b);
std::int64_t sub(std::int64_t a, std::int64_t b);
std::int64_t mul(std::int64_t a, std::int64_t b);
}  // namespace checked

/// Dense row-major integer matrix.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols);
  IntMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows);

  static IntMatrix identity(std::size_t n);
  static IntMatrix from_columns(std::size_t rows,
                                const std::vector<std::vector<std::int64_t>>& cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::int64_t& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<std::int64_t> column(std::size_t j) const;
  std::vector<std::int64_t> row(std::size_t i) const;
  IntMatrix without_row(std::size_t i) const;
  IntMatrix select_rows(std::span<const std::size_t> idx) const;
  IntMatrix select_columns(std::span<const std::size_t> idx) const;
  IntMatrix transposed() const;

  bool is_zero() const;

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int64_t> data_;
};

/// Checked product; throws OverflowError instead of wrapping.
IntMatrix multiply(const IntMatrix& a, const IntMatrix& b);
std::vector<std::int64_t> multiply(const IntMatrix& a, std::span<const std::int64_t> x);

/// Rank over the rationals (fraction-free elimination).
std::size_t rank(const IntMatrix& a);

/// Indices of the first maximal linearly independent set of rows,
/// chosen greedily from the top.
std::vector<std::size_t> independent_rows(const IntMatrix& a);

/// Determinant of a square matrix (Bareiss).
std::int64_t determinant(const IntMatrix& a);

struct HermiteForm {
  IntMatrix h;  // h == a * u
  IntMatrix u;  // unimodular
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_rows;  // i_1 < ... < i_s
};

/// Column-style Hermite normal form H = A U. Pivots are made positive and
/// entries left of a pivot satisfy floor(H[i_j][l] / H[i_j][j]) == 0.
/// Dependent rows are ignored while building U; H is still A * U.
HermiteForm hermite_normal_form(const IntMatrix& a);

/// True if h satisfies the four Hermite normal form clauses for rank s.
bool is_hermite_normal_form(const IntMatrix& h, std::size_t s);

/// Z-basis (as columns) of {x in Z^cols : A x = 0}. Has cols - rank columns.
IntMatrix kernel_basis(const IntMatrix& a);

/// Kernel basis of A with row j removed.
IntMatrix kernel_basis_excluding_row(const IntMatrix& a, std::size_t j);

/// Columns of `basis` that are not in ker(A).
IntMatrix drop_kernel_columns(const IntMatrix& a, const IntMatrix& basis);

/// Moves that change only species j: a basis of ker(A without row j),
/// arranged so every column outside ker(A) is returned.
IntMatrix border_moves(const IntMatrix& a, std::size_t j);

/// Whether v is an integer combination of the columns of `basis`.
bool in_lattice(const IntMatrix& basis, std::span<const std::int64_t> v);

/// Whether the column lattices of two matrices coincide.
bool same_lattice(const IntMatrix& a, const IntMatrix& b);

}  // namespace mjp
