#include <gtest/gtest.h>

#include <random>

#include "mjp/lattice.hpp"

namespace mjp {
namespace {

const IntMatrix kOregonator{{1, -1, 1, -2, 0}, {-1, -1, 0, 0, 1}, {0, 0, 1, 0, -1}};
const IntMatrix kProkaryotic{{0, 0, 1, 0, 0, 0, -1, 0},
                             {0, 0, 0, 1, -2, 2, 0, -1},
                             {-1, 1, 0, 0, 1, -1, 0, 0},
                             {-1, 1, 0, 0, 0, 0, 0, 0}};

IntMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_int_distribution<int> entry(-3, 3);
  IntMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = entry(rng);
  return m;
}

TEST(HermiteNormalForm, IdentityIsFixed) {
  const IntMatrix id = IntMatrix::identity(3);
  const HermiteForm f = hermite_normal_form(id);
  EXPECT_EQ(f.h, id);
  EXPECT_EQ(f.u, id);
  EXPECT_EQ(f.rank, 3u);
}

TEST(HermiteNormalForm, SingleRow) {
  const IntMatrix a{{2, 4}};
  const HermiteForm f = hermite_normal_form(a);
  EXPECT_EQ(f.h, (IntMatrix{{2, 0}}));
  EXPECT_EQ(multiply(a, f.u), f.h);
  EXPECT_EQ(std::abs(determinant(f.u)), 1);
}

TEST(HermiteNormalForm, OregonatorStaircase) {
  const HermiteForm f = hermite_normal_form(kOregonator);
  EXPECT_EQ(f.rank, 3u);
  EXPECT_EQ(multiply(kOregonator, f.u), f.h);
  EXPECT_EQ(std::abs(determinant(f.u)), 1);
  EXPECT_TRUE(is_hermite_normal_form(f.h, 3));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(f.h(i, 3), 0);
    EXPECT_EQ(f.h(i, 4), 0);
  }
}

TEST(HermiteNormalForm, DependentRowsAreTolerated) {
  const IntMatrix a{{1, 2, 3}, {2, 4, 6}, {0, 1, 1}};
  const HermiteForm f = hermite_normal_form(a);
  EXPECT_EQ(f.rank, 2u);
  EXPECT_EQ(multiply(a, f.u), f.h);
  EXPECT_EQ(std::abs(determinant(f.u)), 1);
}

TEST(HermiteNormalForm, OverflowIsReported) {
  const std::int64_t big = std::int64_t{1} << 62;
  EXPECT_THROW(multiply(IntMatrix{{big, big}}, IntMatrix{{2}, {2}}), OverflowError);
  EXPECT_THROW(checked::mul(big, 4), OverflowError);
}

TEST(HermiteNormalForm, RandomMatricesSatisfyDefinition) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t rows = 1 + rng() % 6, cols = 1 + rng() % 8;
    const IntMatrix a = random_matrix(rng, rows, cols);
    if (a.is_zero()) continue;
    const HermiteForm f = hermite_normal_form(a);
    ASSERT_EQ(multiply(a, f.u), f.h);
    ASSERT_EQ(std::abs(determinant(f.u)), 1);
    ASSERT_EQ(f.rank, rank(a));
    ASSERT_TRUE(is_hermite_normal_form(f.h.select_rows(f.pivot_rows), f.rank));
  }
}

TEST(KernelBasis, SingleRowMatchesBruteForce) {
  const IntMatrix a{{2, 4}};
  const IntMatrix v = kernel_basis(a);
  ASSERT_EQ(v.cols(), 1u);
  EXPECT_TRUE(multiply(a, v).is_zero());
  EXPECT_TRUE(same_lattice(v, IntMatrix{{-2}, {1}}));
  for (std::int64_t x = -5; x <= 5; ++x)
    for (std::int64_t y = -5; y <= 5; ++y)
      if (2 * x + 4 * y == 0) EXPECT_TRUE(in_lattice(v, std::vector<std::int64_t>{x, y})) << x << "," << y;
}

TEST(KernelBasis, OregonatorMatchesPublishedBasis) {
  const IntMatrix v = kernel_basis(kOregonator);
  EXPECT_EQ(v.cols(), 2u);
  EXPECT_TRUE(multiply(kOregonator, v).is_zero());
  const IntMatrix published = IntMatrix::from_columns(5, {{1, -1, 0, 1, 0}, {1, 0, 1, 1, 1}});
  EXPECT_TRUE(same_lattice(v, published));
}

TEST(KernelBasis, ProkaryoticMatchesPublishedBasis) {
  const IntMatrix v = kernel_basis(kProkaryotic);
  EXPECT_EQ(v.cols(), 4u);
  EXPECT_TRUE(multiply(kProkaryotic, v).is_zero());
  const IntMatrix published = IntMatrix::from_columns(
      8, {{1, 1, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 0, 0}, {0, 0, 1, 0, 0, 0, 1, 0}, {0, 0, 0, 1, 0, 0, 0, 1}});
  EXPECT_TRUE(same_lattice(v, published));
}

TEST(KernelBasis, FullColumnRankGivesEmptyBasis) {
  const IntMatrix v = kernel_basis(IntMatrix::identity(3));
  EXPECT_EQ(v.rows(), 3u);
  EXPECT_EQ(v.cols(), 0u);
}

TEST(KernelBasis, RandomMatrices) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t rows = 1 + rng() % 6, cols = 1 + rng() % 8;
    const IntMatrix a = random_matrix(rng, rows, cols);
    const IntMatrix v = kernel_basis(a);
    ASSERT_TRUE(multiply(a, v).is_zero());
    ASSERT_EQ(v.cols(), cols - rank(a));
  }
}

TEST(KernelBasis, RandomMatricesContainSmallKernelVectors) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const IntMatrix a = random_matrix(rng, 2, 4);
    const IntMatrix v = kernel_basis(a);
    std::vector<std::int64_t> x(4);
    for (x[0] = -2; x[0] <= 2; ++x[0])
      for (x[1] = -2; x[1] <= 2; ++x[1])
        for (x[2] = -2; x[2] <= 2; ++x[2])
          for (x[3] = -2; x[3] <= 2; ++x[3]) {
            const auto image = multiply(a, x);
            if (image[0] == 0 && image[1] == 0) ASSERT_TRUE(in_lattice(v, x));
          }
  }
}

TEST(KernelExcludingRow, OregonatorFirstSpecies) {
  const IntMatrix v = kernel_basis_excluding_row(kOregonator, 0);
  const IntMatrix published = IntMatrix::from_columns(5, {{1, -1, 0, 0, 0}, {0, 0, 0, 1, 0}, {0, 1, 1, 0, 1}});
  EXPECT_TRUE(same_lattice(v, published));
  // The third published vector lies in ker(A) and is filtered out.
  const IntMatrix kept = drop_kernel_columns(kOregonator, published);
  EXPECT_EQ(kept, IntMatrix::from_columns(5, {{1, -1, 0, 0, 0}, {0, 0, 0, 1, 0}}));
}

TEST(KernelExcludingRow, ProkaryoticDna) {
  const IntMatrix v = kernel_basis_excluding_row(kProkaryotic, 3);
  const IntMatrix published = IntMatrix::from_columns(8, {{1, 1, 0, 0, 0, 0, 0, 0},
                                                          {0, 0, 0, 0, 1, 1, 0, 0},
                                                          {0, 0, 1, 0, 0, 0, 1, 0},
                                                          {0, 0, 0, 1, 0, 0, 0, 1},
                                                          {0, -1, 0, 2, 1, 0, 0, 0}});
  EXPECT_TRUE(same_lattice(v, published));
}

TEST(KernelExcludingRow, IdentityFreesCoordinate) {
  const IntMatrix v = kernel_basis_excluding_row(IntMatrix::identity(2), 0);
  EXPECT_TRUE(same_lattice(v, IntMatrix{{1}, {0}}));
  const IntMatrix w = kernel_basis_excluding_row(IntMatrix::identity(2), 1);
  EXPECT_TRUE(same_lattice(w, IntMatrix{{0}, {1}}));
}

TEST(BorderMoves, ChangeOnlyTheirSpecies) {
  for (const IntMatrix* a : {&kOregonator, &kProkaryotic}) {
    for (std::size_t j = 0; j < a->rows(); ++j) {
      const IntMatrix moves = border_moves(*a, j);
      const IntMatrix image = multiply(*a, moves);
      for (std::size_t c = 0; c < moves.cols(); ++c) {
        for (std::size_t s = 0; s < a->rows(); ++s)
          if (s != j) EXPECT_EQ(image(s, c), 0);
        EXPECT_NE(image(j, c), 0);
      }
      // Together with ker(A) the moves generate ker(A without row j).
      std::vector<std::vector<std::int64_t>> cols;
      const IntMatrix kernel = kernel_basis(*a);
      for (std::size_t c = 0; c < kernel.cols(); ++c) cols.push_back(kernel.column(c));
      for (std::size_t c = 0; c < moves.cols(); ++c) cols.push_back(moves.column(c));
      EXPECT_TRUE(same_lattice(IntMatrix::from_columns(a->cols(), cols), kernel_basis_excluding_row(*a, j)));
    }
  }
}

TEST(Lattice, SameLatticeDetectsIndexTwoSublattice) {
  EXPECT_FALSE(same_lattice(IntMatrix{{2}, {0}}, IntMatrix{{1}, {0}}));
  EXPECT_TRUE(same_lattice(IntMatrix{{1, 1}, {0, 1}}, IntMatrix{{1, 0}, {0, 1}}));
}

}  // namespace
}  // namespace mjp
