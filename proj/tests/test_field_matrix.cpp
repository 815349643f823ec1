#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "ncslice/field_matrix.hpp"

namespace gf = ncslice::gf256;

namespace {

// Rank by elimination that always picks the LAST usable row as pivot and
// never normalises; arrives at the rank by a different route than rref_rank.
std::size_t oracle_rank(std::vector<std::vector<std::uint8_t>> m) {
  std::size_t rank = 0;
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t piv = m.size();
    for (std::size_t r = m.size(); r-- > rank;)
      if (m[r][c] != 0) {
        piv = r;
        break;
      }
    if (piv == m.size()) continue;
    std::swap(m[piv], m[rank]);
    for (std::size_t r = rank + 1; r < m.size(); ++r) {
      if (m[r][c] == 0) continue;
      const std::uint8_t a = m[rank][c], b = m[r][c];
      for (std::size_t j = 0; j < cols; ++j) m[r][j] = gf::add(gf::mul(a, m[r][j]), gf::mul(b, m[rank][j]));
    }
    ++rank;
  }
  return rank;
}

gf::FieldMatrix random_matrix(std::mt19937& rng, std::size_t r, std::size_t c, int zero_bias) {
  std::uniform_int_distribution<int> d(0, 255), z(0, 9);
  gf::FieldMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = z(rng) < zero_bias ? 0 : static_cast<std::uint8_t>(d(rng));
  return m;
}

std::vector<std::vector<std::uint8_t>> rows_of(const gf::FieldMatrix& m) {
  std::vector<std::vector<std::uint8_t>> out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
  return out;
}

}  // namespace

TEST(FieldMatrix, RankAgreesWithOracle) {
  std::mt19937 rng(7);
  for (int t = 0; t < 500; ++t) {
    const std::size_t r = 1 + rng() % 9, c = 1 + rng() % 9;
    const auto m = random_matrix(rng, r, c, static_cast<int>(rng() % 10));
    ASSERT_EQ(gf::rref_rank(m).rank, oracle_rank(rows_of(m)));
  }
}

TEST(FieldMatrix, ReducedFormShape) {
  std::mt19937 rng(8);
  for (int t = 0; t < 200; ++t) {
    const auto m = random_matrix(rng, 6, 8, 6);
    const auto res = gf::rref_rank(m);
    ASSERT_EQ(res.pivot_cols.size(), res.rank);
    for (std::size_t i = 0; i < res.rank; ++i) {
      const std::size_t pc = res.pivot_cols[i];
      if (i > 0) {
        ASSERT_GT(pc, res.pivot_cols[i - 1]);
      }
      for (std::size_t r = 0; r < m.rows(); ++r) ASSERT_EQ(res.reduced(r, pc), r == i ? 1 : 0);
      for (std::size_t c = 0; c < pc; ++c) ASSERT_EQ(res.reduced(i, c), 0);
    }
    for (std::size_t r = res.rank; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) ASSERT_EQ(res.reduced(r, c), 0);
    // Same row space: stacking original and reduced rows does not raise the rank.
    auto both = rows_of(m);
    for (const auto& row : rows_of(res.reduced)) both.push_back(row);
    ASSERT_EQ(oracle_rank(both), res.rank);
  }
}

TEST(FieldMatrix, IdentityAndEdgeCases) {
  EXPECT_EQ(gf::rref_rank(gf::FieldMatrix::identity(5)).rank, 5U);
  EXPECT_EQ(gf::rref_rank(gf::FieldMatrix(3, 4)).rank, 0U);
  EXPECT_EQ(gf::rref_rank(gf::FieldMatrix(0, 4)).rank, 0U);
  gf::FieldMatrix dup(2, 3, {1, 2, 3, 2, 4, 6});  // second row = 2 * first
  EXPECT_EQ(gf::rref_rank(dup).rank, 1U);
}

TEST(FieldMatrix, Deterministic) {
  std::mt19937 rng(9);
  const auto m = random_matrix(rng, 7, 7, 3);
  EXPECT_EQ(gf::rref_rank(m).reduced, gf::rref_rank(m).reduced);
}

TEST(FieldMatrix, RowOps) {
  gf::FieldMatrix m(0, 3);
  const std::vector<std::uint8_t> a{1, 2, 3}, b{4, 5, 6};
  m.append_row(a);
  m.append_row(b);
  m.swap_rows(0, 1);
  EXPECT_EQ(m.rows(), 2U);
  EXPECT_EQ(m(0, 0), 4);
  EXPECT_EQ(m(1, 2), 3);
}
