#include <gtest/gtest.h>

#include <random>

#include "equichar/core.hpp"
#include "oracles.hpp"
#include "example_matrices.hpp"

using namespace equichar;
using namespace fixtures;

TEST(MonomialDecompose, CyclicPermutation) {
  auto form = monomial_decompose(P());
  ASSERT_TRUE(form);
  EXPECT_EQ(form->perm, (Permutation{1, 2, 0}));
  EXPECT_EQ(form->coeffs, (std::vector<double>{1, 1, 1}));
}

TEST(MonomialDecompose, Identity) {
  auto form = monomial_decompose(Matrix::identity(3));
  ASSERT_TRUE(form);
  EXPECT_EQ(form->perm, identity_permutation(3));
  EXPECT_EQ(form->coeffs, (std::vector<double>{1, 1, 1}));
}

TEST(MonomialDecompose, ShearIsNotMonomial) {
  EXPECT_FALSE(monomial_decompose(Matrix{{1, 1}, {0, 1}}));
}

TEST(MonomialDecompose, TwoMonomial) {
  auto form = monomial_decompose(M());
  ASSERT_TRUE(form);
  // e1 -> 2 e3, e2 -> -1/2 e1, e3 -> 2 e2
  EXPECT_EQ(form->perm, (Permutation{2, 0, 1}));
  EXPECT_EQ(form->coeffs, (std::vector<double>{2, -0.5, 2}));
}

TEST(MonomialDecompose, EntriesBelowTolCountAsZero) {
  Matrix m{{1e-12, 3}, {2, -1e-11}};
  auto form = monomial_decompose(m);
  ASSERT_TRUE(form);
  EXPECT_EQ(form->perm, (Permutation{1, 0}));
  EXPECT_FALSE(monomial_decompose(Matrix{{1, 0}, {1, 0}}));  // shared row, empty column
  EXPECT_FALSE(monomial_decompose(Matrix{{0, 0}, {0, 1}}));
}

TEST(MonomialDecompose, ReconstructsRandomMonomials) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 7;
    Permutation p = identity_permutation(n);
    std::shuffle(p.begin(), p.end(), rng);
    std::vector<double> coeffs(n);
    std::uniform_real_distribution<double> mag(0.1, 5.0);
    for (double& c : coeffs) c = (rng() & 1 ? -1.0 : 1.0) * mag(rng);
    const Matrix m = MonomialForm{p, coeffs}.dense();
    auto form = monomial_decompose(m);
    ASSERT_TRUE(form);
    EXPECT_EQ(form->perm, p);
    EXPECT_LE(max_abs_diff(form->dense(), m), kDefaultTol);
  }
}

TEST(MatrixAlgebra, CubeOfMIsMinusTwoIdentity) {
  Matrix m3 = M() * M() * M();
  Matrix expected = Matrix::identity(3);
  for (std::size_t i = 0; i < 3; ++i) expected(i, i) = -2.0;
  EXPECT_LE(max_abs_diff(m3, expected), 1e-15);
}

TEST(MatrixAlgebra, InverseAndDeterminant) {
  Matrix a{{4, 7}, {2, 6}};
  EXPECT_NEAR(determinant(a), 10.0, 1e-12);
  EXPECT_LE(max_abs_diff(a * inverse(a), Matrix::identity(2)), 1e-12);
  EXPECT_THROW(inverse(Matrix{{1, 2}, {2, 4}}), InvalidArgument);
  EXPECT_FALSE(is_invertible(Matrix{{1, 2}, {2, 4}}));
}

TEST(CloseGroup, SwapHasTwoElements) {
  auto res = close_group(spec("swap", {Swap()}));
  EXPECT_TRUE(res.complete);
  EXPECT_EQ(res.elements.size(), 2u);
}

TEST(CloseGroup, S3FromTranspositionAndThreeCycle) {
  Matrix t = Matrix::permutation(Permutation{1, 0, 2});
  Matrix c = Matrix::permutation(Permutation{1, 2, 0});
  auto res = close_group(spec("S3", {t, c}));
  EXPECT_TRUE(res.complete);
  ASSERT_EQ(res.elements.size(), 6u);
  // The six permutation matrices, enumerated by hand.
  std::vector<Permutation> all = {{0, 1, 2}, {1, 0, 2}, {2, 1, 0}, {0, 2, 1}, {1, 2, 0}, {2, 0, 1}};
  for (const Permutation& p : all) {
    const Matrix target = Matrix::permutation(p);
    EXPECT_TRUE(std::any_of(res.elements.begin(), res.elements.end(),
                            [&](const Matrix& e) { return approx_equal(e, target); }));
  }
  EXPECT_LE(max_abs_diff(res.elements.front(), Matrix::identity(3)), 0.0);
}

TEST(CloseGroup, CapStopsUnitDeterminantGrowth) {
  // diag(2, 1/2) has det 1 but generates an infinite group.
  auto res = close_group(spec("hyperbolic", {Matrix::diagonal({2.0, 0.5})}), 100);
  EXPECT_FALSE(res.complete);
  EXPECT_EQ(res.elements.size(), 100u);
}

TEST(CloseGroup, NonUnitDeterminantStopsEarly) {
  // M has |det| = 2; M * I is already outside any finite group.
  auto res = close_group(spec("M", {M()}), 100);
  EXPECT_FALSE(res.complete);
  EXPECT_EQ(res.elements.size(), 1u);

  // Shrinking entries must not collapse onto each other and fake a finite
  // closure: these two generate diag(-1/2, 2)-type elements.
  auto shrink = close_group(spec("shrink", {Matrix{{0, -0.5}, {1, 0}}, Matrix{{0, 0.5}, {1, 0}}}), 2000);
  EXPECT_FALSE(shrink.complete);
  auto grow = close_group(spec("grow", {Matrix::diagonal({2.0, 1.0})}), 2000);
  EXPECT_FALSE(grow.complete);
}

TEST(CloseGroup, DeterministicOrder) {
  GroupSpec s = spec("S3", {Matrix::permutation(Permutation{1, 0, 2}),
                            Matrix::permutation(Permutation{1, 2, 0})});
  auto a = close_group(s);
  auto b = close_group(s);
  ASSERT_EQ(a.elements.size(), b.elements.size());
  for (std::size_t i = 0; i < a.elements.size(); ++i) EXPECT_EQ(a.elements[i], b.elements[i]);
}

TEST(CloseGroup, IdempotentClosedAndMonomial) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 3;
    GroupSpec s{"rand", n, {}};
    for (int g = 0; g < 2; ++g) {
      Permutation p = identity_permutation(n);
      std::shuffle(p.begin(), p.end(), rng);
      std::vector<double> signs(n);
      for (double& v : signs) v = rng() & 1 ? -1.0 : 1.0;
      s.generators.push_back(MonomialForm{p, signs}.dense());
    }
    auto first = close_group(s);
    ASSERT_TRUE(first.complete);
    for (const Matrix& e : first.elements) EXPECT_TRUE(is_monomial(e));
    // Closed under product and inverse.
    for (const Matrix& a : first.elements) {
      const Matrix inv = inverse(a);
      EXPECT_TRUE(std::any_of(first.elements.begin(), first.elements.end(),
                              [&](const Matrix& e) { return approx_equal(e, inv); }));
      for (const Matrix& g : s.generators) {
        const Matrix prod = a * g;
        EXPECT_TRUE(std::any_of(first.elements.begin(), first.elements.end(),
                                [&](const Matrix& e) { return approx_equal(e, prod); }));
      }
    }
    GroupSpec again{"closure", n, first.elements};
    auto second = close_group(again);
    ASSERT_TRUE(second.complete);
    EXPECT_EQ(second.elements.size(), first.elements.size());
  }
}

TEST(UnitRow, Examples) {
  EXPECT_TRUE(is_unit_row(P()));
  EXPECT_TRUE(is_unit_row(Matrix::permutation(Permutation{3, 1, 0, 2})));
  EXPECT_FALSE(is_unit_row(rot60()));
  EXPECT_TRUE(is_unit_row(Matrix{{0.5, 0.5}, {0.25, 0.75}}));
}

TEST(UnitRow, ClosedUnderProducts) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 4;
    auto random_unit_row = [&] {
      Matrix m(n, n);
      for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c + 1 < n; ++c) s += (m(r, c) = u(rng));
        m(r, n - 1) = 1.0 - s;
      }
      return m;
    };
    const Matrix a = random_unit_row(), b = random_unit_row();
    ASSERT_TRUE(is_unit_row(a, 1e-12));
    EXPECT_TRUE(is_unit_row(a * b, 1e-9));
  }
}

TEST(GroupSpecValidation, RejectsBadGenerators) {
  GroupSpec bad{"bad", 2, {Matrix{{1, 2}, {2, 4}}}};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  GroupSpec wrong{"wrong", 3, {Swap()}};
  EXPECT_THROW(wrong.validate(), InvalidArgument);
}
