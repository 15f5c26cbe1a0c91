#include <gtest/gtest.h>

#include <random>

#include "equichar/repspaces.hpp"
#include "oracles.hpp"

using namespace equichar;

namespace {

using Blocks = std::vector<std::vector<std::size_t>>;

PermAction s3_natural() { return natural_action(3, symmetric_generators(3), "S3"); }

std::vector<Permutation> random_generators(std::mt19937_64& rng, std::size_t n, std::size_t count) {
  std::vector<Permutation> gens;
  for (std::size_t k = 0; k < count; ++k) {
    Permutation p = identity_permutation(n);
    // A random product of a few transpositions keeps some groups small.
    const std::size_t swaps = 1 + rng() % 2;
    for (std::size_t s = 0; s < swaps; ++s) std::swap(p[rng() % n], p[rng() % n]);
    gens.push_back(p);
  }
  return gens;
}

}  // namespace

TEST(Orbits, Examples) {
  auto dec = orbits(s3_natural());
  EXPECT_EQ(dec.orbits, (Blocks{{0, 1, 2}}));
  EXPECT_EQ(dec.orbitSizes, (std::vector<std::size_t>{3}));

  dec = orbits(natural_action(4, {Permutation{1, 0, 2, 3}}));
  EXPECT_EQ(dec.orbits, (Blocks{{0, 1}, {2}, {3}}));

  dec = orbits(tensor_action(3, 2, symmetric_generators(3)));
  ASSERT_EQ(dec.orbits.size(), 2u);
  EXPECT_EQ(dec.orbits[0], (std::vector<std::size_t>{0, 4, 8}));  // diagonal (i, i)
  EXPECT_EQ(dec.orbitSizes[1], 6u);
}

TEST(Orbits, BlocksArePartitionClosedUnderGenerators) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    const PermAction a = natural_action(n, random_generators(rng, n, rng() % 3));
    const auto dec = orbits(a);
    std::vector<int> hits(n, 0);
    for (std::size_t b = 0; b < dec.orbits.size(); ++b) {
      EXPECT_EQ(dec.orbits[b].size(), dec.orbitSizes[b]);
      if (b) {
        EXPECT_LT(dec.orbits[b - 1].front(), dec.orbits[b].front());
      }
      for (std::size_t i : dec.orbits[b]) {
        ++hits[i];
        EXPECT_EQ(dec.orbitOf[i], b);
        for (const Permutation& g : a.generators) EXPECT_EQ(dec.orbitOf[g[i]], b);
      }
    }
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(Orbits, BurnsideAndCosetSize) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    const auto gens = random_generators(rng, n, 1 + rng() % 2);
    const auto group = oracle::perm_group(gens, n);
    const auto dec = orbits(natural_action(n, gens));
    EXPECT_EQ(dec.orbits.size(), oracle::burnside_orbits(group));
    for (std::size_t s : dec.orbitSizes) EXPECT_EQ(group.size() % s, 0u);
  }
}

TEST(TensorAction, Encoding) {
  const std::vector<std::size_t> digits{2, 0, 1};
  EXPECT_EQ(encode_tuple(digits, 3), 2u + 0u * 3u + 1u * 9u);
  EXPECT_EQ(decode_tuple(11, 3, 3), digits);
}

TEST(TensorAction, Examples) {
  const auto a = tensor_action(3, 1, symmetric_generators(3));
  EXPECT_EQ(a.points, 3u);
  EXPECT_EQ(a.generators, symmetric_generators(3));

  // (1,1) <-> (2,2) is index 0 <-> 3; (1,2) <-> (2,1) is index 2 <-> 1.
  const auto b = tensor_action(2, 2, {Permutation{1, 0}});
  EXPECT_EQ(b.generators[0], (Permutation{3, 2, 1, 0}));

  const auto c = tensor_action(3, 2, symmetric_generators(3));
  EXPECT_EQ(c.points, 9u);
  EXPECT_EQ(orbits(c).orbits.size(), 2u);
}

TEST(TensorAction, SizeLimit) {
  EXPECT_THROW(tensor_action(10, 7, symmetric_generators(10)), SizeExceeded);
  EXPECT_NO_THROW(tensor_action(10, 6, symmetric_generators(10)));
}

TEST(EquivariantBasis, Examples) {
  const auto nat = s3_natural();
  const auto basis = equivariant_basis(nat, nat);
  ASSERT_EQ(basis.size(), 2u);
  EXPECT_EQ(basis.dense(0), Matrix::identity(3));
  Matrix off(3, 3, 1.0);
  for (std::size_t i = 0; i < 3; ++i) off(i, i) = 0.0;
  EXPECT_EQ(basis.dense(1), off);

  const auto pairs = tensor_action(4, 2, symmetric_generators(4));
  EXPECT_EQ(equivariant_basis(pairs, pairs).size(), 15u);

  const PermAction trivial{2, {}, "trivial"};
  EXPECT_EQ(equivariant_basis(trivial, trivial).size(), 4u);
}

TEST(EquivariantBasis, BellLadder) {
  const std::pair<std::size_t, std::size_t> orders[] = {{1, 1}, {2, 1}, {1, 2}, {2, 2}};
  for (auto [k, h] : orders) {
    const std::size_t n = k + h;
    const auto gens = symmetric_generators(n);
    const auto basis = equivariant_basis(tensor_action(n, k, gens), tensor_action(n, h, gens));
    EXPECT_EQ(basis.size(), oracle::bell(k + h)) << k << "," << h;
  }
  EXPECT_EQ(oracle::bell(2), 2u);
  EXPECT_EQ(oracle::bell(3), 5u);
  EXPECT_EQ(oracle::bell(4), 15u);
}

TEST(EquivariantBasis, MatchesBurnsideOnJointActions) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng() % 3;
    const auto gens = random_generators(rng, n, 1 + rng() % 2);
    const std::size_t k = 1 + rng() % 2, h = 1 + rng() % 2;
    const auto in = tensor_action(n, k, gens);
    const auto out = tensor_action(n, h, gens);
    const auto group = oracle::joint_group(in.generators, in.points, out.generators, out.points);
    EXPECT_EQ(equivariant_basis(in, out).size(), oracle::burnside_pair_orbits(group));
  }
}

TEST(EquivariantBasis, ElementsAreEquivariantAndPartition) {
  const auto gens = symmetric_generators(3);
  const auto in = tensor_action(3, 2, gens);
  const auto out = tensor_action(3, 1, gens);
  const auto basis = equivariant_basis(in, out);
  EXPECT_EQ(basis.size(), 5u);
  Matrix cover(basis.dimOut, basis.dimIn);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Matrix b = basis.dense(i);
    for (std::size_t g = 0; g < gens.size(); ++g) {
      const Matrix pOut = Matrix::permutation(out.generators[g]);
      const Matrix pIn = Matrix::permutation(in.generators[g]);
      EXPECT_EQ(pOut * b * pIn.transpose(), b);
    }
    for (std::size_t r = 0; r < b.rows(); ++r)
      for (std::size_t c = 0; c < b.cols(); ++c) cover(r, c) += b(r, c);
  }
  EXPECT_EQ(cover, Matrix(basis.dimOut, basis.dimIn, 1.0));
}

TEST(EquivariantBasis, GeneratorCountMismatch) {
  const PermAction a{3, symmetric_generators(3), "a"};
  const PermAction b{3, cyclic_generators(3), "b"};
  EXPECT_THROW(equivariant_basis(a, b), GeneratorCountMismatch);
}

TEST(InvariantBasis, Examples) {
  auto v = invariant_basis(s3_natural());
  EXPECT_EQ(v, (std::vector<std::vector<double>>{{1, 1, 1}}));
  v = invariant_basis(natural_action(3, {Permutation{1, 0, 2}}));
  EXPECT_EQ(v, (std::vector<std::vector<double>>{{1, 1, 0}, {0, 0, 1}}));
  EXPECT_EQ(invariant_basis(tensor_action(3, 2, symmetric_generators(3))).size(), 2u);
}

TEST(TrivialRep, Examples) {
  EXPECT_TRUE(is_trivial_rep(PermAction{5, {}, "none"}));
  EXPECT_FALSE(is_trivial_rep(natural_action(2, {Permutation{1, 0}})));
  EXPECT_FALSE(is_trivial_rep(s3_natural()));
  EXPECT_TRUE(is_trivial_rep(natural_action(3, {identity_permutation(3)})));
}

TEST(AffineLayer, Examples) {
  const auto nat = s3_natural();
  const auto basis = equivariant_basis(nat, nat);
  const auto layer = build_affine_layer(basis, {2.0, 0.5}, {}, {});
  EXPECT_EQ(layer.weight, (Matrix{{2, 0.5, 0.5}, {0.5, 2, 0.5}, {0.5, 0.5, 2}}));

  const auto zero = build_affine_layer(basis, {0.0, 0.0}, invariant_basis(nat), {0.0});
  EXPECT_EQ(zero.apply(std::vector<double>{1, 2, 3}), (std::vector<double>{0, 0, 0}));

  const PermAction trivial{2, {}, "trivial"};
  const auto e11 = build_affine_layer(equivariant_basis(trivial, trivial), {1, 0, 0, 0}, {}, {});
  EXPECT_EQ(e11.weight, (Matrix{{1, 0}, {0, 0}}));
}

TEST(AffineLayer, CountMismatch) {
  const auto nat = s3_natural();
  const auto basis = equivariant_basis(nat, nat);
  EXPECT_THROW(build_affine_layer(basis, {1.0}, {}, {}), CountMismatch);
  EXPECT_THROW(build_affine_layer(basis, {1.0, 2.0}, invariant_basis(nat), {}), CountMismatch);
}

TEST(ValidateNetwork, DeepSetsOnS3) {
  const auto nat = s3_natural();
  const auto basis = equivariant_basis(nat, nat);
  const auto bias = invariant_basis(nat);
  const auto l1 = build_affine_layer(basis, {1.5, -0.4}, bias, {0.3});
  const auto l2 = build_affine_layer(basis, {-0.7, 0.2}, bias, {-1.0});
  const std::vector<AffineEquivariantLayer> layers{l1, l2};
  const std::vector<ActivationFn> acts{ActivationFn::relu()};
  const std::vector<PermAction> actions(3, nat);
  EXPECT_TRUE(validate_network(layers, acts, actions, 200, 1e-9).pass);

  auto bad = l1;
  bad.weight(0, 1) += 0.25;
  const auto rep = validate_network(std::vector{bad, l2}, acts, actions, 200, 1e-9);
  ASSERT_FALSE(rep.pass);
  EXPECT_EQ(rep.failure->stage, 1u);
}

TEST(ValidateNetwork, IdentityNetwork) {
  const auto nat = s3_natural();
  const auto id = build_affine_layer(equivariant_basis(nat, nat), {1.0, 0.0}, {}, {});
  const std::vector<AffineEquivariantLayer> layers{id, id};
  EXPECT_TRUE(validate_network(layers, {ActivationFn::identity()}, std::vector<PermAction>(3, nat), 20).pass);
}

TEST(ValidateNetwork, ShapeMismatch) {
  const auto nat = s3_natural();
  const auto l = build_affine_layer(equivariant_basis(nat, nat), {1.0, 0.0}, {}, {});
  EXPECT_THROW(validate_network({l, l}, {}, std::vector<PermAction>(3, nat), 1), ShapeMismatch);
  EXPECT_THROW(validate_network({l}, {}, std::vector<PermAction>(3, nat), 1), ShapeMismatch);
  const auto pairs = tensor_action(3, 2, symmetric_generators(3));
  EXPECT_THROW(validate_network({l}, {}, std::vector<PermAction>{nat, pairs}, 1), ShapeMismatch);
}
