// Permutation actions, orbit decompositions, orbit-indicator bases of
// equivariant linear maps and invariant biases, tensor-power actions, and
// equivariance validation of assembled networks.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "equichar/activations.hpp"
#include "equichar/core.hpp"

namespace equichar {

inline constexpr std::size_t kMaxTensorPoints = 1'000'000;
inline constexpr std::size_t kMaxBasisPairs = 10'000'000;

class GeneratorCountMismatch : public Error {
 public:
  using Error::Error;
};

class CountMismatch : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A group acting on {0..points-1} through permutation generators.
struct PermAction {
  std::size_t points = 0;
  std::vector<Permutation> generators;
  std::string label;

  void validate() const {
    for (std::size_t g = 0; g < generators.size(); ++g)
      if (generators[g].size() != points || !is_bijection(generators[g]))
        throw InvalidArgument("generator " + std::to_string(g) + " of action '" + label +
                              "' is not a bijection on " + std::to_string(points) + " points");
  }
};

/// Transposition (0 1) and the n-cycle; empty for n = 1.
inline std::vector<Permutation> symmetric_generators(std::size_t n) {
  std::vector<Permutation> gens;
  if (n < 2) return gens;
  Permutation swap = identity_permutation(n);
  std::swap(swap[0], swap[1]);
  gens.push_back(swap);
  if (n > 2) {
    Permutation cycle(n);
    for (std::size_t i = 0; i < n; ++i) cycle[i] = (i + 1) % n;
    gens.push_back(cycle);
  }
  return gens;
}

inline std::vector<Permutation> cyclic_generators(std::size_t n) {
  if (n < 2) return {};
  Permutation cycle(n);
  for (std::size_t i = 0; i < n; ++i) cycle[i] = (i + 1) % n;
  return {cycle};
}

inline PermAction natural_action(std::size_t n, std::vector<Permutation> gens,
                                 std::string label = "natural") {
  PermAction a{n, std::move(gens), std::move(label)};
  a.validate();
  return a;
}

struct OrbitDecomposition {
  std::vector<std::vector<std::size_t>> orbits;  // each sorted; blocks ordered by least element
  std::vector<std::size_t> orbitSizes;
  std::vector<std::size_t> orbitOf;  // point -> block index
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[b] = a;  // least element stays the representative
  }

 private:
  std::vector<std::size_t> parent_;
};

inline OrbitDecomposition blocks_from(DisjointSets& sets, std::size_t points) {
  OrbitDecomposition out;
  out.orbitOf.assign(points, 0);
  std::vector<std::size_t> block_of_root(points, SIZE_MAX);
  for (std::size_t i = 0; i < points; ++i) {
    const std::size_t r = sets.find(i);
    if (block_of_root[r] == SIZE_MAX) {
      block_of_root[r] = out.orbits.size();
      out.orbits.emplace_back();
    }
    out.orbitOf[i] = block_of_root[r];
    out.orbits[block_of_root[r]].push_back(i);
  }
  for (const auto& b : out.orbits) out.orbitSizes.push_back(b.size());
  return out;
}

}  // namespace detail

/// Orbits of the action; blocks are ordered by their least element.
inline OrbitDecomposition orbits(const PermAction& a) {
  a.validate();
  detail::DisjointSets sets(a.points);
  for (const Permutation& g : a.generators)
    for (std::size_t i = 0; i < a.points; ++i) sets.unite(i, g[i]);
  return detail::blocks_from(sets, a.points);
}

/// Flat index of a k-tuple: little-endian mixed radix, i_1 + n i_2 + n^2 i_3 ...
inline std::size_t encode_tuple(std::span<const std::size_t> digits, std::size_t n) {
  std::size_t idx = 0;
  for (std::size_t t = digits.size(); t-- > 0;) idx = idx * n + digits[t];
  return idx;
}

inline std::vector<std::size_t> decode_tuple(std::size_t idx, std::size_t n, std::size_t k) {
  std::vector<std::size_t> digits(k);
  for (std::size_t t = 0; t < k; ++t) {
    digits[t] = idx % n;
    idx /= n;
  }
  return digits;
}

/// Simultaneous action on k-tuples of {0..n-1}; throws SizeExceeded when
/// n^k exceeds one million.
inline PermAction tensor_action(std::size_t n, std::size_t k, std::span<const Permutation> gens) {
  if (n == 0 || k == 0) throw InvalidArgument("tensor_action needs n >= 1 and k >= 1");
  std::size_t points = 1;
  for (std::size_t t = 0; t < k; ++t) {
    if (points > kMaxTensorPoints / n)
      throw SizeExceeded("tensor action on " + std::to_string(n) + "^" + std::to_string(k) +
                         " points exceeds the 10^6 limit");
    points *= n;
  }
  PermAction a{points, {}, "tensor(" + std::to_string(n) + "," + std::to_string(k) + ")"};
  for (const Permutation& g : gens) {
    if (g.size() != n || !is_bijection(g)) throw InvalidArgument("generator is not a bijection");
    Permutation lifted(points);
    for (std::size_t idx = 0; idx < points; ++idx) {
      std::vector<std::size_t> digits = decode_tuple(idx, n, k);
      for (std::size_t& d : digits) d = g[d];
      lifted[idx] = encode_tuple(digits, n);
    }
    a.generators.push_back(std::move(lifted));
  }
  return a;
}

inline PermAction tensor_action(std::size_t n, std::size_t k, const std::vector<Permutation>& gens) {
  return tensor_action(n, k, std::span<const Permutation>(gens));
}

/// Orbit-indicator basis of Hom_G(V_in, V_out). Element supports are
/// (row, col) = (out point, in point) lists in row-major order.
struct LayerBasis {
  std::size_t dimIn = 0;
  std::size_t dimOut = 0;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> elements;

  std::size_t size() const { return elements.size(); }

  Matrix dense(std::size_t i) const {
    Matrix m(dimOut, dimIn);
    for (auto [r, c] : elements.at(i)) m(r, c) = 1.0;
    return m;
  }
};

/// Orbits of the pair action (g_out r, g_in c); the i-th generators of the
/// two actions stand for the same group element.
inline LayerBasis equivariant_basis(const PermAction& in, const PermAction& out) {
  in.validate();
  out.validate();
  if (in.generators.size() != out.generators.size())
    throw GeneratorCountMismatch("input action has " + std::to_string(in.generators.size()) +
                                 " generators, output action has " +
                                 std::to_string(out.generators.size()));
  if (in.points != 0 && out.points > kMaxBasisPairs / in.points)
    throw SizeExceeded("pair set of " + std::to_string(out.points) + "x" +
                       std::to_string(in.points) + " exceeds the basis size limit");
  const std::size_t pairs = in.points * out.points;
  detail::DisjointSets sets(pairs);
  for (std::size_t g = 0; g < in.generators.size(); ++g) {
    const Permutation& gi = in.generators[g];
    const Permutation& go = out.generators[g];
    for (std::size_t r = 0; r < out.points; ++r)
      for (std::size_t c = 0; c < in.points; ++c)
        sets.unite(r * in.points + c, go[r] * in.points + gi[c]);
  }
  const OrbitDecomposition blocks = detail::blocks_from(sets, pairs);
  LayerBasis basis{in.points, out.points, {}};
  basis.elements.reserve(blocks.orbits.size());
  for (const auto& orbit : blocks.orbits) {
    auto& el = basis.elements.emplace_back();
    el.reserve(orbit.size());
    for (std::size_t p : orbit) el.emplace_back(p / in.points, p % in.points);
  }
  return basis;
}

/// One indicator vector per orbit; together they span the fixed space V^G.
inline std::vector<std::vector<double>> invariant_basis(const PermAction& a) {
  const OrbitDecomposition dec = orbits(a);
  std::vector<std::vector<double>> out;
  for (const auto& orbit : dec.orbits) {
    std::vector<double> v(a.points, 0.0);
    for (std::size_t i : orbit) v[i] = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

/// True iff every generator fixes every point.
inline bool is_trivial_rep(const PermAction& a) {
  a.validate();
  for (const Permutation& g : a.generators)
    for (std::size_t i = 0; i < a.points; ++i)
      if (g[i] != i) return false;
  return true;
}

/// (g x)[g(i)] = x[i], i.e. the permutation matrix of g applied to x.
inline std::vector<double> permute_vector(std::span<const std::size_t> g,
                                          std::span<const double> x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[g[i]] = x[i];
  return y;
}

/// x -> W x + v with W in the span of a LayerBasis and v invariant.
struct AffineEquivariantLayer {
  std::vector<double> weights;
  std::vector<double> biasWeights;
  Matrix weight;
  std::vector<double> bias;

  std::size_t dimIn() const { return weight.cols(); }
  std::size_t dimOut() const { return weight.rows(); }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y = weight * x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += bias[i];
    return y;
  }
};

/// W = sum_i weights[i] B_i, v = sum_j biasWeights[j] u_j.
inline AffineEquivariantLayer build_affine_layer(const LayerBasis& basis,
                                                 std::span<const double> weights,
                                                 std::span<const std::vector<double>> biasBasis,
                                                 std::span<const double> biasWeights) {
  if (weights.size() != basis.size())
    throw CountMismatch(std::to_string(weights.size()) + " weights for " +
                        std::to_string(basis.size()) + " basis elements");
  if (biasWeights.size() != biasBasis.size())
    throw CountMismatch(std::to_string(biasWeights.size()) + " bias weights for " +
                        std::to_string(biasBasis.size()) + " bias vectors");
  AffineEquivariantLayer layer;
  layer.weights.assign(weights.begin(), weights.end());
  layer.biasWeights.assign(biasWeights.begin(), biasWeights.end());
  layer.weight = Matrix(basis.dimOut, basis.dimIn);
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (auto [r, c] : basis.elements[i]) layer.weight(r, c) += weights[i];
  layer.bias.assign(basis.dimOut, 0.0);
  for (std::size_t j = 0; j < biasBasis.size(); ++j) {
    if (biasBasis[j].size() != basis.dimOut)
      throw CountMismatch("bias vector " + std::to_string(j) + " has length " +
                          std::to_string(biasBasis[j].size()) + ", expected " +
                          std::to_string(basis.dimOut));
    for (std::size_t i = 0; i < basis.dimOut; ++i) layer.bias[i] += biasWeights[j] * biasBasis[j][i];
  }
  return layer;
}

inline AffineEquivariantLayer build_affine_layer(const LayerBasis& basis,
                                                 const std::vector<double>& weights,
                                                 const std::vector<std::vector<double>>& biasBasis,
                                                 const std::vector<double>& biasWeights) {
  return build_affine_layer(basis, std::span<const double>(weights),
                            std::span<const std::vector<double>>(biasBasis),
                            std::span<const double>(biasWeights));
}

struct NetworkFailure {
  std::size_t stage = 0;  // 1-based: layer `stage` followed by its activation, if any
  std::size_t generator = 0;
  std::size_t trial = 0;
  double residual = 0.0;
  std::vector<double> x;
};

struct NetworkReport {
  bool pass = true;
  std::size_t trials = 0;
  double worstResidual = 0.0;
  std::optional<NetworkFailure> failure;
};

/// Checks Phi(g x) = g Phi(x) after every stage of
/// layer_m o act o ... o act o layer_1, where actions[s] acts on the input of
/// layer s+1 (actions.size() == layers.size() + 1). Reports the first
/// violating stage of the first failing (trial, generator).
inline NetworkReport validate_network(std::span<const AffineEquivariantLayer> layers,
                                      std::span<const ActivationFn> acts,
                                      std::span<const PermAction> actions, std::size_t trials,
                                      double tol = kDefaultTol, std::uint64_t seed = 0) {
  if (layers.empty()) throw ShapeMismatch("network needs at least one layer");
  if (acts.size() + 1 != layers.size())
    throw ShapeMismatch("need exactly one activation between consecutive layers");
  if (actions.size() != layers.size() + 1)
    throw ShapeMismatch("need one action per representation space (layers + 1)");
  if (trials == 0) throw InvalidArgument("validation needs at least one trial");
  const std::size_t gens = actions.front().generators.size();
  for (std::size_t s = 0; s < actions.size(); ++s) {
    actions[s].validate();
    if (actions[s].generators.size() != gens)
      throw ShapeMismatch("actions disagree on the number of generators");
  }
  for (std::size_t s = 0; s < layers.size(); ++s)
    if (layers[s].dimIn() != actions[s].points || layers[s].dimOut() != actions[s + 1].points ||
        layers[s].bias.size() != layers[s].dimOut())
      throw ShapeMismatch("layer " + std::to_string(s + 1) + " does not match its actions");

  NetworkReport rep;
  rep.trials = trials;
  TrialRng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::vector<double> x0 = rng.vector(actions.front().points);
    for (std::size_t g = 0; g < gens; ++g) {
      std::vector<double> x = x0;
      std::vector<double> gx = permute_vector(actions.front().generators[g], x0);
      for (std::size_t s = 0; s < layers.size(); ++s) {
        x = layers[s].apply(x);
        gx = layers[s].apply(gx);
        if (s < acts.size()) {
          x = acts[s].apply(x);
          gx = acts[s].apply(gx);
        }
        const double r = max_abs_diff(gx, permute_vector(actions[s + 1].generators[g], x));
        rep.worstResidual = std::max(rep.worstResidual, r);
        if (!(r <= tol)) {
          if (!rep.failure) {
            rep.pass = false;
            rep.failure = NetworkFailure{s + 1, g, t, r, x0};
          }
          break;
        }
      }
    }
  }
  return rep;
}

inline NetworkReport validate_network(const std::vector<AffineEquivariantLayer>& layers,
                                      const std::vector<ActivationFn>& acts,
                                      const std::vector<PermAction>& actions, std::size_t trials,
                                      double tol = kDefaultTol, std::uint64_t seed = 0) {
  return validate_network(std::span<const AffineEquivariantLayer>(layers),
                          std::span<const ActivationFn>(acts),
                          std::span<const PermAction>(actions), trials, tol, seed);
}

}  // namespace equichar
