// Positive diagonal basis change that conjugates a bounded monomial group to
// (signed) permutation matrices, decided exactly from generators by
// cycle consistency of log-magnitudes.
#pragma once

#include <cmath>
#include <optional>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "equichar/core.hpp"
#include "equichar/format.hpp"

namespace equichar {

struct ScalingResult {
  std::vector<double> d;  // diagonal of B; the least index of each component has d = 1
  std::vector<Matrix> normalizedGenerators;  // B g B^-1
};

/// No positive scaling exists: the cycle `cycle` (0-based indices, closed,
/// first == last) has coefficient magnitude product exp(logWeight) != 1.
struct UnboundedGroup {
  std::size_t generator = 0;
  std::vector<std::size_t> cycle;
  double logWeight = 0.0;

  std::string describe() const {
    if (cycle.size() == 2 && cycle[0] == cycle[1])
      return "self-loop at index " + std::to_string(cycle[0] + 1) + ", log-weight " +
             format_g17(logWeight);
    std::string s = "cycle ";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      if (i) s += " -> ";
      s += std::to_string(cycle[i] + 1);
    }
    return s + ", log-weight " + format_g17(logWeight);
  }
};

using ScalingOutcome = std::variant<ScalingResult, UnboundedGroup>;

namespace detail {

struct ScalingEdge {
  std::size_t from, to, generator;
  double logMag;  // log|a|; the scaling must satisfy logd[to] - logd[from] = -logMag
};

struct TreeLink {
  std::size_t parent = 0;
  bool root = true;
};

inline std::vector<std::size_t> tree_path_to_root(const std::vector<TreeLink>& tree,
                                                  std::size_t v) {
  std::vector<std::size_t> path{v};
  while (!tree[v].root) {
    v = tree[v].parent;
    path.push_back(v);
  }
  return path;
}

// Closed cycle u -> v -> (tree path) -> u for a non-tree edge u -> v.
inline std::vector<std::size_t> closing_cycle(const std::vector<TreeLink>& tree, std::size_t u,
                                              std::size_t v) {
  if (u == v) return {u, u};
  std::vector<std::size_t> pv = tree_path_to_root(tree, v);
  std::vector<std::size_t> pu = tree_path_to_root(tree, u);
  // Trim the common ancestor suffix, keeping the lowest common ancestor once.
  while (pv.size() > 1 && pu.size() > 1 && pv[pv.size() - 2] == pu[pu.size() - 2]) {
    pv.pop_back();
    pu.pop_back();
  }
  std::vector<std::size_t> cycle{u};
  cycle.insert(cycle.end(), pv.begin(), pv.end());
  for (std::size_t i = pu.size() - 1; i-- > 0;) cycle.push_back(pu[i]);
  return cycle;
}

}  // namespace detail

/// Solves logd[pi(i)] - logd[i] = -log|a_{g,i}| over a BFS spanning forest
/// (root = least index of each component, logd = 0) and checks every other
/// edge. Throws NotMonomialError if a generator is not monomial.
inline ScalingOutcome positive_scaling(const GroupSpec& spec, double tol = kDefaultTol) {
  spec.validate(tol);
  const std::size_t n = spec.dimension;
  std::vector<detail::ScalingEdge> edges;
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t g = 0; g < spec.generators.size(); ++g) {
    const auto form = monomial_decompose(spec.generators[g], tol);
    if (!form) throw NotMonomialError("generator " + std::to_string(g) + " is not monomial");
    for (std::size_t i = 0; i < n; ++i) {
      incident[i].push_back(edges.size());
      if (form->perm[i] != i) incident[form->perm[i]].push_back(edges.size());
      edges.push_back({i, form->perm[i], g, std::log(std::abs(form->coeffs[i]))});
    }
  }

  std::vector<double> logd(n, 0.0);
  std::vector<bool> seen(n, false);
  std::vector<detail::TreeLink> tree(n);
  std::vector<bool> in_tree(edges.size(), false);
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    std::queue<std::size_t> q;
    q.push(root);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t e : incident[u]) {
        const auto& ed = edges[e];
        const std::size_t v = ed.from == u ? ed.to : ed.from;
        if (seen[v]) continue;
        seen[v] = true;
        logd[v] = ed.from == u ? logd[u] - ed.logMag : logd[u] + ed.logMag;
        tree[v] = {u, false};
        in_tree[e] = true;
        q.push(v);
      }
    }
  }

  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (in_tree[e]) continue;
    const auto& ed = edges[e];
    const double mismatch = ed.logMag + logd[ed.to] - logd[ed.from];
    if (std::abs(mismatch) > tol * (1.0 + std::abs(ed.logMag)))
      return UnboundedGroup{ed.generator, detail::closing_cycle(tree, ed.from, ed.to),
                            mismatch};
  }

  ScalingResult res;
  res.d.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.d[i] = std::exp(logd[i]);
  for (const Matrix& g : spec.generators) {
    Matrix c(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < n; ++k) c(r, k) = res.d[r] * g(r, k) / res.d[k];
    res.normalizedGenerators.push_back(std::move(c));
  }
  return res;
}

/// Scales |g| entrywise with positive_scaling, then conjugates the signed
/// generators by the same diagonal; signs commute with a positive diagonal.
inline ScalingOutcome signed_normalize(const GroupSpec& spec, double tol = kDefaultTol) {
  GroupSpec magnitudes = spec;
  for (Matrix& g : magnitudes.generators)
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) = std::abs(g(r, c));
  ScalingOutcome out = positive_scaling(magnitudes, tol);
  if (auto* res = std::get_if<ScalingResult>(&out)) {
    const std::size_t n = spec.dimension;
    for (std::size_t k = 0; k < spec.generators.size(); ++k) {
      const Matrix& g = spec.generators[k];
      Matrix& c = res->normalizedGenerators[k];
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < n; ++j) c(r, j) = res->d[r] * g(r, j) / res->d[j];
    }
  }
  return out;
}

}  // namespace equichar
