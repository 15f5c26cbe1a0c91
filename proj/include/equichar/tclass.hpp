// Multiplicative group of row subset sums, its classification among the
// subgroups of the nonzero reals, and the two-way map between matrix-group
// classes and maximal admissible activation families.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "equichar/core.hpp"

namespace equichar {

inline constexpr std::size_t kMaxSubsetDimension = 20;
inline constexpr int kDefaultGcdIterations = 64;

/// Nonzero generators of the multiplicative group T(M), sorted ascending.
struct TGenerators {
  std::vector<double> values;
};

enum class SubgroupKind { Trivial, PlusMinusOne, PowersOfB, SignedPowersOfB, DensePositive, Dense };

struct SubgroupClassT {
  SubgroupKind kind = SubgroupKind::Trivial;
  std::optional<double> b;  // set for PowersOfB / SignedPowersOfB

  bool dense() const { return kind == SubgroupKind::DensePositive || kind == SubgroupKind::Dense; }
};

enum class FamilyKind {
  Continuous,
  OddContinuous,
  Semilinear,
  BMultiplicative,
  PMBMultiplicative,
  AffineOnly,
  LinearOnly
};

inline constexpr FamilyKind kAllFamilyKinds[] = {
    FamilyKind::Continuous,      FamilyKind::OddContinuous,     FamilyKind::Semilinear,
    FamilyKind::BMultiplicative, FamilyKind::PMBMultiplicative, FamilyKind::AffineOnly,
    FamilyKind::LinearOnly};

struct ActivationFamilyLabel {
  FamilyKind kind = FamilyKind::Continuous;
  std::optional<double> b;  // set iff kind is (P)MBMultiplicative

  static ActivationFamilyLabel of(FamilyKind k) { return {k, std::nullopt}; }
  static ActivationFamilyLabel b_multiplicative(double b) { return {FamilyKind::BMultiplicative, b}; }
  static ActivationFamilyLabel pm_b_multiplicative(double b) {
    return {FamilyKind::PMBMultiplicative, b};
  }

  bool multiplicative() const {
    return kind == FamilyKind::BMultiplicative || kind == FamilyKind::PMBMultiplicative;
  }
};

/// Where the generators of T(M) were read from.
enum class TSource {
  MonomialEntries,       // nonzero entries of monomial generators
  FiniteClosure,         // row subset sums over an enumerated finite group
  GeneratorSubsetSums,   // row subset sums over generators only (closure incomplete)
};

struct GroupClassification {
  std::size_t dimension = 0;
  bool monomial = false;
  bool nonNegative = false;
  bool unitRow = false;
  SubgroupClassT tclass;
  TSource source = TSource::MonomialEntries;
  TGenerators tGenerators;  // empty for labels built by maximal_group_label
};

inline std::string_view to_string(SubgroupKind k) {
  switch (k) {
    case SubgroupKind::Trivial: return "Trivial";
    case SubgroupKind::PlusMinusOne: return "PlusMinusOne";
    case SubgroupKind::PowersOfB: return "PowersOfB";
    case SubgroupKind::SignedPowersOfB: return "SignedPowersOfB";
    case SubgroupKind::DensePositive: return "DensePositive";
    case SubgroupKind::Dense: return "Dense";
  }
  return "?";
}

inline std::string_view to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::Continuous: return "Continuous";
    case FamilyKind::OddContinuous: return "OddContinuous";
    case FamilyKind::Semilinear: return "Semilinear";
    case FamilyKind::BMultiplicative: return "BMultiplicative";
    case FamilyKind::PMBMultiplicative: return "PMBMultiplicative";
    case FamilyKind::AffineOnly: return "AffineOnly";
    case FamilyKind::LinearOnly: return "LinearOnly";
  }
  return "?";
}

inline std::string_view to_string(TSource s) {
  switch (s) {
    case TSource::MonomialEntries: return "monomial-entries";
    case TSource::FiniteClosure: return "finite-closure";
    case TSource::GeneratorSubsetSums: return "generator-subset-sums";
  }
  return "?";
}

namespace detail {

inline void sort_unique_tol(std::vector<double>& v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || std::abs(x - out.back()) > tol) out.push_back(x);
  v = std::move(out);
}

}  // namespace detail

/// Nonzero values of sum_{j in S} M_ij over every matrix, row and column
/// subset. Monomial matrices contribute their nonzero entries directly; other
/// matrices are enumerated exhaustively and must have n <= 20.
inline TGenerators subset_sum_generators(std::span<const Matrix> mats, double tol = kDefaultTol) {
  if (mats.empty()) throw InvalidArgument("subset_sum_generators needs at least one matrix");
  const std::size_t n = mats.front().rows();
  TGenerators out;
  for (const Matrix& m : mats) {
    if (!m.square() || m.rows() != n) throw InvalidArgument("matrices must share one dimension");
    if (auto form = monomial_decompose(m, tol)) {
      out.values.insert(out.values.end(), form->coeffs.begin(), form->coeffs.end());
      continue;
    }
    if (n > kMaxSubsetDimension)
      throw DimensionTooLarge("subset sums of a non-monomial " + std::to_string(n) + "x" +
                              std::to_string(n) + " matrix exceed the n <= 20 limit");
    for (std::size_t r = 0; r < n; ++r) {
      // Zero entries never change a sum, so only subsets of the nonzeros matter.
      std::vector<double> nz;
      for (double v : m.row(r))
        if (std::abs(v) > tol) nz.push_back(v);
      const std::size_t count = std::size_t{1} << nz.size();
      for (std::size_t mask = 1; mask < count; ++mask) {
        double s = 0.0;
        for (std::size_t j = 0; j < nz.size(); ++j)
          if (mask & (std::size_t{1} << j)) s += nz[j];
        if (std::abs(s) > tol) out.values.push_back(s);
      }
    }
  }
  detail::sort_unique_tol(out.values, tol);
  return out;
}

inline TGenerators subset_sum_generators(const std::vector<Matrix>& mats, double tol = kDefaultTol) {
  return subset_sum_generators(std::span<const Matrix>(mats), tol);
}

/// Classifies <gens> among the subgroups of R*. Discreteness is decided by a
/// tolerance-based real GCD of the log-magnitudes; the GCD counts as
/// collapsed below max(tol, sqrt(tol) * max|log|v||) or after maxIter
/// Euclidean steps, which reads as dense.
inline SubgroupClassT classify_subgroup(const TGenerators& gens, double tol = kDefaultTol,
                                        int maxIter = kDefaultGcdIterations) {
  if (gens.values.empty()) throw InvalidArgument("classify_subgroup needs generators");
  bool negative = false;
  std::vector<double> logs;
  for (double v : gens.values) {
    if (std::abs(v) <= tol) throw InvalidArgument("zero is not a multiplicative generator");
    if (v < 0) negative = true;
    if (std::abs(std::abs(v) - 1.0) > tol) logs.push_back(std::abs(std::log(std::abs(v))));
  }
  if (logs.empty())
    return {negative ? SubgroupKind::PlusMinusOne : SubgroupKind::Trivial, std::nullopt};

  const SubgroupClassT dense{negative ? SubgroupKind::Dense : SubgroupKind::DensePositive,
                             std::nullopt};
  const double largest = *std::max_element(logs.begin(), logs.end());
  const double collapse = std::max(tol, std::sqrt(tol) * largest);

  double g = logs.front();
  int steps = 0;
  for (std::size_t i = 1; i < logs.size(); ++i) {
    double a = std::max(g, logs[i]);
    double b = std::min(g, logs[i]);
    while (b > collapse) {
      double r = std::fmod(a, b);
      if (b - r <= collapse) r = 0.0;
      a = b;
      b = r;
      if (++steps > maxIter) return dense;
    }
    g = a;
  }
  if (g <= collapse) return dense;
  for (double l : logs) {
    const double k = std::round(l / g);
    if (std::abs(l - k * g) > tol * std::max(1.0, l)) return dense;
  }
  return {negative ? SubgroupKind::SignedPowersOfB : SubgroupKind::PowersOfB, std::exp(g)};
}

/// Structural classification of the group generated by `spec`.
inline GroupClassification classify_group(const GroupSpec& spec, double tol = kDefaultTol) {
  spec.validate(tol);
  GroupClassification c;
  c.dimension = spec.dimension;
  c.monomial = true;
  c.nonNegative = true;
  c.unitRow = true;
  for (const Matrix& g : spec.generators) {
    const auto form = monomial_decompose(g, tol);
    if (!form) {
      c.monomial = false;
    } else {
      for (double a : form->coeffs)
        if (a < 0) c.nonNegative = false;
    }
    if (!is_unit_row(g, tol)) c.unitRow = false;
  }
  if (!c.monomial) c.nonNegative = false;

  if (spec.generators.empty()) {
    c.tclass = {SubgroupKind::Trivial, std::nullopt};
    c.tGenerators.values = {1.0};
    return c;
  }
  if (c.monomial) {
    c.source = TSource::MonomialEntries;
    c.tGenerators = subset_sum_generators(spec.generators, tol);
    c.tclass = classify_subgroup(c.tGenerators, tol);
    return c;
  }
  // Non-monomial: sums over the whole group when it is finite and small.
  if (spec.dimension > kMaxSubsetDimension)
    throw DimensionTooLarge("subset sums of a non-monomial " + std::to_string(spec.dimension) +
                            "-dimensional group exceed the n <= 20 limit");
  ClosureResult closure = close_group(spec, kDefaultClosureCap, tol);
  c.source = closure.complete ? TSource::FiniteClosure : TSource::GeneratorSubsetSums;
  c.tGenerators = subset_sum_generators(closure.complete ? closure.elements : spec.generators, tol);
  c.tclass = classify_subgroup(c.tGenerators, tol);
  return c;
}

/// Maximal admissible activation family for a classified group.
inline ActivationFamilyLabel maximal_family(const GroupClassification& c) {
  if (c.monomial) {
    switch (c.tclass.kind) {
      case SubgroupKind::Trivial: return ActivationFamilyLabel::of(FamilyKind::Continuous);
      case SubgroupKind::PlusMinusOne: return ActivationFamilyLabel::of(FamilyKind::OddContinuous);
      case SubgroupKind::DensePositive:
        if (c.nonNegative) return ActivationFamilyLabel::of(FamilyKind::Semilinear);
        break;
      case SubgroupKind::PowersOfB: return ActivationFamilyLabel::b_multiplicative(*c.tclass.b);
      case SubgroupKind::SignedPowersOfB:
        return ActivationFamilyLabel::pm_b_multiplicative(*c.tclass.b);
      case SubgroupKind::Dense: break;
    }
  }
  return ActivationFamilyLabel::of(c.unitRow ? FamilyKind::AffineOnly : FamilyKind::LinearOnly);
}

/// The maximal matrix-group class admitted by a family, in dimension n.
inline GroupClassification maximal_group_label(const ActivationFamilyLabel& f, std::size_t n) {
  GroupClassification c;
  c.dimension = n;
  c.source = TSource::MonomialEntries;
  switch (f.kind) {
    case FamilyKind::Continuous:
      c.monomial = c.nonNegative = c.unitRow = true;
      c.tclass = {SubgroupKind::Trivial, std::nullopt};
      break;
    case FamilyKind::OddContinuous:
      c.monomial = true;
      c.tclass = {SubgroupKind::PlusMinusOne, std::nullopt};
      break;
    case FamilyKind::Semilinear:
      c.monomial = c.nonNegative = true;
      c.tclass = {SubgroupKind::DensePositive, std::nullopt};
      break;
    case FamilyKind::BMultiplicative:
      c.monomial = c.nonNegative = true;
      c.tclass = {SubgroupKind::PowersOfB, f.b};
      break;
    case FamilyKind::PMBMultiplicative:
      c.monomial = true;
      c.tclass = {SubgroupKind::SignedPowersOfB, f.b};
      break;
    case FamilyKind::AffineOnly:
      c.unitRow = true;
      c.tclass = {SubgroupKind::Dense, std::nullopt};
      break;
    case FamilyKind::LinearOnly:
      c.tclass = {SubgroupKind::Dense, std::nullopt};
      break;
  }
  return c;
}

namespace detail {

// True iff c = b^k for a positive integer k.
inline bool is_positive_power(double c, double b, double tol) {
  const double ratio = std::log(c) / std::log(b);
  const double k = std::round(ratio);
  return k >= 1.0 && std::abs(ratio - k) <= tol * std::max(1.0, ratio);
}

}  // namespace detail

/// True iff `outer` contains `inner` as a set of functions. The
/// b^k-multiplicative families contain the b-multiplicative ones.
inline bool family_includes(const ActivationFamilyLabel& outer, const ActivationFamilyLabel& inner,
                            double tol = kDefaultTol) {
  using K = FamilyKind;
  if (inner.kind == K::LinearOnly || outer.kind == K::Continuous) return true;
  switch (outer.kind) {
    case K::OddContinuous:
      return inner.kind == K::OddContinuous || inner.kind == K::PMBMultiplicative;
    case K::Semilinear: return inner.kind == K::Semilinear;
    case K::BMultiplicative:
      if (inner.kind == K::Semilinear) return true;
      if (inner.multiplicative()) return detail::is_positive_power(*outer.b, *inner.b, tol);
      return false;
    case K::PMBMultiplicative:
      return inner.kind == K::PMBMultiplicative &&
             detail::is_positive_power(*outer.b, *inner.b, tol);
    case K::AffineOnly: return inner.kind == K::AffineOnly;
    default: return false;
  }
}

}  // namespace equichar
