// Scalar activations, the eta-profile construction of b-multiplicative and
// +-b-multiplicative functions, family membership checks and numeric
// point-wise equivariance verification.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "equichar/core.hpp"
#include "equichar/format.hpp"
#include "equichar/tclass.hpp"

namespace equichar {

class EndpointViolation : public Error {
 public:
  using Error::Error;
};

class NonPositiveInput : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline constexpr std::size_t kDefaultEtaSamples = 17;

struct ScaleDecomposition {
  int n = 0;
  double y = 1.0;
};

/// Unique x = b^n * y with y in [1, b). Values of y within tol of 1 (or
/// within tol*b of b) snap to y = 1 so float noise at powers of b never
/// shifts n.
inline ScaleDecomposition decompose_scale(double x, double b, double tol = kDefaultTol) {
  if (!(x > 0.0) || !std::isfinite(x)) throw NonPositiveInput("decompose_scale needs x > 0");
  if (!(b > 1.0)) throw InvalidArgument("decompose_scale needs b > 1");
  int n = static_cast<int>(std::floor(std::log(x) / std::log(b)));
  double y = x / std::pow(b, n);
  while (y < 1.0 && std::abs(y - 1.0) > tol) y = x / std::pow(b, --n);
  while (y >= b && std::abs(y - b) > tol * b) y = x / std::pow(b, ++n);
  if (std::abs(y - 1.0) <= tol) {
    y = 1.0;
  } else if (std::abs(y - b) <= tol * b) {
    ++n;
    y = 1.0;
  }
  return {n, y};
}

/// Piecewise-linear profile eta on [1, b] with eta(b) = b * eta(1).
class EtaProfile {
 public:
  /// Validates and stores samples. The first abscissa must be 1 and the
  /// last b (each within tol); throws EndpointViolation when
  /// |eta(b) - b*eta(1)| > tol.
  static EtaProfile from_samples(double b, std::vector<double> xs, std::vector<double> ys,
                                 double tol = kDefaultTol) {
    if (!(b > 1.0)) throw InvalidArgument("eta profile needs b > 1");
    if (xs.size() != ys.size() || xs.size() < 2)
      throw InvalidArgument("eta profile needs at least two (x, eta) samples");
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (!(xs[i] > xs[i - 1])) throw InvalidArgument("eta abscissae must be strictly increasing");
    if (std::abs(xs.front() - 1.0) > tol || std::abs(xs.back() - b) > tol)
      throw InvalidArgument("eta abscissae must span [1, b]");
    for (double y : ys)
      if (!std::isfinite(y)) throw InvalidArgument("eta values must be finite");
    xs.front() = 1.0;
    xs.back() = b;
    const double gap = std::abs(ys.back() - b * ys.front());
    if (gap > tol)
      throw EndpointViolation("eta(b) - b*eta(1) = " + format_g17(ys.back() - b * ys.front()) +
                              " exceeds tolerance");
    EtaProfile p;
    p.b_ = b;
    p.xs_ = std::move(xs);
    p.ys_ = std::move(ys);
    return p;
  }

  /// Samples `fn` at `count` evenly spaced points of [1, b].
  template <class F>
  static EtaProfile sample(double b, F&& fn, std::size_t count = kDefaultEtaSamples,
                           double tol = kDefaultTol) {
    if (count < 2) throw InvalidArgument("eta profile needs at least two samples");
    std::vector<double> xs(count), ys(count);
    for (std::size_t i = 0; i < count; ++i) {
      xs[i] = i + 1 == count ? b : 1.0 + (b - 1.0) * static_cast<double>(i) / (count - 1);
      ys[i] = fn(xs[i]);
    }
    return from_samples(b, std::move(xs), std::move(ys), tol);
  }

  double b() const { return b_; }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

  /// Linear interpolation; arguments outside [1, b] clamp to the ends.
  double operator()(double y) const {
    if (y <= xs_.front()) return ys_.front();
    if (y >= xs_.back()) return ys_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), y);
    const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
    const std::size_t lo = hi - 1;
    const double t = (y - xs_[lo]) / (xs_[hi] - xs_[lo]);
    return ys_[lo] + t * (ys_[hi] - ys_[lo]);
  }

  double max_abs() const {
    double m = 0.0;
    for (double y : ys_) m = std::max(m, std::abs(y));
    return m;
  }

  double lipschitz() const {
    double l = 0.0;
    for (std::size_t i = 1; i < xs_.size(); ++i)
      l = std::max(l, std::abs(ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1]));
    return l;
  }

 private:
  EtaProfile() = default;
  double b_ = 2.0;
  std::vector<double> xs_;
  std::vector<double> ys_;
};

enum class ActivationKind { Identity, ReLU, Tanh, Custom, EtaMultiplicative };

struct EtaParams {
  double b;
  EtaProfile plus;
  std::optional<EtaProfile> minus;
  bool odd;
};

/// A scalar function f; applied to a vector it acts coordinatewise.
class ActivationFn {
 public:
  static ActivationFn identity() { return ActivationFn(ActivationKind::Identity, "identity"); }
  static ActivationFn relu() { return ActivationFn(ActivationKind::ReLU, "relu"); }
  static ActivationFn tanh() { return ActivationFn(ActivationKind::Tanh, "tanh"); }
  static ActivationFn custom(std::string name, std::function<double(double)> fn) {
    ActivationFn f(ActivationKind::Custom, std::move(name));
    f.custom_ = std::move(fn);
    return f;
  }

  ActivationKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const EtaParams* eta() const { return eta_.get(); }

  double operator()(double x) const {
    switch (kind_) {
      case ActivationKind::Identity: return x;
      case ActivationKind::ReLU: return x > 0.0 ? x : 0.0;
      case ActivationKind::Tanh: return std::tanh(x);
      case ActivationKind::Custom: return custom_(x);
      case ActivationKind::EtaMultiplicative: return eval_eta(x);
    }
    return x;
  }

  std::vector<double> apply(std::span<const double> v) const {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (*this)(v[i]);
    return out;
  }

 private:
  ActivationFn(ActivationKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  static double scaled(const EtaProfile& eta, double b, double x) {
    const ScaleDecomposition d = decompose_scale(x, b);
    return std::pow(b, d.n) * eta(d.y);
  }

  double eval_eta(double x) const {
    const EtaParams& p = *eta_;
    if (x > 0.0) return scaled(p.plus, p.b, x);
    if (x == 0.0) return 0.0;
    if (p.odd) return -scaled(p.plus, p.b, -x);
    return scaled(p.minus ? *p.minus : p.plus, p.b, -x);
  }

  friend ActivationFn build_eta_activation(double, const EtaProfile&,
                                           const std::optional<EtaProfile>&, bool, double);

  ActivationKind kind_;
  std::string name_;
  std::function<double(double)> custom_;
  std::shared_ptr<const EtaParams> eta_;
};

/// f(x) = b^n eta+(x / b^n) for x > 0 and f(0) = 0. For x < 0 the signed
/// variant is the odd extension -f(-x) (a +-b-multiplicative function);
/// otherwise f(x) = b^n eta-(-x / b^n), with eta- defaulting to eta+.
inline ActivationFn build_eta_activation(double b, const EtaProfile& etaPlus,
                                         const std::optional<EtaProfile>& etaMinus, bool isSigned,
                                         double tol = kDefaultTol) {
  if (!(b > 1.0)) throw InvalidArgument("eta activation needs b > 1");
  if (isSigned && etaMinus) throw InvalidArgument("signed eta activation takes no eta-minus");
  auto check = [&](const EtaProfile& p) {
    if (std::abs(p.b() - b) > tol) throw InvalidArgument("eta profile b does not match");
    const double gap = p.ys().back() - b * p.ys().front();
    if (std::abs(gap) > tol)
      throw EndpointViolation("eta(b) - b*eta(1) = " + format_g17(gap) + " exceeds tolerance");
  };
  check(etaPlus);
  if (etaMinus) check(*etaMinus);
  ActivationFn f(ActivationKind::EtaMultiplicative, isSigned ? "eta-odd" : "eta");
  f.eta_ = std::make_shared<const EtaParams>(EtaParams{b, etaPlus, etaMinus, isSigned});
  return f;
}

/// Difference of the one-sided limits of f at x0 = b^n, each estimated by
/// linear extrapolation from x0(1 -+ eps) and x0(1 -+ 2 eps).
inline double boundary_jump(const ActivationFn& f, double b, int n, double eps = 1e-6) {
  const double x0 = std::pow(b, n);
  const double left = 2.0 * f(x0 * (1.0 - eps)) - f(x0 * (1.0 - 2.0 * eps));
  const double right = 2.0 * f(x0 * (1.0 + eps)) - f(x0 * (1.0 + 2.0 * eps));
  return std::abs(right - left);
}

/// Log-spaced magnitudes in [minAbs, maxAbs], taken with both signs.
struct MembershipGrid {
  double minAbs = 1e-3;
  double maxAbs = 1e3;
  std::size_t perSide = 241;

  std::vector<double> magnitudes() const {
    if (!(minAbs > 0.0) || !(maxAbs > minAbs) || perSide < 2)
      throw InvalidArgument("membership grid needs 0 < minAbs < maxAbs and perSide >= 2");
    if (std::log10(maxAbs / minAbs) < 3.0 - 1e-12)
      throw InvalidArgument("membership grid must cover at least three decades");
    std::vector<double> out(perSide);
    const double lo = std::log(minAbs), hi = std::log(maxAbs);
    for (std::size_t i = 0; i < perSide; ++i)
      out[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / (perSide - 1));
    return out;
  }
};

struct MembershipReport {
  bool member = true;
  double worstResidual = 0.0;
  double worstX = 0.0;
};

namespace detail {

struct ResidualTracker {
  MembershipReport report;
  void add(double x, double r) {
    if (!(r <= report.worstResidual)) {
      report.worstResidual = r;
      report.worstX = x;
    }
  }
};

// Max residual of the least-squares line through the origin.
inline void fit_through_origin(const ActivationFn& f, std::span<const double> xs,
                               ResidualTracker& t) {
  double sxy = 0.0, sxx = 0.0;
  for (double x : xs) {
    sxy += x * f(x);
    sxx += x * x;
  }
  const double slope = sxy / sxx;
  for (double x : xs) t.add(x, std::abs(f(x) - slope * x));
}

}  // namespace detail

/// Numeric test of the identity that defines `label` over a symmetric
/// log-spaced grid.
inline MembershipReport check_family_membership(const ActivationFn& f,
                                                const ActivationFamilyLabel& label,
                                                const MembershipGrid& grid = {},
                                                double tol = kDefaultTol) {
  const std::vector<double> mags = grid.magnitudes();
  std::vector<double> neg(mags.size()), all;
  for (std::size_t i = 0; i < mags.size(); ++i) neg[i] = -mags[i];
  all.insert(all.end(), neg.rbegin(), neg.rend());
  all.insert(all.end(), mags.begin(), mags.end());

  detail::ResidualTracker t;
  auto oddness = [&] {
    for (double x : mags) t.add(x, std::abs(f(-x) + f(x)));
  };
  auto multiplicativity = [&](double b) {
    for (double x : all) t.add(x, std::abs(f(b * x) - b * f(x)));
  };

  switch (label.kind) {
    case FamilyKind::Continuous: break;
    case FamilyKind::OddContinuous: oddness(); break;
    case FamilyKind::Semilinear:
      detail::fit_through_origin(f, mags, t);
      detail::fit_through_origin(f, neg, t);
      break;
    case FamilyKind::BMultiplicative: multiplicativity(*label.b); break;
    case FamilyKind::PMBMultiplicative:
      multiplicativity(*label.b);
      oddness();
      break;
    case FamilyKind::AffineOnly: {
      const double m = static_cast<double>(all.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (double x : all) {
        const double y = f(x);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      const double icept = (sy - slope * sx) / m;
      for (double x : all) t.add(x, std::abs(f(x) - (slope * x + icept)));
      break;
    }
    case FamilyKind::LinearOnly: detail::fit_through_origin(f, all, t); break;
  }
  t.report.member = t.report.worstResidual <= tol;
  return t.report;
}

/// Deterministic uniform sampler for verification trials.
class TrialRng {
 public:
  explicit TrialRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [lo, hi), 53-bit resolution.
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi) excluding exact zero.
  double nonzero(double lo, double hi) {
    double v = 0.0;
    while (v == 0.0) v = uniform(lo, hi);
    return v;
  }

  std::vector<double> vector(std::size_t n, double lo = -10.0, double hi = 10.0) {
    std::vector<double> v(n);
    for (double& x : v) x = nonzero(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

struct EquivarianceCounterexample {
  std::size_t trial = 0;
  std::size_t matrixIndex = 0;
  Matrix matrix;
  std::vector<double> x;
  double residual = 0.0;
};

struct EquivarianceReport {
  bool pass = true;
  std::size_t trials = 0;
  double worstResidual = 0.0;
  std::optional<EquivarianceCounterexample> counterexample;
};

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Checks ||f~(Mx) - M f~(x)||_inf <= tol for `trials` seeded random x with
/// components in [-10, 10] and every M in `mats`. Checking generators
/// suffices for the generated group. The counterexample is the first failure
/// in (trial, matrix) order.
inline EquivarianceReport verify_pointwise_equivariance(const ActivationFn& f,
                                                        std::span<const Matrix> mats,
                                                        std::size_t trials,
                                                        double tol = kDefaultTol,
                                                        std::uint64_t seed = 0) {
  if (trials == 0) throw InvalidArgument("verification needs at least one trial");
  EquivarianceReport rep;
  rep.trials = trials;
  if (mats.empty()) return rep;
  const std::size_t n = mats.front().cols();
  for (const Matrix& m : mats)
    if (!m.square() || m.rows() != n) throw InvalidArgument("matrices must share one dimension");

  TrialRng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::vector<double> x = rng.vector(n);
    const std::vector<double> fx = f.apply(x);
    for (std::size_t k = 0; k < mats.size(); ++k) {
      const std::vector<double> lhs = f.apply(mats[k] * x);
      const std::vector<double> rhs = mats[k] * fx;
      const double r = max_abs_diff(lhs, rhs);
      rep.worstResidual = std::max(rep.worstResidual, r);
      if (!(r <= tol) && !rep.counterexample) {
        rep.pass = false;
        rep.counterexample = EquivarianceCounterexample{t, k, mats[k], x, r};
      }
    }
  }
  return rep;
}

inline EquivarianceReport verify_pointwise_equivariance(const ActivationFn& f,
                                                        const std::vector<Matrix>& mats,
                                                        std::size_t trials,
                                                        double tol = kDefaultTol,
                                                        std::uint64_t seed = 0) {
  return verify_pointwise_equivariance(f, std::span<const Matrix>(mats), trials, tol, seed);
}

/// Sample points for CSV export: `count` points from lo to hi, linear or
/// logarithmic (log needs 0 < lo). A linear grid that straddles zero always
/// contains an exact 0.
struct SampleGrid {
  double lo = -4.0;
  double hi = 4.0;
  std::size_t count = 81;
  bool log = false;

  std::vector<double> points() const {
    if (!(hi > lo) || count < 2 || !std::isfinite(lo) || !std::isfinite(hi))
      throw InvalidArgument("sample grid needs finite lo < hi and count >= 2");
    std::vector<double> xs(count);
    if (log) {
      if (!(lo > 0.0)) throw InvalidArgument("log grid needs lo > 0");
      const double a = std::log(lo), b = std::log(hi);
      for (std::size_t i = 0; i < count; ++i)
        xs[i] = std::exp(a + (b - a) * static_cast<double>(i) / (count - 1));
      xs.front() = lo;
      xs.back() = hi;
      return xs;
    }
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
      xs[i] = i + 1 == count ? hi : lo + step * static_cast<double>(i);
      if (std::abs(xs[i]) < step * 1e-9) xs[i] = 0.0;
    }
    if (lo < 0.0 && hi > 0.0 && std::find(xs.begin(), xs.end(), 0.0) == xs.end())
      xs.insert(std::upper_bound(xs.begin(), xs.end(), 0.0), 0.0);
    return xs;
  }
};

/// Writes `x,f_x` rows with 17 significant digits.
inline void write_activation_csv(std::ostream& out, const ActivationFn& f,
                                 std::span<const double> xs) {
  out << "x,f_x\n";
  for (double x : xs) out << format_g17(x) << ',' << format_g17(f(x)) << '\n';
}

}  // namespace equichar
