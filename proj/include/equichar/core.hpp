// Dense matrices, monomial decomposition, finite matrix-group closure and
// structural predicates used by the classifiers.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace equichar {

inline constexpr double kDefaultTol = 1e-9;
inline constexpr std::size_t kDefaultClosureCap = 10000;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotMonomialError : public Error {
 public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

class SizeExceeded : public Error {
 public:
  using Error::Error;
};

/// A bijection on {0..n-1}; `perm[i]` is the image of i.
using Permutation = std::vector<std::size_t>;

inline bool is_bijection(std::span<const std::size_t> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t v : perm) {
    if (v >= perm.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

inline Permutation identity_permutation(std::size_t n) {
  Permutation p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  return p;
}

/// Row-major dense real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Builds from nested rows; all rows must have equal length.
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw InvalidArgument("ragged matrix rows");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) throw InvalidArgument("ragged matrix rows");
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.cols_);
    }
    return m;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
  static Matrix diagonal(std::initializer_list<double> d) {
    return diagonal(std::span<const double>(d.begin(), d.size()));
  }

  /// Matrix with `perm[j]`-th entry of column j set to 1, i.e. e_j -> e_{perm[j]}.
  static Matrix permutation(std::span<const std::size_t> perm) {
    Matrix m(perm.size(), perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) m(perm[j], j) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  std::span<const double> data() const { return data_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r].assign(row(r).begin(), row(r).end());
    return out;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matrix product shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw InvalidArgument("matrix-vector shape mismatch");
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

inline std::vector<double> operator*(const Matrix& a, const std::vector<double>& x) {
  return a * std::span<const double>(x);
}

/// Max-abs entrywise difference; infinity when shapes differ.
inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline bool approx_equal(const Matrix& a, const Matrix& b, double tol = kDefaultTol) {
  return max_abs_diff(a, b) <= tol;
}

/// Determinant by partial-pivot elimination.
inline double determinant(const Matrix& m) {
  if (!m.square()) throw InvalidArgument("determinant of non-square matrix");
  const std::size_t n = m.rows();
  Matrix a = m;
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (a(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(piv, k), a(c, k));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (std::size_t k = c; k < n; ++k) a(r, k) -= f * a(c, k);
    }
  }
  return det;
}

inline bool is_invertible(const Matrix& m, double tol = kDefaultTol) {
  return m.square() && m.rows() > 0 && std::abs(determinant(m)) > tol;
}

/// Gauss-Jordan inverse; throws InvalidArgument on singular input.
inline Matrix inverse(const Matrix& m) {
  if (!m.square()) throw InvalidArgument("inverse of non-square matrix");
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (a(piv, c) == 0.0) throw InvalidArgument("singular matrix");
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(a(piv, k), a(c, k));
      std::swap(inv(piv, k), inv(c, k));
    }
    const double p = a(c, c);
    for (std::size_t k = 0; k < n; ++k) {
      a(c, k) /= p;
      inv(c, k) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a(r, c) == 0.0) continue;
      const double f = a(r, c);
      for (std::size_t k = 0; k < n; ++k) {
        a(r, k) -= f * a(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

/// A monomial matrix factored as M e_i = coeffs[i] e_{perm[i]}.
struct MonomialForm {
  Permutation perm;
  std::vector<double> coeffs;

  Matrix dense() const {
    Matrix m(perm.size(), perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) m(perm[i], i) = coeffs[i];
    return m;
  }
};

/// Splits `m` into permutation and column coefficients. Entries with
/// |x| <= tol count as zero; anything other than exactly one nonzero per row
/// and per column yields nullopt.
inline std::optional<MonomialForm> monomial_decompose(const Matrix& m, double tol = kDefaultTol) {
  if (!m.square()) throw InvalidArgument("monomial_decompose needs a square matrix");
  const std::size_t n = m.rows();
  MonomialForm form{Permutation(n), std::vector<double>(n)};
  std::vector<bool> row_used(n, false);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (std::abs(m(r, c)) > tol) {
        if (++hits > 1 || row_used[r]) return std::nullopt;
        row_used[r] = true;
        form.perm[c] = r;
        form.coeffs[c] = m(r, c);
      }
    }
    if (hits != 1) return std::nullopt;
  }
  return form;
}

inline bool is_monomial(const Matrix& m, double tol = kDefaultTol) {
  return m.square() && monomial_decompose(m, tol).has_value();
}

/// True iff every row sums to 1 within tol, i.e. M 1 = 1.
inline bool is_unit_row(const Matrix& m, double tol = kDefaultTol) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (double v : m.row(r)) s += v;
    if (std::abs(s - 1.0) > tol) return false;
  }
  return true;
}

/// A matrix group given by generators.
struct GroupSpec {
  std::string name;
  std::size_t dimension = 0;
  std::vector<Matrix> generators;

  /// Throws InvalidArgument unless every generator is an invertible n x n matrix.
  void validate(double tol = kDefaultTol) const {
    if (dimension == 0) throw InvalidArgument("group dimension must be positive");
    for (std::size_t g = 0; g < generators.size(); ++g) {
      const Matrix& m = generators[g];
      if (m.rows() != dimension || m.cols() != dimension)
        throw InvalidArgument("generator " + std::to_string(g) + " is not " +
                              std::to_string(dimension) + "x" + std::to_string(dimension));
      if (!is_invertible(m, tol))
        throw InvalidArgument("generator " + std::to_string(g) + " is singular");
    }
  }
};

struct ClosureResult {
  std::vector<Matrix> elements;
  bool complete = false;
};

namespace detail {

// Index of matrices keyed by a fixed weighted projection of their entries.
// Two matrices within max-abs distance tol have projections within
// tol * sum|w|, so a range query plus an exact check finds every duplicate.
class MatrixIndex {
 public:
  MatrixIndex(std::size_t entries, double tol) : weights_(entries), tol_(tol) {
    std::uint64_t s = 0x9E3779B97F4A7C15ull;
    for (double& w : weights_) {
      s ^= s << 13;
      s ^= s >> 7;
      s ^= s << 17;
      w = 0.5 + static_cast<double>(s >> 11) * 0x1.0p-53;
      weight_sum_ += w;
    }
  }

  /// Returns true and stores `m` if no stored matrix is within tol, taken
  /// relative to the larger of the two entry scales (at least 1).
  bool insert(const Matrix& m, std::vector<Matrix>& store) {
    const double key = project(m);
    const double scale = std::max(1.0, m.max_abs());
    const double slack = 2.0 * tol_ * scale * weight_sum_ * (1.0 + 1e-12) + 1e-300;
    for (auto it = index_.lower_bound(key - slack); it != index_.end() && it->first <= key + slack;
         ++it) {
      const Matrix& other = store[it->second];
      if (max_abs_diff(other, m) <= tol_ * std::max(scale, other.max_abs())) return false;
    }
    index_.emplace(key, store.size());
    store.push_back(m);
    return true;
  }

 private:
  double project(const Matrix& m) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * m.data()[i];
    return s;
  }

  std::vector<double> weights_;
  double weight_sum_ = 0.0;
  double tol_;
  std::multimap<double, std::size_t> index_;
};

}  // namespace detail

/// Breadth-first closure of <generators> starting from the identity. Each
/// dequeued element h yields g*h for every generator g in list order.
/// `complete` is false when the element count would exceed `cap`, or as soon
/// as an element has |det| != 1 or a non-finite entry, since no finite group
/// contains one.
inline ClosureResult close_group(const GroupSpec& spec, std::size_t cap = kDefaultClosureCap,
                                 double tol = kDefaultTol) {
  const std::size_t n = spec.dimension;
  ClosureResult result;
  detail::MatrixIndex index(n * n, tol);
  index.insert(Matrix::identity(n), result.elements);
  for (std::size_t head = 0; head < result.elements.size(); ++head) {
    for (const Matrix& g : spec.generators) {
      Matrix next = g * result.elements[head];
      const double det = determinant(next);
      if (!std::isfinite(det) || std::abs(std::abs(det) - 1.0) > std::sqrt(tol)) {
        result.complete = false;
        return result;
      }
      if (index.insert(next, result.elements) && result.elements.size() > cap) {
        result.elements.pop_back();
        result.complete = false;
        return result;
      }
    }
  }
  result.complete = true;
  return result;
}

}  // namespace equichar
