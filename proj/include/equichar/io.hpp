// JSON group-spec and eta-profile parsing, built-in groups, report records
// and deterministic serialization (17 significant digits for every float).
#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "equichar/activations.hpp"
#include "equichar/core.hpp"
#include "equichar/format.hpp"
#include "equichar/normalize.hpp"
#include "equichar/repspaces.hpp"
#include "equichar/tclass.hpp"

namespace equichar {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "equichar.report/1";
inline constexpr const char* kBasisSchema = "equichar.basis/1";
inline constexpr const char* kDensityWarning =
    "density heuristic: T was classified as dense by a tolerance-based real GCD of "
    "log-magnitudes; density cannot be proven from finite floating-point data";
inline constexpr const char* kSignTrustWarning =
    "normalization checks coefficient magnitudes exactly from generators; the sign structure "
    "of long words is trusted, not verified";
inline constexpr const char* kClosureWarning =
    "non-monomial group closure did not terminate below the cap; T was computed from "
    "generator subset sums only";

class ParseError : public Error {
 public:
  using Error::Error;
};

struct GroupSpecFile {
  GroupSpec spec;
  std::optional<double> tolerance;
};

namespace detail {

inline double finite_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(where + ": NaN/Inf is not allowed");
  return x;
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (double v : m.row(r)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void dump_into(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::number_float: out += format_g17(j.get<double>()); return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line (matrix rows, vectors).
      bool flat = true;
      for (const auto& e : j)
        if (e.is_structured()) flat = false;
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        out += first ? "" : ",";
        if (flat) {
          out += first ? "" : " ";
        } else {
          out += '\n' + pad;
        }
        dump_into(e, out, indent + 2);
        first = false;
      }
      out += flat ? "]" : '\n' + close + ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        out += first ? "\n" : ",\n";
        out += pad + Json(it.key()).dump() + ": ";
        dump_into(it.value(), out, indent + 2);
        first = false;
      }
      out += '\n' + close + '}';
      return;
    }
    default: out += j.dump(); return;
  }
}

}  // namespace detail

/// Pretty JSON with every float printed via %.17g.
inline std::string dump_json(const Json& j) {
  std::string out;
  detail::dump_into(j, out, 0);
  out += '\n';
  return out;
}

/// Parses {"name", "dimension", "generators": [[[real]]], "tolerance"?}.
inline GroupSpecFile parse_group_spec(const Json& doc) {
  if (!doc.is_object()) throw ParseError("group spec must be a JSON object");
  GroupSpecFile f;
  f.spec.name = doc.value("name", std::string("unnamed"));
  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer() ||
      doc["dimension"].get<long long>() <= 0)
    throw ParseError("\"dimension\" must be a positive integer");
  const auto n = static_cast<std::size_t>(doc["dimension"].get<long long>());
  f.spec.dimension = n;
  if (!doc.contains("generators") || !doc["generators"].is_array())
    throw ParseError("\"generators\" must be an array of matrices");
  const Json& gens = doc["generators"];
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const std::string where = "generators[" + std::to_string(g) + "]";
    if (!gens[g].is_array() || gens[g].size() != n)
      throw ParseError(where + ": expected " + std::to_string(n) + " rows");
    Matrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      const Json& row = gens[g][r];
      if (!row.is_array() || row.size() != n)
        throw ParseError(where + "[" + std::to_string(r) + "]: expected " + std::to_string(n) +
                         " entries");
      for (std::size_t c = 0; c < n; ++c)
        m(r, c) = detail::finite_number(row[c], where + "[" + std::to_string(r) + "][" +
                                                    std::to_string(c) + "]");
    }
    f.spec.generators.push_back(std::move(m));
  }
  if (doc.contains("tolerance")) {
    const double t = detail::finite_number(doc["tolerance"], "tolerance");
    if (!(t > 0.0)) throw ParseError("tolerance must be positive");
    f.tolerance = t;
  }
  return f;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline GroupSpecFile parse_group_spec_text(const std::string& text) {
  try {
    return parse_group_spec(Json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
}

inline Json group_spec_json(const GroupSpec& spec, std::optional<double> tol = std::nullopt) {
  Json j;
  j["name"] = spec.name;
  j["dimension"] = spec.dimension;
  Json gens = Json::array();
  for (const Matrix& g : spec.generators) gens.push_back(detail::matrix_json(g));
  j["generators"] = std::move(gens);
  if (tol) j["tolerance"] = *tol;
  return j;
}

/// Generator set of a permutation group as permutation matrices.
inline GroupSpec permutation_spec(std::string name, std::size_t n,
                                  const std::vector<Permutation>& gens) {
  GroupSpec s{std::move(name), n, {}};
  for (const Permutation& p : gens) s.generators.push_back(Matrix::permutation(p));
  return s;
}

/// Built-in groups: sym:N, cyclic:N, signed-sym:N, signed-cyclic:N and
/// rot:K (2D rotation by 2 pi / K).
inline GroupSpec builtin_group(const std::string& name) {
  const auto colon = name.find(':');
  if (colon == std::string::npos) throw ParseError("built-in group must look like kind:N");
  const std::string kind = name.substr(0, colon);
  std::size_t n = 0;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(name.substr(colon + 1), &used);
    if (used != name.size() - colon - 1 || v < 1) throw std::invalid_argument("range");
    n = static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError("bad size in built-in group '" + name + "'");
  }
  if (kind == "sym") return permutation_spec(name, n, symmetric_generators(n));
  if (kind == "cyclic") return permutation_spec(name, n, cyclic_generators(n));
  if (kind == "signed-sym") {
    GroupSpec s = permutation_spec(name, n, symmetric_generators(n));
    Matrix flip = Matrix::identity(n);
    flip(0, 0) = -1.0;
    s.generators.push_back(flip);
    return s;
  }
  if (kind == "signed-cyclic") {
    Permutation cyc = identity_permutation(n);
    for (std::size_t i = 0; i < n; ++i) cyc[i] = (i + 1) % n;
    Matrix m = Matrix::permutation(cyc);
    m(cyc[n - 1], n - 1) = -1.0;
    return GroupSpec{name, n, {m}};
  }
  if (kind == "rot") {
    const double t = 2.0 * std::numbers::pi / static_cast<double>(n);
    Matrix r{{std::cos(t), -std::sin(t)}, {std::sin(t), std::cos(t)}};
    // Snap float noise so exact quarter turns stay monomial at any tolerance.
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        if (std::abs(r(i, j)) < 1e-15) r(i, j) = 0.0;
    return GroupSpec{name, 2, {r}};
  }
  throw ParseError("unknown built-in group kind '" + kind + "'");
}

/// Permutation generators of a spec whose generators are permutation matrices.
inline std::vector<Permutation> permutations_of(const GroupSpec& spec, double tol = kDefaultTol) {
  std::vector<Permutation> out;
  for (std::size_t g = 0; g < spec.generators.size(); ++g) {
    const Matrix& m = spec.generators[g];
    if (m.rows() != spec.dimension || m.cols() != spec.dimension)
      throw ParseError("generator " + std::to_string(g) + " has the wrong shape");
    const auto form = monomial_decompose(m, tol);
    bool ok = form.has_value();
    if (ok)
      for (double a : form->coeffs) ok = ok && std::abs(a - 1.0) <= tol;
    if (!ok) throw ParseError("generator " + std::to_string(g) + " is not a permutation matrix");
    out.push_back(form->perm);
  }
  return out;
}

struct EtaFile {
  std::optional<double> b;
  bool isSigned = false;
  std::vector<double> plusX, plusY;
  std::optional<std::pair<std::vector<double>, std::vector<double>>> minus;

  ActivationFn build(std::optional<double> bOverride, std::optional<bool> signedOverride,
                     double tol) const {
    const std::optional<double> bb = bOverride ? bOverride : b;
    if (!bb) throw ParseError("eta profile needs b (in the file or on the command line)");
    const bool s = signedOverride.value_or(isSigned);
    EtaProfile plus = EtaProfile::from_samples(*bb, plusX, plusY, tol);
    std::optional<EtaProfile> m;
    if (minus && !s) m = EtaProfile::from_samples(*bb, minus->first, minus->second, tol);
    return build_eta_activation(*bb, plus, m, s, tol);
  }
};

/// {"b"?, "signed"?, "eta_plus": {"x": [...], "y": [...]}, "eta_minus"?: {...}}
inline EtaFile parse_eta_file(const Json& doc) {
  if (!doc.is_object()) throw ParseError("eta profile must be a JSON object");
  EtaFile f;
  if (doc.contains("b")) f.b = detail::finite_number(doc["b"], "b");
  if (doc.contains("signed")) {
    if (!doc["signed"].is_boolean()) throw ParseError("\"signed\" must be a boolean");
    f.isSigned = doc["signed"].get<bool>();
  }
  auto samples = [](const Json& p, const std::string& where) {
    if (!p.is_object() || !p.contains("x") || !p.contains("y") || !p["x"].is_array() ||
        !p["y"].is_array())
      throw ParseError(where + " needs \"x\" and \"y\" arrays");
    std::pair<std::vector<double>, std::vector<double>> xy;
    for (std::size_t i = 0; i < p["x"].size(); ++i)
      xy.first.push_back(detail::finite_number(p["x"][i], where + ".x"));
    for (std::size_t i = 0; i < p["y"].size(); ++i)
      xy.second.push_back(detail::finite_number(p["y"][i], where + ".y"));
    return xy;
  };
  if (!doc.contains("eta_plus")) throw ParseError("eta profile needs \"eta_plus\"");
  auto plus = samples(doc["eta_plus"], "eta_plus");
  f.plusX = std::move(plus.first);
  f.plusY = std::move(plus.second);
  if (doc.contains("eta_minus")) f.minus = samples(doc["eta_minus"], "eta_minus");
  return f;
}

// ---- report fragments ----

inline Json to_json(const SubgroupClassT& t) {
  Json j;
  j["kind"] = std::string(to_string(t.kind));
  if (t.b) j["b"] = *t.b;
  return j;
}

inline Json to_json(const ActivationFamilyLabel& f) {
  Json j;
  j["kind"] = std::string(to_string(f.kind));
  if (f.b) j["b"] = *f.b;
  return j;
}

inline Json to_json(const GroupClassification& c) {
  Json j;
  j["dimension"] = c.dimension;
  j["monomial"] = c.monomial;
  j["nonNegative"] = c.nonNegative;
  j["unitRow"] = c.unitRow;
  j["tclass"] = to_json(c.tclass);
  j["tSource"] = std::string(to_string(c.source));
  j["tGenerators"] = c.tGenerators.values;
  return j;
}

inline Json to_json(const ScalingResult& s) {
  Json j;
  j["d"] = s.d;
  Json gens = Json::array();
  for (const Matrix& g : s.normalizedGenerators) gens.push_back(detail::matrix_json(g));
  j["normalizedGenerators"] = std::move(gens);
  return j;
}

inline Json to_json(const UnboundedGroup& u) {
  Json j;
  j["generator"] = u.generator;
  j["cycle"] = u.cycle;
  j["logWeight"] = u.logWeight;
  j["message"] = u.describe();
  return j;
}

inline Json to_json(const EquivarianceReport& r) {
  Json j;
  j["pass"] = r.pass;
  j["trials"] = r.trials;
  j["worstResidual"] = r.worstResidual;
  if (r.counterexample) {
    Json c;
    c["trial"] = r.counterexample->trial;
    c["matrixIndex"] = r.counterexample->matrixIndex;
    c["matrix"] = detail::matrix_json(r.counterexample->matrix);
    c["x"] = r.counterexample->x;
    c["residual"] = r.counterexample->residual;
    j["counterexample"] = std::move(c);
  }
  return j;
}

/// Sparse export of a layer basis: shape [dimOut, dimIn] and, per element,
/// its (row, col) coordinates (0-based, row-major).
inline Json basis_export_json(const LayerBasis& basis) {
  Json j;
  j["schema"] = kBasisSchema;
  j["shape"] = Json::array({basis.dimOut, basis.dimIn});
  Json els = Json::array();
  for (const auto& el : basis.elements) {
    Json coords = Json::array();
    for (auto [r, c] : el) coords.push_back(Json::array({r, c}));
    els.push_back(std::move(coords));
  }
  j["elements"] = std::move(els);
  return j;
}

inline Json report_skeleton(const std::string& command, Json input) {
  Json j;
  j["schema"] = kReportSchema;
  j["command"] = command;
  j["input"] = std::move(input);
  return j;
}

inline std::vector<std::string> classification_warnings(const GroupClassification& c) {
  std::vector<std::string> w;
  if (c.tclass.dense()) w.emplace_back(kDensityWarning);
  if (c.source == TSource::GeneratorSubsetSums) w.emplace_back(kClosureWarning);
  return w;
}

/// Full classify report: classification, maximal family and warnings.
inline Json classify_report(const GroupSpec& spec, double tol) {
  const GroupClassification c = classify_group(spec, tol);
  Json j = report_skeleton("classify", group_spec_json(spec, tol));
  j["classification"] = to_json(c);
  j["family"] = to_json(maximal_family(c));
  j["warnings"] = classification_warnings(c);
  return j;
}

}  // namespace equichar
