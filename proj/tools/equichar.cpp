// equichar: classify representation groups against admissible point-wise
// activations, normalize bounded monomial groups, build equivariant layer
// bases and verify equivariance.
//
// Exit codes: 0 ok, 1 verification failed, 2 parse error, 3 size limit,
// 4 unbounded group, 5 not monomial, 6 eta endpoint violation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "equichar/equichar.hpp"

namespace {

using namespace equichar;

enum Exit : int {
  kOk = 0,
  kVerifyFailed = 1,
  kParse = 2,
  kSize = 3,
  kUnbounded = 4,
  kNotMonomial = 5,
  kEndpoint = 6,
};

struct SpecInput {
  std::string path;
  std::string builtin;
  std::optional<double> tol;
};

double env_tolerance() {
  if (const char* env = std::getenv("EQUICHAR_TOL")) {
    char* end = nullptr;
    const double t = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(t > 0.0) || !std::isfinite(t))
      throw ParseError("EQUICHAR_TOL must be a positive number");
    return t;
  }
  return kDefaultTol;
}

// Flag beats file beats environment beats the library default.
double resolve_tol(const std::optional<double>& flag, const std::optional<double>& file) {
  if (flag) return *flag;
  if (file) return *file;
  return env_tolerance();
}

std::pair<GroupSpec, double> load_spec(const SpecInput& in) {
  if (in.path.empty() == in.builtin.empty())
    throw ParseError("give exactly one of a spec file or --group");
  if (!in.builtin.empty()) return {builtin_group(in.builtin), resolve_tol(in.tol, std::nullopt)};
  GroupSpecFile f = parse_group_spec(read_json_file(in.path));
  const double tol = resolve_tol(in.tol, f.tolerance);
  try {
    f.spec.validate(tol);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
  return {std::move(f.spec), tol};
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw ParseError("cannot write " + out_path);
  out << text;
}

void add_spec_options(CLI::App* cmd, SpecInput& in) {
  cmd->add_option("spec", in.path, "group spec JSON file");
  cmd->add_option("--group", in.builtin,
                  "built-in group: sym:N, cyclic:N, signed-sym:N, signed-cyclic:N, rot:K");
  cmd->add_option("--tol", in.tol, "numeric tolerance (default 1e-9 or $EQUICHAR_TOL)");
}

int run_classify(const SpecInput& in, const std::string& out) {
  auto [spec, tol] = load_spec(in);
  emit(dump_json(classify_report(spec, tol)), out);
  return kOk;
}

int run_normalize(const SpecInput& in, const std::string& out) {
  auto [spec, tol] = load_spec(in);
  Json rep = report_skeleton("normalize", group_spec_json(spec, tol));
  const ScalingOutcome res = signed_normalize(spec, tol);
  std::vector<std::string> warnings{kSignTrustWarning};
  int code = kOk;
  if (const auto* ok = std::get_if<ScalingResult>(&res)) {
    rep["scaling"] = to_json(*ok);
  } else {
    rep["unbounded"] = to_json(std::get<UnboundedGroup>(res));
    code = kUnbounded;
  }
  rep["warnings"] = warnings;
  emit(dump_json(rep), out);
  return code;
}

struct BasisArgs {
  std::size_t n = 0;
  std::size_t kIn = 1;
  std::size_t kOut = 1;
  std::string group = "sym";
  std::string specPath;
  std::string exportPath;
};

int run_basis(const BasisArgs& a, const std::string& out) {
  std::vector<Permutation> gens;
  if (a.group == "sym") {
    gens = symmetric_generators(a.n);
  } else if (a.group == "cyclic") {
    gens = cyclic_generators(a.n);
  } else if (a.group == "file") {
    if (a.specPath.empty()) throw ParseError("--group file needs --spec");
    const GroupSpecFile f = parse_group_spec(read_json_file(a.specPath));
    if (f.spec.dimension != a.n)
      throw ParseError("spec dimension " + std::to_string(f.spec.dimension) +
                       " does not match --n " + std::to_string(a.n));
    gens = permutations_of(f.spec, f.tolerance.value_or(kDefaultTol));
  } else {
    throw ParseError("--group must be sym, cyclic or file");
  }
  const PermAction in = tensor_action(a.n, a.kIn, gens);
  const PermAction outAction = tensor_action(a.n, a.kOut, gens);
  const LayerBasis basis = equivariant_basis(in, outAction);

  Json input;
  input["n"] = a.n;
  input["kIn"] = a.kIn;
  input["kOut"] = a.kOut;
  input["group"] = a.group;
  if (!a.specPath.empty()) input["spec"] = a.specPath;
  Json rep = report_skeleton("basis", std::move(input));
  Json summary;
  summary["dimIn"] = basis.dimIn;
  summary["dimOut"] = basis.dimOut;
  summary["count"] = basis.size();
  summary["orbitSizes"] = Json::array();
  for (const auto& el : basis.elements) summary["orbitSizes"].push_back(el.size());
  rep["basis"] = std::move(summary);
  rep["warnings"] = Json::array();

  const std::string report = dump_json(rep);
  const std::string exported = a.exportPath.empty() ? "" : dump_json(basis_export_json(basis));
  emit(report, out);
  if (!a.exportPath.empty()) emit(exported, a.exportPath);
  std::cerr << "basis elements: " << basis.size() << '\n';
  return kOk;
}

struct VerifyArgs {
  std::string activation = "relu";
  std::size_t trials = 100;
  std::uint64_t seed = 0;
};

ActivationFn activation_from(const std::string& name, double tol) {
  if (name == "relu") return ActivationFn::relu();
  if (name == "tanh") return ActivationFn::tanh();
  if (name == "identity") return ActivationFn::identity();
  if (name.rfind("eta:", 0) == 0)
    return parse_eta_file(read_json_file(name.substr(4))).build(std::nullopt, std::nullopt, tol);
  throw ParseError("unknown activation '" + name + "'");
}

int run_verify(const SpecInput& in, const VerifyArgs& a, const std::string& out) {
  auto [spec, tol] = load_spec(in);
  const ActivationFn f = activation_from(a.activation, tol);
  const EquivarianceReport r = verify_pointwise_equivariance(f, spec.generators, a.trials, tol,
                                                             a.seed);
  Json input = group_spec_json(spec, tol);
  input["activation"] = a.activation;
  input["seed"] = a.seed;
  Json rep = report_skeleton("verify", std::move(input));
  rep["verification"] = to_json(r);
  rep["warnings"] = Json::array();
  emit(dump_json(rep), out);
  return r.pass ? kOk : kVerifyFailed;
}

struct ExportArgs {
  std::optional<double> b;
  std::string etaFile;
  bool isSigned = false;
  SampleGrid grid;
  std::string spacing = "linear";
  std::optional<double> tol;
};

int run_export(const ExportArgs& a, const std::string& out) {
  const double tol = resolve_tol(a.tol, std::nullopt);
  const EtaFile file = parse_eta_file(read_json_file(a.etaFile));
  const ActivationFn f =
      file.build(a.b, a.isSigned ? std::optional<bool>(true) : std::nullopt, tol);
  SampleGrid grid = a.grid;
  if (a.spacing != "linear" && a.spacing != "log")
    throw ParseError("--spacing must be linear or log");
  grid.log = a.spacing == "log";
  std::vector<double> xs;
  try {
    xs = grid.points();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
  std::ostringstream csv;
  write_activation_csv(csv, f, xs);
  emit(csv.str(), out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equichar: admissible point-wise activations for representation groups"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out;
  app.add_option("--out", out, "write the report (or CSV) to this file instead of stdout");

  SpecInput classifyIn, normalizeIn, verifyIn;
  auto* classify = app.add_subcommand("classify", "classify a group and its maximal family");
  add_spec_options(classify, classifyIn);

  auto* normalize = app.add_subcommand("normalize", "scale a monomial group to signed permutations");
  add_spec_options(normalize, normalizeIn);

  BasisArgs basisArgs;
  auto* basis = app.add_subcommand("basis", "equivariant layer basis between tensor powers");
  basis->add_option("--n", basisArgs.n, "number of points")->required()->check(CLI::PositiveNumber);
  basis->add_option("--k-in", basisArgs.kIn, "input tensor order")->check(CLI::PositiveNumber);
  basis->add_option("--k-out", basisArgs.kOut, "output tensor order")->check(CLI::PositiveNumber);
  basis->add_option("--group", basisArgs.group, "sym, cyclic or file");
  basis->add_option("--spec", basisArgs.specPath, "permutation-matrix group spec for --group file");
  basis->add_option("--export", basisArgs.exportPath, "write the sparse basis JSON here");

  VerifyArgs verifyArgs;
  auto* verify = app.add_subcommand("verify", "check point-wise equivariance numerically");
  add_spec_options(verify, verifyIn);
  verify->add_option("--activation", verifyArgs.activation, "relu, tanh, identity or eta:<file>");
  verify->add_option("--trials", verifyArgs.trials, "random trials")->check(CLI::PositiveNumber);
  verify->add_option("--seed", verifyArgs.seed, "random seed");

  ExportArgs exportArgs;
  auto* exportCmd = app.add_subcommand("export-activation", "sample an eta-built activation as CSV");
  exportCmd->add_option("--b", exportArgs.b, "scale b > 1 (overrides the file)");
  exportCmd->add_option("--eta-file", exportArgs.etaFile, "eta profile JSON")->required();
  exportCmd->add_flag("--signed", exportArgs.isSigned, "odd extension (+-b-multiplicative)");
  exportCmd->add_option("--min", exportArgs.grid.lo, "grid start");
  exportCmd->add_option("--max", exportArgs.grid.hi, "grid end");
  exportCmd->add_option("--count", exportArgs.grid.count, "grid points");
  exportCmd->add_option("--spacing", exportArgs.spacing, "linear or log");
  exportCmd->add_option("--tol", exportArgs.tol, "numeric tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  try {
    if (classify->parsed()) return run_classify(classifyIn, out);
    if (normalize->parsed()) return run_normalize(normalizeIn, out);
    if (basis->parsed()) return run_basis(basisArgs, out);
    if (verify->parsed()) return run_verify(verifyIn, verifyArgs, out);
    if (exportCmd->parsed()) return run_export(exportArgs, out);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const DimensionTooLarge& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSize;
  } catch (const SizeExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSize;
  } catch (const NotMonomialError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNotMonomial;
  } catch (const EndpointViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kEndpoint;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  }
  return kParse;
}
