#pragma once
//
// asymlab/experiment.hpp -- declarative batch experiments.
//
// An experiment is a small key = value text file: a name, a kind, a
// truncation ladder, and a [params] section.  Running one executes the
// corresponding library pipeline once per ladder rung (optionally in a
// worker pool), writes CSV data files (RFC 4180, full double precision),
// and a JSON manifest with stable key order listing every emitted file
// with a content hash.  Everything is deterministic given the file: the
// only randomness is a generator seeded from the experiment name.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "asymlab/asymptote.hpp"
#include "asymlab/eigenbasis.hpp"
#include "asymlab/errors.hpp"
#include "asymlab/linalg.hpp"
#include "asymlab/model_space.hpp"
#include "asymlab/weighted_shift.hpp"

namespace asymlab {

inline constexpr const char* kToolVersion = "asymlab 1.0.0";

// ---------------------------------------------------------------------------
// Formatting helpers
// ---------------------------------------------------------------------------

// Full-precision scientific rendering; round-trips a double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

// RFC 4180: quote when a field contains comma, quote, or newline.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += "\r\n";
  return out;
}

// FNV-1a 64-bit content hash (stable, dependency-free).
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a64(data));
  return buf;
}

// ---------------------------------------------------------------------------
// Experiment specification
// ---------------------------------------------------------------------------

struct ExperimentSpec {
  std::string name;
  std::string kind;
  std::vector<long> ladder;
  std::string output_dir;  // optional; CLI --out overrides
  std::map<std::string, std::string> params;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{
      "helson-szego-ladder", "example-noest",      "model-space-pair",
      "weighted-shift-suite", "block-gram",        "dirac-example"};
  return kinds;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double_field(const std::string& field,
                                 const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (detail::trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw schema_error(field, "expected a number, got '" + text + "'");
}

inline long parse_long_field(const std::string& field, const std::string& text) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (detail::trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw schema_error(field, "expected an integer, got '" + text + "'");
}

}  // namespace detail

// Parses the key = value experiment format.  Lines: blank, '#' comments,
// '[params]' section header, or 'key = value'.  Top-level keys: name, kind,
// ladder (comma-separated integers), output_dir.
inline ExperimentSpec parse_experiment_spec(const std::string& text) {
  ExperimentSpec spec;
  bool in_params = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t == "[params]") {
        in_params = true;
        continue;
      }
      throw schema_error("section", "unknown section '" + t + "' at line " +
                                        std::to_string(lineno));
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw schema_error("line " + std::to_string(lineno),
                         "expected 'key = value', got '" + t + "'");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty())
      throw schema_error("line " + std::to_string(lineno), "empty key");
    if (in_params) {
      if (spec.params.count(key))
        throw schema_error(key, "duplicate parameter");
      spec.params[key] = value;
      continue;
    }
    if (key == "name") {
      spec.name = value;
    } else if (key == "kind") {
      spec.kind = value;
    } else if (key == "output_dir") {
      spec.output_dir = value;
    } else if (key == "ladder") {
      std::string item;
      std::istringstream ls(value);
      while (std::getline(ls, item, ',')) {
        const std::string it = detail::trim(item);
        if (it.empty()) throw schema_error("ladder", "empty rung entry");
        spec.ladder.push_back(detail::parse_long_field("ladder", it));
      }
    } else {
      throw schema_error(key, "unknown top-level key");
    }
  }
  return spec;
}

inline ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw schema_error("spec-file", "cannot open '" + path + "'");
  std::ostringstream body;
  body << in.rdbuf();
  return parse_experiment_spec(body.str());
}

namespace detail {

inline void require_params(const ExperimentSpec& spec,
                           const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : spec.params) {
    bool ok = false;
    for (const std::string& a : allowed) ok = ok || a == key;
    if (!ok) throw schema_error(key, "unknown parameter for kind " + spec.kind);
  }
}

inline double param_double(const ExperimentSpec& spec, const std::string& key,
                           double fallback, bool required = false) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    if (required) throw schema_error(key, "required parameter missing");
    return fallback;
  }
  return parse_double_field(key, it->second);
}

inline long param_long(const ExperimentSpec& spec, const std::string& key,
                       long fallback, bool required = false) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    if (required) throw schema_error(key, "required parameter missing");
    return fallback;
  }
  return parse_long_field(key, it->second);
}

inline std::string param_string(const ExperimentSpec& spec,
                                const std::string& key,
                                const std::string& fallback) {
  const auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

}  // namespace detail

// Kind-specific schema validation; throws schema_error naming the field.
inline void validate_experiment(const ExperimentSpec& spec) {
  if (spec.name.empty()) throw schema_error("name", "missing");
  for (char c : spec.name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
      throw schema_error("name",
                         "only alphanumerics, '-' and '_' are allowed");
  bool known = false;
  for (const std::string& k : experiment_kinds()) known = known || k == spec.kind;
  if (!known)
    throw schema_error("kind", spec.kind.empty()
                                   ? "missing"
                                   : "unknown kind '" + spec.kind + "'");
  if (spec.ladder.empty()) throw schema_error("ladder", "must be nonempty");
  for (std::size_t i = 0; i < spec.ladder.size(); ++i) {
    if (spec.ladder[i] < 1)
      throw schema_error("ladder", "rungs must be positive");
    if (i > 0 && spec.ladder[i] <= spec.ladder[i - 1])
      throw schema_error("ladder", "must be strictly increasing");
  }

  if (spec.kind == "helson-szego-ladder") {
    detail::require_params(spec, {"alpha"});
    const double alpha = detail::param_double(spec, "alpha", 0.0, true);
    if (!(alpha > -0.5 && alpha < 0.5) || alpha == 0.0)
      throw schema_error("alpha", "must lie in (-1/2, 1/2) and be nonzero");
    if (spec.ladder.back() > 512)
      throw schema_error("ladder", "family size above 512 unsupported");
    if (spec.ladder.front() < 4)
      throw schema_error("ladder", "family size below 4 unsupported");
  } else if (spec.kind == "example-noest") {
    detail::require_params(spec, {"power_steps"});
    const long p = detail::param_long(spec, "power_steps", 64);
    if (p < 8 || p > 4096)
      throw schema_error("power_steps", "must lie in [8, 4096]");
    if (spec.ladder.front() < 2)
      throw schema_error("ladder", "need at least 2 pairs per rung");
    if (spec.ladder.back() > 512)
      throw schema_error("ladder", "pair count above 512 unsupported");
  } else if (spec.kind == "model-space-pair") {
    detail::require_params(spec, {"atom_count", "mass_bias"});
    const long k = detail::param_long(spec, "atom_count", 0, true);
    if (k < 1 || k > 12)
      throw schema_error("atom_count", "must lie in [1, 12]");
    const double bias = detail::param_double(spec, "mass_bias", 0.05);
    if (!(bias >= 0.0 && bias <= 0.2))
      throw schema_error("mass_bias", "must lie in [0, 0.2]");
    if (spec.ladder.front() < 4 * k + 16)
      throw schema_error("ladder",
                         "rungs must be at least 4*atom_count + 16");
  } else if (spec.kind == "weighted-shift-suite") {
    detail::require_params(spec, {"family", "param"});
    const std::string family = detail::param_string(spec, "family", "");
    if (family != "exponential" && family != "stretched")
      throw schema_error("family", "must be 'exponential' or 'stretched'");
    const double p = detail::param_double(spec, "param", 0.0, true);
    if (family == "exponential" && !(p > 0.0))
      throw schema_error("param", "exponential rate must be positive");
    if (family == "stretched" && !(p > 0.0 && p < 1.0))
      throw schema_error("param", "stretched exponent must lie in (0, 1)");
    if (spec.ladder.front() < 8)
      throw schema_error("ladder", "window depth below 8 unsupported");
    if (spec.ladder.back() > 4096)
      throw schema_error("ladder", "window depth above 4096 unsupported");
  } else if (spec.kind == "block-gram") {
    detail::require_params(spec, {"c", "beta", "alpha"});
    const double c = detail::param_double(spec, "c", 0.5);
    if (!(c > 0.0 && c < 1.0)) throw schema_error("c", "must lie in (0, 1)");
    const double beta = detail::param_double(spec, "beta", 1.0);
    if (!(beta > 0.0)) throw schema_error("beta", "must be positive");
    const double alpha = detail::param_double(spec, "alpha", 0.5);
    if (!(alpha > 0.0 && alpha < 1.0))
      throw schema_error("alpha", "must lie in (0, 1)");
    if (spec.ladder.front() < 16)
      throw schema_error("ladder", "window depth below 16 unsupported");
    if (spec.ladder.back() > 4096)
      throw schema_error("ladder", "window depth above 4096 unsupported");
  } else if (spec.kind == "dirac-example") {
    detail::require_params(spec, {});
    if (spec.ladder.back() > 12)
      throw schema_error("ladder", "atom count above 12 unsupported");
  }
}

// ---------------------------------------------------------------------------
// Tolerance table
// ---------------------------------------------------------------------------

inline std::map<std::string, double> default_tolerances() {
  return {{"algebraic", defaults::algebraic},
          {"iterative", defaults::iterative},
          {"plateau_floor", 1.0e-6}};
}

inline void apply_tolerance_override(std::map<std::string, double>& table,
                                     const std::string& name, double value) {
  if (!table.count(name))
    throw schema_error("tol", "unknown tolerance '" + name + "'");
  if (!(value > 0.0))
    throw schema_error("tol", "tolerance '" + name + "' must be positive");
  table[name] = value;
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct EmittedFile {
  std::string path;  // file name relative to the output directory
  std::size_t bytes = 0;
  std::string fnv1a64;
};

struct RunManifest {
  std::string name;
  std::string kind;
  std::string tool_version;
  std::string spec_echo;
  std::map<std::string, double> tolerances;
  std::vector<long> ladder;
  std::vector<double> rung_wall_seconds;
  std::vector<std::pair<std::string, std::string>> verdicts;
  std::vector<EmittedFile> files;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["kind"] = kind;
    j["tool_version"] = tool_version;
    j["spec"] = spec_echo;
    nlohmann::ordered_json tj;
    for (const auto& [k, v] : tolerances) tj[k] = v;
    j["tolerances"] = tj;
    j["ladder"] = ladder;
    j["rung_wall_seconds"] = rung_wall_seconds;
    nlohmann::ordered_json vj;
    for (const auto& [k, v] : verdicts) vj[k] = v;
    j["verdicts"] = vj;
    nlohmann::ordered_json fj = nlohmann::ordered_json::array();
    for (const EmittedFile& f : files) {
      nlohmann::ordered_json e;
      e["path"] = f.path;
      e["bytes"] = f.bytes;
      e["fnv1a64"] = f.fnv1a64;
      fj.push_back(e);
    }
    j["files"] = fj;
    return j;
  }
};

// ---------------------------------------------------------------------------
// Pipelines (one per kind)
// ---------------------------------------------------------------------------

namespace detail {

// Per-rung result: CSV rows for the main table, optional extra named files
// (only the rung that owns them fills these), and verdict contributions.
struct RungOutput {
  std::vector<std::string> rows;
  std::vector<std::pair<std::string, std::string>> extra_files;
  std::vector<std::pair<std::string, std::string>> verdicts;
  std::vector<std::pair<long, double>> curve;  // (rung, headline scalar)
  double wall_seconds = 0.0;
};

struct PipelineResult {
  std::string main_header;
  std::string main_suffix;  // file name suffix for the main CSV
  std::vector<RungOutput> rungs;
};

inline RungOutput run_helson_rung(const ExperimentSpec& spec, long rung,
                                  const std::map<std::string, double>& tol) {
  const double alpha = param_double(spec, "alpha", 0.0, true);
  const int n = static_cast<int>(rung);
  RungOutput out;
  const std::vector<FourierVector> family = helson_szego_family(alpha, n);
  const BiorthogonalSystem sys = dual_family(family);
  double sup_p = 0.0;
  for (const auto& [p, nrm] : partial_sum_projections(sys, tol.at("iterative")))
    sup_p = std::max(sup_p, nrm);
  const RieszBounds rb = riesz_bounds(family);
  const EigenSystemSpec es =
      EigenSystemSpec::default_angles(n, FamilyKind::helson_szego);
  const MatrixOperator t = diagonal_operator(es, sys);
  const double tnorm = spectral_norm(t, tol.at("iterative"));
  const double bound = (2.0 * std::numbers::pi + 1.0) * sup_p;
  out.rows.push_back(csv_row({std::to_string(rung), format_double(sup_p),
                              format_double(rb.lower), format_double(rb.upper),
                              format_double(tnorm), format_double(bound)}));
  out.curve.emplace_back(rung, rb.lower);
  return out;
}

inline RungOutput run_noest_rung(const ExperimentSpec& spec, long rung,
                                 const std::map<std::string, double>& tol,
                                 bool owns_members) {
  const int n = static_cast<int>(rung);
  const long power_steps = param_long(spec, "power_steps", 64);
  RungOutput out;
  const std::vector<double> c = block_pair_default_c(n);
  const BlockPairSystem sys =
      block_pair_system(c, block_pair_default_angles(c, n), n);
  double qn_err = 0.0;
  for (int m = 0; m < 2 * n; ++m) {
    const double qn =
        sys.system.primal[m].norm() * sys.system.dual[m].norm();
    const double closed = std::sqrt(1.0 + c[m / 2] * c[m / 2]);
    qn_err = std::max(qn_err, std::abs(qn - closed));
  }
  // Off-diagonal block of T between the two coordinate halves.
  const IndexWindow w = sys.system.window();
  CMatrix offdiag = CMatrix::Zero(w.size() / 2, w.size() / 2 + w.size() % 2);
  for (int r = 0; r < w.size(); ++r)
    for (int col = 0; col < w.size(); ++col)
      if (r % 2 == 0 && col % 2 == 1)
        offdiag(r / 2, col / 2) = sys.T.entries(r, col);
  const Eigen::VectorXd sv = dense_singular_values(offdiag);
  const double block_norm = sv.size() ? sv(0) : 0.0;
  const double pb = power_bound(sys.T, static_cast<int>(power_steps),
                                tol.at("iterative"));
  double prod_err = 0.0;
  for (const DeltaQnEntry& e : check_delta_qn_product(sys.X, sys.system))
    prod_err = std::max(prod_err, std::abs(e.product - 1.0));
  out.rows.push_back(csv_row(
      {std::to_string(rung), format_double(qn_err), format_double(block_norm),
       format_double(sys.sup_c_lambda_gap), format_double(pb),
       format_double(prod_err)}));
  out.curve.emplace_back(rung, pb);
  if (owns_members) {
    std::string body = csv_row({"n", "c_n", "qn_norm", "closed_form",
                                "delta_n", "delta_times_qn"});
    const std::vector<DeltaQnEntry> entries =
        check_delta_qn_product(sys.X, sys.system);
    for (int m = 0; m < 2 * n; ++m) {
      const double qn =
          sys.system.primal[m].norm() * sys.system.dual[m].norm();
      body += csv_row({std::to_string(m), format_double(c[m / 2]),
                       format_double(qn),
                       format_double(std::sqrt(1.0 + c[m / 2] * c[m / 2])),
                       format_double(entries[m].delta),
                       format_double(entries[m].product)});
    }
    out.extra_files.emplace_back("members", body);
  }
  return out;
}

inline std::pair<ClarkMeasure, ClarkMeasure> model_pair_measures(long k,
                                                                 double bias) {
  std::vector<cplx> atoms;
  std::vector<double> mu, mv;
  for (long n = 0; n < k; ++n) {
    atoms.push_back(std::polar(
        1.0, 2.0 * std::numbers::pi * static_cast<double>(n) / k + 0.01 * n));
    mu.push_back(1.0 + bias * std::cos(1.7 * n));
    mv.push_back(1.0 - bias * std::cos(1.9 * n + 0.5));
  }
  return {make_clark_measure(atoms, mu), make_clark_measure(atoms, mv)};
}

inline RungOutput run_model_pair_rung(const ExperimentSpec& spec, long rung,
                                      const std::map<std::string, double>&,
                                      bool owns_diagnostics) {
  const long k = param_long(spec, "atom_count", 0, true);
  const double bias = param_double(spec, "mass_bias", 0.05);
  RungOutput out;
  const auto [su, sv] = model_pair_measures(k, bias);
  const RationalInner u = clark_inner(su);
  const RationalInner v = clark_inner(sv);
  MultiplierPhi0 phi = multiplier_phi0_raw(u, v);
  const TXYSystem sys = build_TXY(u, v, phi, static_cast<int>(rung));
  const TXYResiduals res = txy_interior_residuals(sys, phi);
  CMatrix diff = sys.T.entries;
  for (int j = 0; j < sys.T.domain.hi; ++j) diff(j + 1, j) -= 1.0;
  const Eigen::VectorXd sv2 = dense_singular_values(diff);
  out.rows.push_back(csv_row(
      {std::to_string(rung), format_double(res.ys_ty),
       format_double(res.xt_sx), format_double(res.xy_phi0),
       format_double(sys.c.real()), format_double(sys.c.imag()),
       format_double(sys.c_variance),
       format_double(sv2.size() > 1 ? sv2(1) : 0.0)}));
  out.curve.emplace_back(rung, res.ys_ty);
  if (owns_diagnostics) {
    multiplier_diagnostics(u, v, phi, 2 * (u.degree + v.degree) + 96);
    out.verdicts.emplace_back("multiplier_residual",
                              format_double(phi.multiplier_residual));
    out.verdicts.emplace_back("density_smallest_sv",
                              format_double(phi.density_smallest_sv));
    out.verdicts.emplace_back("density_rank",
                              std::to_string(phi.density_rank));
  }
  return out;
}

inline Weight make_weight(const std::string& family, double p, long m) {
  if (family == "exponential")
    return Weight::exponential(p, static_cast<int>(m));
  return Weight::stretched(p, static_cast<int>(m));
}

inline RungOutput run_shift_rung(const ExperimentSpec& spec, long rung,
                                 const std::map<std::string, double>& tol,
                                 bool owns_sums) {
  const std::string family = param_string(spec, "family", "");
  const double p = param_double(spec, "param", 0.0, true);
  RungOutput out;
  const Weight w = make_weight(family, p, rung);
  const MatrixOperator s = weighted_shift(w);
  const double nrm = spectral_norm(s, tol.at("iterative"));
  const double idx = invertibility_index(w);
  const double eig_res =
      inverse_compression_eigenvector(w, cplx(0.5), static_cast<int>(rung))
          .second;
  const IndexWindow win = w.window();
  const std::vector<FourierVector> probes{FourierVector::unit(win, 0),
                                          FourierVector::unit(win, -1)};
  const CClassTag cls =
      classify_c_class(s, probes, static_cast<int>(std::min(64l, rung)));
  out.rows.push_back(csv_row({std::to_string(rung), format_double(nrm),
                              format_double(idx), format_double(eig_res),
                              to_string(cls.forward), to_string(cls.backward)}));
  out.curve.emplace_back(rung, eig_res);
  if (owns_sums) {
    const std::vector<long> nl{10, 100, 1000, 10000};
    const WeightVerdict verdict = quasianalytic_classifier(w, nl);
    std::string body = csv_row({"N", "partial_sum"});
    for (std::size_t i = 0; i < nl.size(); ++i)
      body += csv_row({std::to_string(nl[i]),
                       format_double(verdict.quasi_partial_sums[i])});
    out.extra_files.emplace_back("partial-sums", body);
    out.verdicts.emplace_back("weight_trend", to_string(verdict.verdict));
    out.verdicts.emplace_back("invertibility_index", format_double(idx));
  }
  return out;
}

inline RungOutput run_block_gram_rung(const ExperimentSpec& spec, long rung,
                                      const std::map<std::string, double>& tol) {
  const double c = param_double(spec, "c", 0.5);
  const double beta = param_double(spec, "beta", 1.0);
  const double alpha = param_double(spec, "alpha", 0.5);
  RungOutput out;
  const Weight w0 = Weight::exponential(beta, static_cast<int>(rung));
  const Weight w = Weight::stretched(alpha, static_cast<int>(rung));
  const IndexWindow win = w0.window();
  const std::vector<FourierVector> probes{
      FourierVector::unit(win, 0), FourierVector::unit(win, -1),
      FourierVector::unit(win, 1), FourierVector::unit(win, 2)};
  const int max_power = static_cast<int>(std::min(64l, rung - 2));
  const BlockGramReport rep =
      block_gram_components(w0, w, c, probes, max_power, tol.at("iterative"));
  out.rows.push_back(csv_row({std::to_string(rung),
                              format_double(rep.residual_a),
                              format_double(rep.residual_b),
                              format_double(rep.x0_positive_block_smallest_sv)}));
  out.curve.emplace_back(rung, rep.residual_a);
  return out;
}

inline RungOutput run_dirac_rung(const ExperimentSpec&, long rung,
                                 const std::map<std::string, double>&,
                                 bool owns_atoms) {
  const long k = rung;
  RungOutput out;
  const auto h1 = [](cplx z) { return std::abs(cplx(1.0) - z); };
  std::vector<cplx> atoms;
  std::vector<double> masses;
  for (long n = 1; n <= k; ++n) {
    atoms.push_back(std::polar(1.0, std::numbers::pi / (2.0 * n)));
    masses.push_back(1.0 / (static_cast<double>(n) * n));
  }
  const auto [sv, su] = dirac_example_pair(h1, atoms, masses);
  double z_norm = 0.0, divergence = 0.0;
  for (std::size_t n = 0; n < sv.atoms.size(); ++n) {
    z_norm += sv.masses[n] * h1(sv.atoms[n]);
    divergence += sv.masses[n] / h1(sv.atoms[n]);
  }
  double phi_sup = 0.0;
  if (k >= 2) {
    const RationalInner u = clark_inner(su);
    const RationalInner v = clark_inner(sv);
    const MultiplierPhi0 phi = multiplier_phi0_raw(u, v);
    for (int j = 0; j < 256; ++j) {
      const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / 256.0);
      phi_sup = std::max(phi_sup, std::abs(phi.eval(z)));
    }
  } else {
    phi_sup = 1.0;  // single shared atom: u = v and phi0 = 1
  }
  const double lip_bound = 4.0 / z_norm;  // 2 Lip(h1) + sup h1 = 4, scaled
  out.rows.push_back(csv_row({std::to_string(rung), format_double(z_norm),
                              format_double(divergence),
                              format_double(phi_sup),
                              format_double(lip_bound)}));
  out.curve.emplace_back(rung, divergence);
  if (owns_atoms) {
    std::string body =
        csv_row({"n", "zeta_real", "zeta_imag", "mass_v", "mass_u", "h1"});
    for (std::size_t n = 0; n < sv.atoms.size(); ++n)
      body += csv_row({std::to_string(n + 1),
                       format_double(sv.atoms[n].real()),
                       format_double(sv.atoms[n].imag()),
                       format_double(sv.masses[n]),
                       format_double(su.masses[n]),
                       format_double(h1(sv.atoms[n]))});
    out.extra_files.emplace_back("atoms", body);
  }
  return out;
}

inline RungOutput run_one_rung(const ExperimentSpec& spec, long rung,
                               const std::map<std::string, double>& tol,
                               bool is_last) {
  const auto t0 = std::chrono::steady_clock::now();
  RungOutput out;
  if (spec.kind == "helson-szego-ladder")
    out = run_helson_rung(spec, rung, tol);
  else if (spec.kind == "example-noest")
    out = run_noest_rung(spec, rung, tol, is_last);
  else if (spec.kind == "model-space-pair")
    out = run_model_pair_rung(spec, rung, tol, is_last);
  else if (spec.kind == "weighted-shift-suite")
    out = run_shift_rung(spec, rung, tol, is_last);
  else if (spec.kind == "block-gram")
    out = run_block_gram_rung(spec, rung, tol);
  else
    out = run_dirac_rung(spec, rung, tol, is_last);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

inline std::string main_csv_header(const std::string& kind) {
  if (kind == "helson-szego-ladder")
    return csv_row({"N", "sup_partial_sum_norm", "riesz_lower", "riesz_upper",
                    "diag_op_norm", "abel_bound"});
  if (kind == "example-noest")
    return csv_row({"N", "max_qn_norm_error", "offdiag_block_norm",
                    "offdiag_bound", "power_bound", "max_delta_qn_deviation"});
  if (kind == "model-space-pair")
    return csv_row({"D", "ys_ty", "xt_sx", "xy_phi0", "c_real", "c_imag",
                    "c_variance", "t_minus_s_second_sv"});
  if (kind == "weighted-shift-suite")
    return csv_row({"M", "shift_norm", "invertibility_index",
                    "eig_residual_at_half", "forward_class", "backward_class"});
  if (kind == "block-gram")
    return csv_row({"M", "residual_a", "residual_b",
                    "x0_positive_block_smallest_sv"});
  return csv_row({"k", "normalizer_Z", "divergence_partial_sum", "phi0_sup",
                  "lipschitz_bound"});
}

inline std::string main_csv_suffix(const std::string& kind) {
  if (kind == "example-noest" || kind == "model-space-pair") return "rungs";
  if (kind == "weighted-shift-suite") return "suite";
  if (kind == "block-gram") return "gram";
  return "ladder";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

// Executes a validated experiment: rungs in a worker pool (jobs threads),
// files written by this single collector thread afterwards.  Returns the
// manifest; also writes <name>.manifest.json next to the data files.
inline RunManifest run_experiment(const ExperimentSpec& spec,
                                  const std::string& out_dir,
                                  const std::map<std::string, double>& tol,
                                  int jobs = 1) {
  validate_experiment(spec);
  if (jobs < 1) throw schema_error("jobs", "must be at least 1");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const std::size_t n_rungs = spec.ladder.size();
  std::vector<detail::RungOutput> results(n_rungs);
  std::vector<std::exception_ptr> failures(n_rungs);
  {
    std::atomic<std::size_t> next{0};
    const int workers =
        std::max(1, std::min<int>(jobs, static_cast<int>(n_rungs)));
    std::vector<std::thread> pool;
    const auto work = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_rungs) return;
        try {
          results[i] = detail::run_one_rung(spec, spec.ladder[i], tol,
                                            i + 1 == n_rungs);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    };
    if (workers == 1) {
      work();
    } else {
      for (int t = 0; t < workers; ++t) pool.emplace_back(work);
      for (std::thread& t : pool) t.join();
    }
  }
  for (std::size_t i = 0; i < n_rungs; ++i)
    if (failures[i]) std::rethrow_exception(failures[i]);

  RunManifest man;
  man.name = spec.name;
  man.kind = spec.kind;
  man.tool_version = kToolVersion;
  {
    std::ostringstream echo;
    echo << "name = " << spec.name << "; kind = " << spec.kind << "; ladder =";
    for (long r : spec.ladder) echo << ' ' << r;
    for (const auto& [k, v] : spec.params) echo << "; " << k << " = " << v;
    man.spec_echo = echo.str();
  }
  man.tolerances = tol;
  man.ladder = spec.ladder;
  for (const detail::RungOutput& r : results)
    man.rung_wall_seconds.push_back(r.wall_seconds);

  // Assemble files: the main CSV plus any rung-owned extras.
  std::vector<std::pair<std::string, std::string>> outputs;
  std::string main_body = detail::main_csv_header(spec.kind);
  for (const detail::RungOutput& r : results)
    for (const std::string& row : r.rows) main_body += row;
  outputs.emplace_back(
      spec.name + "." + detail::main_csv_suffix(spec.kind) + ".csv",
      std::move(main_body));
  for (const detail::RungOutput& r : results)
    for (const auto& [suffix, body] : r.extra_files)
      outputs.emplace_back(spec.name + "." + suffix + ".csv", body);
  for (const detail::RungOutput& r : results)
    for (const auto& kv : r.verdicts) man.verdicts.push_back(kv);

  // Ladder trend verdict over the headline scalar curve: log-log line fit
  // with the same reading as asymptote_verdict (flat above the plateau floor
  // means the quantity survives truncation growth; a well-fit decay means it
  // vanishes in the limit).
  std::vector<std::pair<long, double>> curve;
  for (const detail::RungOutput& r : results)
    for (const auto& p : r.curve) curve.push_back(p);
  bool positive = curve.size() >= 3;
  for (const auto& [n, v] : curve) positive = positive && v > 0.0;
  if (positive) {
    std::vector<double> log_n, log_v;
    double min_v = curve.front().second;
    for (const auto& [n, v] : curve) {
      log_n.push_back(std::log(static_cast<double>(n)));
      log_v.push_back(std::log(v));
      min_v = std::min(min_v, v);
    }
    const auto [slope, r2] = detail::line_fit(log_n, log_v);
    AsymptoteKind kind = AsymptoteKind::inconclusive;
    if (slope >= -0.05 && min_v > tol.at("plateau_floor"))
      kind = AsymptoteKind::lower_bound_holds;
    else if (slope < -0.05 && r2 >= 0.8)
      kind = AsymptoteKind::lower_bound_decays;
    man.verdicts.emplace_back("headline_trend", to_string(kind));
    man.verdicts.emplace_back("headline_trend_exponent", format_double(slope));
  }

  for (auto& [fname, body] : outputs) {
    const fs::path p = fs::path(out_dir) / fname;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw error("run_experiment: cannot write " + p.string());
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    f.close();
    man.files.push_back(EmittedFile{fname, body.size(), fnv1a64_hex(body)});
  }
  {
    const fs::path p = fs::path(out_dir) / (spec.name + ".manifest.json");
    std::ofstream f(p, std::ios::binary);
    if (!f) throw error("run_experiment: cannot write " + p.string());
    f << man.to_json().dump(2) << '\n';
  }
  return man;
}

// ---------------------------------------------------------------------------
// Built-in catalog
// ---------------------------------------------------------------------------

struct BuiltinExperiment {
  std::string name;
  std::string kind;
  std::string annotation;
  std::string spec_text;
};

inline const std::vector<BuiltinExperiment>& builtin_catalog() {
  static const std::vector<BuiltinExperiment> catalog{
      {"hs-plateau-neg", "helson-szego-ladder",
       "biorthogonal exponentials against the circle weight |1-z|^(-1/2): "
       "Riesz lower bounds plateau while upper bounds grow",
       "name = hs-plateau-neg\nkind = helson-szego-ladder\n"
       "ladder = 16, 32, 64, 128\n\n[params]\nalpha = -0.25\n"},
      {"hs-decay-pos", "helson-szego-ladder",
       "biorthogonal exponentials against the circle weight |1-z|^(1/2): "
       "Riesz lower bounds decay polynomially",
       "name = hs-decay-pos\nkind = helson-szego-ladder\n"
       "ladder = 16, 32, 64, 128\n\n[params]\nalpha = 0.25\n"},
      {"noest-growth", "example-noest",
       "paired-block eigenbasis with growing skew: uniform power bound with "
       "unbounded projection norms and exactly compensating delta schedule",
       "name = noest-growth\nkind = example-noest\n"
       "ladder = 8, 16, 32, 64\n\n[params]\npower_steps = 64\n"},
      {"model-pair-three", "model-space-pair",
       "two rational inner functions over three shared boundary atoms: "
       "intertwining triple, recovered unimodular constant, rank-one defect",
       "name = model-pair-three\nkind = model-space-pair\n"
       "ladder = 44, 60, 92\n\n[params]\natom_count = 3\nmass_bias = 0.05\n"},
      {"shift-stretched", "weighted-shift-suite",
       "bilateral shift with sub-exponential weight exp(sqrt(n)): "
       "contraction with forward-nonvanishing, backward-vanishing orbits",
       "name = shift-stretched\nkind = weighted-shift-suite\n"
       "ladder = 64, 96, 128\n\n[params]\nfamily = stretched\nparam = 0.5\n"},
      {"block-gram-default", "block-gram",
       "exponentially against sub-exponentially weighted pair: dyadic Cesaro "
       "Gram components of the compressed-embedding block construction",
       "name = block-gram-default\nkind = block-gram\n"
       "ladder = 72, 96, 128\n\n[params]\nc = 0.5\nbeta = 1.0\nalpha = 0.5\n"},
      {"dirac-accumulating", "dirac-example",
       "boundary atoms accumulating at 1 with inverse-square masses: "
       "reweighted measure pair, diverging selection sums, multiplier caps",
       "name = dirac-accumulating\nkind = dirac-example\n"
       "ladder = 2, 4, 6, 8\n"}};
  return catalog;
}

// Stable text listing of the catalog.
inline std::string catalog_listing() {
  std::string out;
  for (const BuiltinExperiment& b : builtin_catalog()) {
    out += b.name;
    out.append(b.name.size() < 24 ? 24 - b.name.size() : 1, ' ');
    out += b.kind;
    out.append(b.kind.size() < 24 ? 24 - b.kind.size() : 1, ' ');
    out += b.annotation;
    out += '\n';
  }
  return out;
}

}  // namespace asymlab
