#pragma once

// Command implementations behind the minlor executable. Each command reads a
// JSON job document, writes its outputs under the output directory and
// returns a process exit code:
//   0 success, 1 internal/runtime, 2 config/validation, 3 integrability gate,
//   4 residual threshold.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "minlor/canonical.hpp"
#include "minlor/error.hpp"
#include "minlor/frame_synthesizer.hpp"
#include "minlor/gallery.hpp"
#include "minlor/io.hpp"
#include "minlor/natural_system.hpp"
#include "minlor/null_curves.hpp"
#include "minlor/scalar_field.hpp"
#include "minlor/surface.hpp"

namespace minlor::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kInvalid = 2, kGate = 3, kResidual = 4 };

enum class Format { csv, json };

struct Options {
  std::string command;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = ".";
  std::optional<double> threshold;
  Format format = Format::csv;
  std::optional<double> fd_step;  // example only
};

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::io:
    case ErrorKind::blow_up:
    case ErrorKind::non_finite:
      return kInternal;
    default:
      return kInvalid;
  }
}

// ---------------------------------------------------------------------------
// Config access

inline json parse_config_text(const std::string& text, const std::string& origin = "config") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = io::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw Error(ErrorKind::config, origin + ": parse error at line " + std::to_string(line) + ", column " +
                                       std::to_string(col) + ": " + e.what());
  }
}

inline json load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::config, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

namespace detail {

inline const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::config, "missing required key '" + (where.empty() ? key : where + "." + key) + "'");
  }
  return j.at(key);
}

inline std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

inline double number(const json& j, const std::string& key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number()) throw Error(ErrorKind::config, "'" + join(where, key) + "' must be a number");
  return v.get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return number(j, key, where);
}

inline std::optional<double> optional_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return number(j, key, where);
}

inline std::size_t count(const json& j, const std::string& key, std::size_t fallback, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw Error(ErrorKind::config, "'" + join(where, key) + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

inline std::string text(const json& j, const std::string& key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_string()) throw Error(ErrorKind::config, "'" + join(where, key) + "' must be a string");
  return v.get<std::string>();
}

inline Sign sign(const json& j, const std::string& key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != -1)) {
    throw Error(ErrorKind::config, "'" + join(where, key) + "' must be 1 or -1");
  }
  return Sign(v.get<int>());
}

inline Rect rect(const json& j, const std::string& key, const std::string& where) {
  const json& r = require(j, key, where);
  const std::string w = join(where, key);
  const Rect out{number(r, "u_min", w), number(r, "u_max", w), number(r, "v_min", w), number(r, "v_max", w)};
  if (!(out.u_max > out.u_min) || !(out.v_max > out.v_min)) {
    throw Error(ErrorKind::config, "'" + w + "' must have positive area");
  }
  return out;
}

inline NeutralVector vector4(const json& j, const std::string& key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_array() || v.size() != 4 || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
    throw Error(ErrorKind::config, "'" + join(where, key) + "' must be an array of 4 numbers");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
}

inline std::map<std::string, double> params(const json& j, const std::string& where) {
  std::map<std::string, double> out;
  if (!j.is_object() || !j.contains("params")) return out;
  const json& p = j.at("params");
  if (!p.is_object()) throw Error(ErrorKind::config, "'" + join(where, "params") + "' must be an object");
  for (const auto& [k, v] : p.items()) {
    if (!v.is_number()) throw Error(ErrorKind::config, "'" + join(where, "params." + k) + "' must be a number");
    out[k] = v.get<double>();
  }
  return out;
}

// Expression errors are reported against the config key that held the text.
template <typename F>
auto with_key(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::syntax || e.kind() == ErrorKind::unknown_identifier) {
      throw Error(ErrorKind::config, "'" + key + "': " + e.what());
    }
    throw;
  }
}

inline ScalarField field(const json& section, const std::string& key, const Rect& domain, std::optional<double> step,
                         const std::map<std::string, double>& prm, const std::string& where) {
  const std::string src = text(section, key, where);
  return with_key(join(where, key), [&] { return ScalarField::parse(src, domain, step, prm); });
}

inline GridSpec grid_spec(const json& j, const std::string& key, const std::string& where) {
  const json& g = require(j, key, where);
  const std::string w = join(where, key);
  GridSpec s{number(g, "u0", w), number(g, "v0", w), number(g, "h", w), count(g, "nu", 1, w), count(g, "nv", 1, w)};
  if (!(s.h > 0.0)) throw Error(ErrorKind::config, "'" + w + ".h' must be positive");
  return s;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline ojson metadata(const std::string& command) {
  return ojson{{"command", command}, {"generated_at", utc_timestamp()}};
}

class Output {
 public:
  Output(const std::filesystem::path& dir, Format format) : dir_(dir), format_(format) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) {
      throw Error(ErrorKind::io, "cannot create output directory " + dir_.string());
    }
  }

  /// Table as CSV, or embedded into `summary` under "data" in json format.
  void table(const std::string& stem, const std::vector<std::string>& header,
             const std::vector<std::vector<double>>& rows, ojson& summary) const {
    if (format_ == Format::csv) {
      io::CsvWriter w(header);
      for (const auto& r : rows) w.add_row(r);
      io::write_file(dir_ / (stem + ".csv"), w.str());
      summary["data_file"] = stem + ".csv";
    } else {
      ojson data{{"columns", header}, {"rows", ojson::array()}};
      for (const auto& r : rows) {
        ojson row = ojson::array();
        for (double x : r) row.push_back(io::real(x));
        data["rows"].push_back(row);
      }
      summary["data"] = std::move(data);
    }
  }

  void summary(const std::string& stem, const ojson& doc) const {
    io::write_file(dir_ / (stem + ".json"), doc.dump(2) + "\n");
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  Format format_;
};

// analyze ------------------------------------------------------------------

inline SurfaceChart surface_from_config(const json& cfg) {
  const json& s = require(cfg, "surface", "");
  if (s.contains("builtin")) {
    const std::string name = text(s, "builtin", "surface");
    if (name == "example_uv") return gallery::chart_uv();
    if (name == "example_ts") return gallery::chart_ts();
    throw Error(ErrorKind::config, "unknown 'surface.builtin' value '" + name + "'");
  }
  const json& comps = require(s, "components", "surface");
  if (!comps.is_array() || comps.size() != 4 ||
      !std::all_of(comps.begin(), comps.end(), [](const json& c) { return c.is_string(); })) {
    throw Error(ErrorKind::config, "'surface.components' must be an array of 4 expression strings");
  }
  const Rect domain = rect(s, "domain", "surface");
  const auto step = optional_number(s, "fd_step", "surface");
  const auto prm = params(s, "surface");
  std::array<std::string, 4> src;
  for (std::size_t k = 0; k < 4; ++k) {
    src[k] = comps[k].get<std::string>();
    with_key("surface.components[" + std::to_string(k) + "]", [&] { return expr::parse_bound(src[k], prm); });
  }
  return SurfaceChart::from_expressions(src, domain, step, prm);
}

}  // namespace detail

inline int cmd_analyze(const json& cfg, const Options& opt, std::ostream& log) {
  using namespace detail;
  const SurfaceChart chart = surface_from_config(cfg);
  const json samples_cfg = cfg.contains("samples") ? cfg.at("samples") : json::object();
  const std::size_t nu = count(samples_cfg, "nu", 11, "samples"), nv = count(samples_cfg, "nv", 11, "samples");
  const double margin = number_or(samples_cfg, "margin", 0.05 * chart.domain().min_extent(), "samples");
  const json tol_cfg = cfg.contains("tolerances") ? cfg.at("tolerances") : json::object();
  const double tol_deg = number_or(tol_cfg, "degenerate", kDefaultDegenerateTol, "tolerances");
  const double tol_can = number_or(tol_cfg, "canonical", 1e-6, "tolerances");
  AnalyzerOptions aopt;
  aopt.isothermal_tol = number_or(tol_cfg, "isothermal", aopt.isothermal_tol, "tolerances");
  aopt.normal_tol = number_or(tol_cfg, "normal", aopt.normal_tol, "tolerances");
  const std::vector<UV> pts = uniform_samples(chart.domain(), nu, nv, margin);

  const Output out(opt.out, opt.format);
  std::vector<std::vector<double>> rows;
  std::map<std::string, std::size_t> histogram{
      {"general_type", 0}, {"super_conformal", 0}, {"third_class", 0}, {"degenerate_point", 0}};
  std::vector<GeometricInvariants> invs;
  std::vector<double> fs;
  double min_res = 0.0;
  const std::size_t centre = (nu / 2) * nv + nv / 2;
  ojson centre_report;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const UV p = pts[k];
    const FundamentalData fd = second_form(chart, p.u, p.v, std::nullopt, aopt);
    const CurvatureReport cr = curvature_report(fd, tol_deg);
    min_res = std::max(min_res, euclid_norm(cr.H_vector));
    histogram[std::string(to_string(cr.surface_class))]++;
    double mu = std::nan(""), nuv = std::nan(""), eps = 0.0;
    if (cr.surface_class == SurfaceClass::general_type) {
      try {
        const GeometricInvariants inv = extract_frame(fd);
        mu = inv.mu;
        nuv = inv.nu;
        eps = inv.epsilon.real();
        invs.push_back(inv);
        fs.push_back(fd.f);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::not_general_type && e.kind() != ErrorKind::lightlike_second_form) throw;
      }
    }
    rows.push_back({p.u, p.v, fd.E, fd.F, fd.G, cr.K, cr.kappa, mu, nuv, eps,
                    static_cast<double>(static_cast<int>(cr.surface_class))});
    if (k == centre) {
      centre_report = {{"u", p.u}, {"v", p.v}, {"K", cr.K}, {"kappa", cr.kappa}, {"class", to_string(cr.surface_class)},
                       {"mu", io::real(mu)}, {"nu", io::real(nuv)}, {"epsilon", eps}};
    }
  }

  ojson summary{{"metadata", metadata("analyze")}, {"surface", chart.description()}, {"points", pts.size()}};
  ojson hist;
  for (const auto& [k, v] : histogram) hist[k] = v;
  summary["class_histogram"] = hist;
  summary["class_codes"] = {"general_type", "super_conformal", "third_class", "degenerate_point"};
  summary["minimality_residual"] = min_res;
  summary["centre"] = centre_report;
  if (!invs.empty()) {
    const CanonicalCheck cc = check_canonical(invs, fs, tol_can);
    summary["canonical"] = {{"is_canonical", cc.is_canonical}, {"constant_c", cc.constant_c}, {"defect", cc.defect},
                            {"points", invs.size()}};
  } else {
    summary["canonical"] = nullptr;
  }
  out.table("analyze", {"u", "v", "E", "F", "G", "K", "kappa", "mu", "nu", "epsilon", "class"}, rows, summary);
  out.summary("analyze_summary", summary);
  log << "analyze: " << pts.size() << " points, minimality residual " << io::format_real(min_res) << "\n";
  return kOk;
}

// synthesize ---------------------------------------------------------------

namespace detail {

struct FieldPair {
  ScalarField a;
  ScalarField b;
  std::string a_src, b_src;
};

inline FieldPair field_pair(const json& cfg, const std::string& ka, const std::string& kb) {
  const json& f = require(cfg, "fields", "");
  const Rect domain = rect(f, "domain", "fields");
  const auto step = optional_number(f, "fd_step", "fields");
  const auto prm = params(f, "fields");
  return {field(f, ka, domain, step, prm, "fields"), field(f, kb, domain, step, prm, "fields"), text(f, ka, "fields"),
          text(f, kb, "fields")};
}

inline FrameState frame_from_config(const json& cfg) {
  const json& f = require(cfg, "initial_frame", "");
  return {vector4(f, "x", "initial_frame"), vector4(f, "y", "initial_frame"), vector4(f, "n1", "initial_frame"),
          vector4(f, "n2", "initial_frame"), {}};
}

inline std::vector<UV> gate_samples(const GridSpec& g, std::size_t n) {
  const Rect r{g.u0, std::max(g.u_last(), g.u0 + 1e-9), g.v0, std::max(g.v_last(), g.v0 + 1e-9)};
  return uniform_samples(r, g.nu > 1 ? n : 1, g.nv > 1 ? n : 1);
}

inline ojson defects_json(const SynthesizedSurface& s) {
  return {{"integrability_defect", io::real(s.integrability_defect)},
          {"consistency_defect", io::real(s.consistency_defect)},
          {"orthonormality_drift", io::real(s.orthonormality_drift)}};
}

inline ojson validation_json(const SynthesisValidation& v) {
  return {{"mu_error", v.mu_error},
          {"nu_error", v.nu_error},
          {"minimality_residual", v.minimality_residual},
          {"canonical_defect", v.canonical_defect},
          {"curvature_error", v.curvature_error},
          {"epsilon_consistent", v.epsilon_consistent},
          {"invariant_mismatch", v.invariant_mismatch},
          {"points", v.points},
          {"passed", v.passed}};
}

inline std::vector<std::vector<double>> mesh_rows(const SynthesizedSurface& s) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < s.grid.nu; ++i)
    for (std::size_t j = 0; j < s.grid.nv; ++j) {
      const NeutralVector& p = s.positions.at(i, j);
      rows.push_back({s.grid.u(i), s.grid.v(j), p[0], p[1], p[2], p[3]});
    }
  return rows;
}

}  // namespace detail

inline int cmd_synthesize(const json& cfg, const Options& opt, std::ostream& log) {
  using namespace detail;
  const FieldPair f = field_pair(cfg, "mu", "nu");
  const Sign eps = sign(cfg, "epsilon", "");
  FrameState frame0 = frame_from_config(cfg);
  const NeutralVector p0 = vector4(cfg, "initial_point", "");
  const GridSpec g = grid_spec(cfg, "grid", "");
  const json gate_cfg = cfg.contains("gate") ? cfg.at("gate") : json::object();
  const double gate_threshold = opt.threshold.value_or(number_or(gate_cfg, "threshold", kValidationGate, "gate"));
  const std::size_t gate_n = count(gate_cfg, "samples", 5, "gate");
  const json val_cfg = cfg.contains("validation") ? cfg.at("validation") : json::object();
  const double val_tol = number_or(val_cfg, "tolerance", 1e-4, "validation");
  const std::size_t stride = count(val_cfg, "stride", 1, "validation");
  frame0.at_point = {g.u0, g.v0};

  const Output out(opt.out, opt.format);
  ojson summary{{"metadata", metadata("synthesize")},
                {"fields", {{"mu", f.a_src}, {"nu", f.b_src}, {"epsilon", eps.value()}}},
                {"grid", {{"u0", g.u0}, {"v0", g.v0}, {"h", g.h}, {"nu", g.nu}, {"nv", g.nv}}}};

  const double gate = integrability_defect(f.a, f.b, eps, gate_samples(g, gate_n));
  summary["gate"] = {{"defect", gate}, {"threshold", gate_threshold}, {"passed", gate <= gate_threshold}};
  if (!(gate <= gate_threshold)) {
    out.summary("synthesis", summary);
    log << "synthesize: integrability gate rejected the fields (defect " << io::format_real(gate) << ")\n";
    return kGate;
  }

  const SynthesizedSurface s = integrate_positions(integrate_frames(f.a, f.b, eps, frame0, g), p0);
  summary["defects"] = defects_json(s);
  int code = kOk;
  if (g.nu >= 5 && g.nv >= 5) {
    const SynthesisValidation v = validate_synthesis(s, f.a, f.b, eps, val_tol, stride);
    summary["validation"] = validation_json(v);
    if (!v.passed) code = kInvalid;
  } else {
    summary["validation"] = nullptr;
  }
  out.table("mesh", {"u", "v", "x1", "x2", "x3", "x4"}, mesh_rows(s), summary);
  out.summary("synthesis", summary);
  log << "synthesize: " << g.size() << " nodes, drift " << io::format_real(s.orthonormality_drift) << "\n";
  return code;
}

// verify -------------------------------------------------------------------

inline int cmd_verify(const json& cfg, const Options& opt, std::ostream& log) {
  using namespace detail;
  const std::string system = cfg.contains("system") ? text(cfg, "system", "") : "mu_nu";
  if (system != "mu_nu" && system != "K_kappa") {
    throw Error(ErrorKind::config, "'system' must be \"mu_nu\" or \"K_kappa\"");
  }
  const Sign eps = sign(cfg, "epsilon", "");
  const json& gcfg = require(cfg, "grid", "");
  const Rect gdom = rect(gcfg, "domain", "grid");
  const std::vector<UV> pts = uniform_samples(gdom, count(gcfg, "nu", 15, "grid"), count(gcfg, "nv", 15, "grid"),
                                              number_or(gcfg, "margin", 0.0, "grid"));
  const double threshold = opt.threshold.value_or(number_or(cfg, "threshold", 1e-4, ""));
  const json& fcfg = require(cfg, "fields", "");

  ResidualReport rep;
  ojson fields;
  if (system == "mu_nu") {
    const FieldPair f = field_pair(cfg, "mu", "nu");
    fields = {{"mu", f.a_src}, {"nu", f.b_src}};
    rep = residual_mu_nu(f.a, f.b, eps, pts);
  } else if (fcfg.contains("K")) {
    const FieldPair f = field_pair(cfg, "K", "kappa");
    fields = {{"K", f.a_src}, {"kappa", f.b_src}};
    rep = residual_K_kappa(f.a, f.b, eps, pts);
  } else {
    // (K, kappa) converted from (mu, nu) pointwise.
    const FieldPair f = field_pair(cfg, "mu", "nu");
    fields = {{"mu", f.a_src}, {"nu", f.b_src}, {"converted", true}};
    const double e = eps.real();
    const ScalarField K = combine("K", [e](double m, double n) { return -e * (m * m + n * n); }, f.a, f.b);
    const ScalarField kappa = combine("kappa", [](double m, double n) { return -2.0 * m * n; }, f.a, f.b);
    rep = residual_K_kappa(K, kappa, eps, pts);
  }

  const Output out(opt.out, opt.format);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < pts.size(); ++k) rows.push_back({pts[k].u, pts[k].v, rep.r1[k], rep.r2[k]});
  const bool passed = rep.max() <= threshold;
  ojson summary{{"metadata", metadata("verify")}, {"system", system},      {"fields", fields},
                {"epsilon", eps.value()},         {"fd_step", rep.fd_step}, {"points", pts.size()},
                {"r1_max", rep.r1_max},           {"r2_max", rep.r2_max},   {"threshold", threshold},
                {"passed", passed}};
  if (!rep.signs.empty()) {
    std::map<std::string, std::size_t> patterns;
    for (const auto& s : rep.signs) patterns[std::string(s.sum > 0 ? "+" : "-") + (s.diff > 0 ? "+" : "-")]++;
    ojson p;
    for (const auto& [k, v] : patterns) p[k] = v;
    summary["sign_patterns"] = p;
  }
  out.table("residuals", {"u", "v", "r1", "r2"}, rows, summary);
  out.summary("residuals_summary", summary);
  log << "verify: r1_max " << io::format_real(rep.r1_max) << ", r2_max " << io::format_real(rep.r2_max) << "\n";
  return passed ? kOk : kResidual;
}

// null-curve ---------------------------------------------------------------

namespace detail {

inline Curve curve_from_config(const json& cfg, const std::string& key, const std::map<std::string, double>& prm) {
  const json& c = require(cfg, key, "");
  const json& comps = require(c, "components", key);
  if (!comps.is_array() || comps.size() != 4 ||
      !std::all_of(comps.begin(), comps.end(), [](const json& x) { return x.is_string(); })) {
    throw Error(ErrorKind::config, "'" + key + ".components' must be an array of 4 expression strings");
  }
  const json& iv = require(c, "interval", key);
  if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number() ||
      !(iv[1].get<double>() > iv[0].get<double>())) {
    throw Error(ErrorKind::config, "'" + key + ".interval' must be [lo, hi] with lo < hi");
  }
  std::array<std::string, 4> src;
  for (std::size_t k = 0; k < 4; ++k) src[k] = comps[k].get<std::string>();
  return with_key(key + ".components", [&] {
    return Curve::from_expressions(src, Interval{iv[0].get<double>(), iv[1].get<double>()}, prm);
  });
}

}  // namespace detail

inline int cmd_null_curve(const json& cfg, const Options& opt, std::ostream& log) {
  using namespace detail;
  const auto prm = params(cfg, "");
  const NullCurvePair pair{curve_from_config(cfg, "alpha", prm), curve_from_config(cfg, "beta", prm)};
  const std::size_t n = count(cfg, "samples", 21, "");
  const json gcfg = cfg.contains("grid") ? cfg.at("grid") : json::object();
  const std::size_t gu = count(gcfg, "nu", 11, "grid"), gv = count(gcfg, "nv", 11, "grid");
  const double threshold = opt.threshold.value_or(number_or(cfg, "threshold", 1e-8, ""));

  const Output out(opt.out, opt.format);
  const PairReport rep = validate_pair(pair, n);
  ojson summary{{"metadata", metadata("null-curve")},
                {"pair",
                 {{"alpha_null", rep.alpha_null},
                  {"beta_null", rep.beta_null},
                  {"transversality", io::real(rep.transversality)},
                  {"passed", rep.passed}}}};
  if (!rep.passed) {
    out.summary("null_curve", summary);
    log << "null-curve: pair rejected\n";
    return kInvalid;
  }
  const SurfaceChart chart = surface_from_pair(pair, n);
  const std::vector<UV> pts = uniform_samples(chart.domain(), gu, gv);
  const double res = minimality_residual(chart, pts);
  std::vector<std::vector<double>> rows;
  for (const UV& p : pts) {
    const NeutralVector z = chart.position(p.u, p.v);
    rows.push_back({p.u, p.v, z[0], z[1], z[2], z[3]});
  }
  const Rect& d = chart.domain();
  summary["chart"] = {{"domain", {{"u_min", d.u_min}, {"u_max", d.u_max}, {"v_min", d.v_min}, {"v_max", d.v_max}}},
                      {"minimality_residual", res},
                      {"threshold", threshold},
                      {"passed", res <= threshold}};
  out.table("null_curve_mesh", {"u", "v", "x1", "x2", "x3", "x4"}, rows, summary);
  out.summary("null_curve", summary);
  log << "null-curve: minimality residual " << io::format_real(res) << "\n";
  return res <= threshold ? kOk : kResidual;
}

// example ------------------------------------------------------------------

struct ExampleThresholds {
  double residual = 1e-4;
  double gate = 1e-4;
  double oracle = 1e-6;
  double drift = 1e-8;
  double invariants = 1e-4;
  double canonical = 1e-6;
  double point = 1e-5;
  double fd_step = 1e-4;  // field step when none is injected
};

inline int cmd_example(const Options& opt, std::ostream& log) {
  using namespace detail;
  const ExampleThresholds th;
  const double gate_threshold = opt.threshold.value_or(th.gate);
  const Output out(opt.out, Format::json);
  const gallery::ExampleBundle b = gallery::example(opt.fd_step.value_or(th.fd_step));
  ojson verdict{{"metadata", metadata("example")}, {"fd_step", b.mu.fd_step()}};
  int code = kOk;
  auto fail = [&code](int c) {
    if (code == kOk) code = c;
  };

  // verify
  const std::vector<UV> grid = gallery::guarded_grid(15, 15);
  const ResidualReport r = residual_mu_nu(b.mu, b.nu, b.epsilon, grid);
  const ResidualReport rk = residual_K_kappa(b.K(), b.kappa(), b.epsilon, grid);
  const bool verify_ok = r.max() <= th.residual && rk.max() <= th.residual;
  verdict["verify"] = {{"mu_nu", {{"r1_max", r.r1_max}, {"r2_max", r.r2_max}}},
                       {"K_kappa", {{"r1_max", rk.r1_max}, {"r2_max", rk.r2_max}}},
                       {"threshold", th.residual},
                       {"passed", verify_ok}};
  if (!verify_ok) fail(kResidual);

  // gate
  const GridSpec g = gallery::synthesis_grid();
  const double gate = integrability_defect(b.mu, b.nu, b.epsilon, gate_samples(g, 5));
  const bool gate_ok = gate <= gate_threshold;
  verdict["gate"] = {{"defect", gate}, {"threshold", gate_threshold}, {"passed", gate_ok}};
  if (!gate_ok) fail(kGate);

  // synthesize + oracle
  if (gate_ok) {
    const SynthesizedSurface s =
        integrate_positions(integrate_frames(b.mu, b.nu, b.epsilon, gallery::initial_frame(), g),
                            gallery::initial_point());
    const double oracle = gallery::oracle_compare(s, false);
    const SynthesisValidation v = validate_synthesis(s, b.mu, b.nu, b.epsilon, th.invariants);
    const bool ok = oracle <= th.oracle && s.orthonormality_drift <= th.drift && v.mu_error <= th.invariants &&
                    v.nu_error <= th.invariants;
    verdict["synthesis"] = {{"defects", defects_json(s)},
                            {"oracle_discrepancy", oracle},
                            {"frame_discrepancy", gallery::frame_compare(s)},
                            {"validation", validation_json(v)},
                            {"passed", ok}};
    if (!ok) fail(kInvalid);
  } else {
    verdict["synthesis"] = "skipped";
  }

  // analyze the closed form
  const SurfaceChart uv = gallery::chart_uv(), ts = gallery::chart_ts();
  const std::vector<UV> su = uniform_samples(uv.domain(), 7, 7, 0.15 * gallery::kScale);
  const std::vector<UV> st = uniform_samples(ts.domain(), 7, 7, 0.15);
  const CanonicalCheck cu = check_canonical(uv, su, th.canonical);
  const CanonicalCheck ct = check_canonical(ts, st, th.canonical);
  const FundamentalData fd = second_form(uv, gallery::u0(), 0.0);
  const CurvatureReport cr = curvature_report(fd);
  const GeometricInvariants inv = extract_frame(fd);
  const bool analyze_ok = cu.is_canonical && std::abs(cu.constant_c - 1.0) <= th.canonical &&
                          std::abs(ct.constant_c - gallery::kScale) <= th.canonical &&
                          std::abs(cr.K - 5.0) <= th.point && std::abs(cr.kappa + 4.0) <= th.point &&
                          std::abs(inv.mu - 2.0) <= th.point && std::abs(inv.nu - 1.0) <= th.point;
  verdict["analyze"] = {{"canonical_uv", {{"is_canonical", cu.is_canonical}, {"constant_c", cu.constant_c}}},
                        {"canonical_ts", {{"is_canonical", ct.is_canonical}, {"constant_c", ct.constant_c}}},
                        {"centre", {{"K", cr.K}, {"kappa", cr.kappa}, {"mu", inv.mu}, {"nu", inv.nu},
                                    {"epsilon", inv.epsilon.value()}}},
                        {"passed", analyze_ok}};
  if (!analyze_ok) fail(kInvalid);

  verdict["exit_code"] = code;
  verdict["passed"] = code == kOk;
  out.summary("example_verdict", verdict);
  log << "example: " << (code == kOk ? "all thresholds passed" : "thresholds failed, exit " + std::to_string(code))
      << "\n";
  return code;
}

// dispatch -----------------------------------------------------------------

/// Runs one command and maps failures onto exit codes; messages go to `err`.
inline int run(const Options& opt, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  try {
    if (opt.command == "example") return cmd_example(opt, log);
    if (!opt.config) throw Error(ErrorKind::config, "--config is required for '" + opt.command + "'");
    const json cfg = load_config(*opt.config);
    if (!cfg.is_object()) throw Error(ErrorKind::config, "config document must be a JSON object");
    if (opt.command == "analyze") return cmd_analyze(cfg, opt, log);
    if (opt.command == "synthesize") return cmd_synthesize(cfg, opt, log);
    if (opt.command == "verify") return cmd_verify(cfg, opt, log);
    if (opt.command == "null-curve") return cmd_null_curve(cfg, opt, log);
    throw Error(ErrorKind::config, "unknown command '" + opt.command + "'");
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace minlor::cli
