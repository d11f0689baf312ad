#pragma once

// Scenario configuration and the end-to-end runs behind the CLI subcommands.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "resctl/archive.hpp"
#include "resctl/diagnostics.hpp"
#include "resctl/io.hpp"
#include "resctl/simplify.hpp"

namespace resctl {

inline constexpr const char* kVersion = "1.0.0";

struct TimeGrid {
  double t_min = 0.0;
  double t_max = 0.0;
  Eigen::Index steps = 0;

  RVector values() const { return RVector::LinSpaced(steps, t_min, t_max); }
};

/// Parsed scenario document. Defaults follow the reference setup: window
/// [4.68, 4.96] eV, N_A = 128, T1 = 150 fs, T2 = 250 fs, alpha = 21 fs.
struct ScenarioConfig {
  nlohmann::json document;  // effective document after CLI overrides
  std::filesystem::path base_dir;

  std::optional<GeneratorParams> generator;  // set unless an archive is given
  std::string archive_path;
  std::uint64_t seed = 1;

  EnergyWindow window{4.68, 4.96};
  Eigen::Index N_A = 128;
  double T1 = 150.0;
  double T2 = 250.0;
  double alpha = 21.0;
  TimeGrid time;
  std::string out_dir = "out";
  std::string mode = "optimize";
  cplx scale = 1.0;
  double cond_cap = kDefaultConditionCap;
  unsigned threads = 1;

  std::vector<double> unc_alpha{0.1, 20.0};
  std::vector<double> unc_center_eV;  // empty: window centre
  double unc_amplitude = 1.0;

  std::vector<EnergyWindow> diag_windows;  // empty: the scenario window
  Eigen::Index N_S = 0;                    // 0: N_A / 2
  std::vector<Eigen::Index> N_R;           // empty: N_A, 3N_A/4, N_A/2, N_A/4
};

namespace detail {

using json = nlohmann::json;

inline double num(const json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError("expected a number", field);
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError("must be finite", field);
  return v;
}

inline Eigen::Index count(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ValidationError("expected an integer", field);
  return j.get<Eigen::Index>();
}

inline std::vector<double> num_list(const json& j, const std::string& field, std::size_t n_if_scalar = 0) {
  std::vector<double> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], field + "[" + std::to_string(i) + "]"));
  } else if (n_if_scalar > 0) {
    out.assign(n_if_scalar, num(j, field));
  } else {
    throw ValidationError("expected an array", field);
  }
  return out;
}

inline EnergyWindow window_of(const json& j, const std::string& field) {
  const auto v = num_list(j, field);
  if (v.size() != 2) throw ValidationError("expected [E_L, E_H]", field);
  if (!(v[1] > v[0])) throw ValidationError("E_H must exceed E_L", field);
  return {v[0], v[1]};
}

inline void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError("expected an object", where.empty() ? "config" : where);
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ValidationError("unknown field", where.empty() ? k : where + "." + k);
  }
}

inline GeneratorParams parse_generator(const json& g, const ScenarioConfig& cfg, Eigen::Index n_A) {
  only_keys(g, {"n_alpha", "window_eV", "n_q", "centers_eV", "widths_eV", "width_factor", "dipoles", "tail_cutoff_widths", "E_g_eV"},
            "system.generator");
  GeneratorParams p;
  p.seed = cfg.seed;
  p.window = g.contains("window_eV") ? window_of(g["window_eV"], "system.generator.window_eV") : cfg.window;
  p.n_alpha = g.contains("n_alpha") ? count(g["n_alpha"], "system.generator.n_alpha") : 8 * n_A;
  if (g.contains("centers_eV")) {
    p.centers = num_list(g["centers_eV"], "system.generator.centers_eV");
  } else {
    const auto n_q = g.contains("n_q") ? count(g["n_q"], "system.generator.n_q") : Eigen::Index{16};
    if (n_q < 1) throw ValidationError("must be >= 1", "system.generator.n_q");
    const double sp = p.window.width() / static_cast<double>(n_q);
    for (Eigen::Index k = 0; k < n_q; ++k) p.centers.push_back(p.window.lo + (static_cast<double>(k) + 0.5) * sp);
  }
  const auto n_q = p.centers.size();
  if (g.contains("widths_eV")) {
    p.widths = num_list(g["widths_eV"], "system.generator.widths_eV", n_q);
  } else {
    const double wf = g.contains("width_factor") ? num(g["width_factor"], "system.generator.width_factor") : 3.0;
    const double sp = p.window.width() / static_cast<double>(std::max<std::size_t>(n_q, 1));
    p.widths.assign(n_q, wf * sp);
  }
  p.dipoles = g.contains("dipoles") ? num_list(g["dipoles"], "system.generator.dipoles", n_q) : std::vector<double>(n_q, 1.0);
  if (g.contains("tail_cutoff_widths")) p.tail_cutoff = num(g["tail_cutoff_widths"], "system.generator.tail_cutoff_widths");
  if (g.contains("E_g_eV")) p.E_g = num(g["E_g_eV"], "system.generator.E_g_eV");
  return p;
}

}  // namespace detail

/// Parses a scenario document. `mode` (the subcommand) overrides the document's mode field.
inline ScenarioConfig parse_config(const nlohmann::json& doc, const std::string& mode, std::filesystem::path base_dir = {}) {
  using detail::count;
  using detail::num;
  detail::only_keys(doc,
                    {"description", "system", "seed", "window_eV", "N_A", "T1_fs", "T2_fs", "alpha_fs", "time_grid", "out_dir",
                     "mode", "scale", "cond_cap", "threads", "uncontrolled", "diagnose", "simplify"},
                    "");
  ScenarioConfig c;
  c.document = doc;
  c.base_dir = std::move(base_dir);
  c.mode = mode;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ValidationError("expected a non-negative integer", "seed");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("window_eV")) c.window = detail::window_of(doc["window_eV"], "window_eV");
  if (doc.contains("N_A")) c.N_A = count(doc["N_A"], "N_A");
  if (doc.contains("T1_fs")) c.T1 = num(doc["T1_fs"], "T1_fs");
  if (doc.contains("T2_fs")) c.T2 = num(doc["T2_fs"], "T2_fs");
  if (doc.contains("alpha_fs")) c.alpha = num(doc["alpha_fs"], "alpha_fs");
  if (doc.contains("out_dir")) {
    if (!doc["out_dir"].is_string()) throw ValidationError("expected a string", "out_dir");
    c.out_dir = doc["out_dir"].get<std::string>();
  }
  if (doc.contains("scale")) {
    const auto& s = doc["scale"];
    c.scale = s.is_array() && s.size() == 2 ? cplx{num(s[0], "scale[0]"), num(s[1], "scale[1]")} : cplx{num(s, "scale"), 0.0};
  }
  if (doc.contains("cond_cap")) c.cond_cap = num(doc["cond_cap"], "cond_cap");
  if (doc.contains("threads")) {
    const auto t = count(doc["threads"], "threads");
    if (t < 1 || t > 256) throw ValidationError("must be in [1, 256]", "threads");
    c.threads = static_cast<unsigned>(t);
  }
  if (doc.contains("uncontrolled")) {
    const auto& u = doc["uncontrolled"];
    detail::only_keys(u, {"alpha_fs", "center_eV", "amplitude"}, "uncontrolled");
    if (u.contains("alpha_fs")) c.unc_alpha = detail::num_list(u["alpha_fs"], "uncontrolled.alpha_fs", 1);
    if (u.contains("center_eV")) c.unc_center_eV = detail::num_list(u["center_eV"], "uncontrolled.center_eV", 1);
    if (u.contains("amplitude")) c.unc_amplitude = num(u["amplitude"], "uncontrolled.amplitude");
  }
  if (doc.contains("diagnose")) {
    const auto& d = doc["diagnose"];
    detail::only_keys(d, {"windows_eV"}, "diagnose");
    if (d.contains("windows_eV")) {
      if (!d["windows_eV"].is_array()) throw ValidationError("expected a list of windows", "diagnose.windows_eV");
      for (std::size_t i = 0; i < d["windows_eV"].size(); ++i) {
        c.diag_windows.push_back(detail::window_of(d["windows_eV"][i], "diagnose.windows_eV[" + std::to_string(i) + "]"));
      }
    }
  }
  if (doc.contains("simplify")) {
    const auto& s = doc["simplify"];
    detail::only_keys(s, {"N_S", "N_R"}, "simplify");
    if (s.contains("N_S")) c.N_S = count(s["N_S"], "simplify.N_S");
    if (s.contains("N_R")) {
      if (!s["N_R"].is_array()) throw ValidationError("expected a list", "simplify.N_R");
      for (std::size_t i = 0; i < s["N_R"].size(); ++i) c.N_R.push_back(count(s["N_R"][i], "simplify.N_R[" + std::to_string(i) + "]"));
    }
  }

  // validation
  if (c.N_A < 1) throw ValidationError("must be >= 1", "N_A");
  if ((mode == "optimize" || mode == "simplify") && c.N_A < 2) throw ValidationError("optimization needs N_A >= 2", "N_A");
  if (!(c.T2 > c.T1)) throw ValidationError("T2 must exceed T1", "T2_fs");
  if (!(c.alpha > 0.0)) throw ValidationError("must be positive", "alpha_fs");
  if (!(c.cond_cap > 1.0)) throw ValidationError("must exceed 1", "cond_cap");
  if (c.scale == cplx{}) throw ValidationError("must be nonzero", "scale");
  for (double a : c.unc_alpha) {
    if (!(a > 0.0)) throw ValidationError("must be positive", "uncontrolled.alpha_fs");
  }

  double t_over = pulse_over_time(c.alpha);
  if (mode == "propagate") {
    t_over = 0.0;
    for (double a : c.unc_alpha) t_over = std::max(t_over, pulse_over_time(a));
  }
  c.time = {-std::ceil(t_over), c.T2 + 50.0, 0};
  if (doc.contains("time_grid")) {
    const auto& t = doc["time_grid"];
    detail::only_keys(t, {"t_min_fs", "t_max_fs", "steps"}, "time_grid");
    if (t.contains("t_min_fs")) c.time.t_min = num(t["t_min_fs"], "time_grid.t_min_fs");
    if (t.contains("t_max_fs")) c.time.t_max = num(t["t_max_fs"], "time_grid.t_max_fs");
    if (t.contains("steps")) c.time.steps = count(t["steps"], "time_grid.steps");
  }
  if (c.time.steps == 0) c.time.steps = static_cast<Eigen::Index>(std::llround(c.time.t_max - c.time.t_min)) + 1;
  if (c.time.steps < 2 || !(c.time.t_max > c.time.t_min)) throw ValidationError("need t_max > t_min and steps >= 2", "time_grid");
  if (c.time.t_min > -t_over) throw ValidationError("grid must start at or before -t_over = " + format_double(-t_over) + " fs", "time_grid.t_min_fs");
  if (c.time.t_max < c.T2) throw ValidationError("grid must reach T2", "time_grid.t_max_fs");

  const auto& sys = doc.contains("system") ? doc["system"] : nlohmann::json::object();
  detail::only_keys(sys, {"generator", "archive"}, "system");
  if (sys.contains("archive") && sys.contains("generator")) throw ValidationError("give either generator or archive", "system");
  if (sys.contains("archive")) {
    if (!sys["archive"].is_string()) throw ValidationError("expected a path", "system.archive");
    c.archive_path = sys["archive"].get<std::string>();
  } else {
    c.generator = detail::parse_generator(sys.contains("generator") ? sys["generator"] : nlohmann::json::object(), c, c.N_A);
  }
  return c;
}

inline ScenarioConfig read_config_file(const std::string& path, const std::string& mode,
                                       const std::optional<std::string>& out_override = {},
                                       const std::optional<std::uint64_t>& seed_override = {},
                                       const std::optional<unsigned>& threads_override = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path, "config");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed config: ") + e.what(), "config");
  }
  if (out_override) doc["out_dir"] = *out_override;
  if (seed_override) doc["seed"] = *seed_override;
  if (threads_override) doc["threads"] = *threads_override;
  return parse_config(doc, mode, std::filesystem::path(path).parent_path());
}

struct RunContext {
  std::shared_ptr<const ResonanceSystem> system;
  nlohmann::json generator_meta;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;
  nlohmann::json results = nlohmann::json::object();
};

namespace detail {

inline nlohmann::json generator_json(const GeneratorParams& p) {
  return {{"seed", p.seed},
          {"n_alpha", p.n_alpha},
          {"window_eV", {p.window.lo, p.window.hi}},
          {"centers_eV", p.centers},
          {"widths_eV", p.widths},
          {"dipoles", p.dipoles},
          {"tail_cutoff_widths", p.tail_cutoff},
          {"E_g_eV", p.E_g}};
}

inline RunContext prepare(const ScenarioConfig& cfg) {
  RunContext ctx;
  if (cfg.generator) {
    ctx.system = std::make_shared<const ResonanceSystem>(generate_synthetic(*cfg.generator));
    ctx.generator_meta = generator_json(*cfg.generator);
  } else {
    std::filesystem::path p(cfg.archive_path);
    if (p.is_relative()) p = cfg.base_dir / p;
    auto ar = read_archive_file(p.string());
    ctx.system = std::make_shared<const ResonanceSystem>(std::move(ar.system));
    ctx.generator_meta = ar.generator;
    ctx.warnings = ar.warnings;
  }
  std::filesystem::create_directories(cfg.out_dir);
  return ctx;
}

inline std::string out_path(const ScenarioConfig& cfg, RunContext& ctx, const std::string& name) {
  ctx.outputs.push_back(name);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline void note_validity(RunContext& ctx, bool valid, const std::string& what) {
  if (valid) return;
  const std::string msg = what + ": time grid exceeds the coarse-graining validity range |t| <= hbar / Delta_alpha";
  for (const auto& w : ctx.warnings) {
    if (w == msg) return;
  }
  ctx.warnings.push_back(msg);
}

inline void write_trace(const std::string& path, const PopulationTrace& tr) {
  CsvWriter w(path, {"t_fs", "P_S2", "P_S1_remainder", "field_abs"});
  for (Eigen::Index i = 0; i < tr.t.size(); ++i) w.row({tr.t(i), tr.P_S2(i), tr.P_S1_remainder(i), tr.envelope(i)});
}

}  // namespace detail

inline void write_manifest(const ScenarioConfig& cfg, const RunContext& ctx, const std::string& command) {
  nlohmann::json m;
  m["program"] = "resctl";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = cfg.seed;
  m["threads"] = cfg.threads;
  m["config"] = cfg.document;
  m["generator"] = ctx.generator_meta;
  m["outputs"] = ctx.outputs;
  m["results"] = ctx.results;
  m["warnings"] = ctx.warnings;
  std::ofstream out(std::filesystem::path(cfg.out_dir) / "manifest.json", std::ios::binary);
  out << m.dump(2) << '\n';
}

inline RunContext run_generate(const ScenarioConfig& cfg) {
  auto ctx = detail::prepare(cfg);
  write_archive_file(detail::out_path(cfg, ctx, "system.json"), SystemArchive{kArchiveVersion, *ctx.system, ctx.generator_meta, {}});
  ctx.results = {{"n_alpha", ctx.system->n_alpha()}, {"n_q", ctx.system->n_q()}};
  write_manifest(cfg, ctx, "generate");
  return ctx;
}

/// Single-Gaussian drives for every (alpha, centre) pair plus the c-controlled reference trace.
inline RunContext run_uncontrolled(const ScenarioConfig& cfg) {
  auto ctx = detail::prepare(cfg);
  const auto b = bin_system(ctx.system, cfg.window, cfg.N_A);
  const RVector grid = b.omega_grid();
  const RVector ts = cfg.time.values();
  std::vector<double> centers = cfg.unc_center_eV;
  if (centers.empty()) centers.push_back(0.5 * (cfg.window.lo + cfg.window.hi));
  ctx.results["traces"] = nlohmann::json::array();
  for (std::size_t i = 0; i < cfg.unc_alpha.size(); ++i) {
    for (std::size_t j = 0; j < centers.size(); ++j) {
      const GaussianPulse p{1.0, cfg.unc_alpha[i], (centers[j] - ctx.system->E_g) / ctx.system->hbar};
      const ShapedField f{make_basis({p}), CVector::Constant(1, cfg.unc_amplitude), grid};
      const auto tr = population_trace(f, b, ts, cfg.threads);
      detail::note_validity(ctx, tr.tau_valid, "propagate");
      const std::string name = "population_uncontrolled_" + std::to_string(i) + "_" + std::to_string(j) + ".csv";
      detail::write_trace(detail::out_path(cfg, ctx, name), tr);
      ctx.results["traces"].push_back({{"file", name}, {"alpha_fs", p.alpha}, {"center_eV", centers[j]}, {"P_S2_final", tr.P_S2(tr.P_S2.size() - 1)}});
    }
  }
  const RVector pc = population_c_trace(doorway_superposition(*ctx.system), *ctx.system, ts, cfg.threads);
  CsvWriter w(detail::out_path(cfg, ctx, "population_c_controlled.csv"), {"t_fs", "P_S2"});
  for (Eigen::Index i = 0; i < ts.size(); ++i) w.row({ts(i), pc(i)});
  write_manifest(cfg, ctx, "propagate");
  return ctx;
}

struct OptimizeResult {
  BinnedSystem binned;
  GaussianBasis basis;
  std::vector<ControlSolution> solutions;
  std::vector<double> achieved;
  ShapedField f_min;
  ShapedField f_max;
};

/// Relative control with the realised-ratio self-check on every eigenpair.
inline OptimizeResult optimize(const ScenarioConfig& cfg, const std::shared_ptr<const ResonanceSystem>& sys) {
  OptimizeResult r;
  r.binned = bin_system(sys, cfg.window, cfg.N_A);
  const RVector grid = r.binned.omega_grid();
  r.basis = uniform_basis(grid, cfg.alpha);
  if (cfg.T1 < r.basis.t_over) throw ValidationError("T1 must be at least t_over = " + format_double(r.basis.t_over) + " fs", "T1_fs");
  r.solutions = relative_control(r.binned, cfg.T1, cfg.T2, cfg.cond_cap, r.basis.t_over);
  std::vector<ShapedField> fields(r.solutions.size());
  r.achieved.assign(r.solutions.size(), 0.0);
  parallel_for(r.solutions.size(), cfg.threads, [&](std::size_t i) {
    fields[i] = solve_d(r.basis, grid, r.solutions[i].field, cfg.cond_cap);
    r.achieved[i] = achieved_ratio(fields[i], r.binned, cfg.T1, cfg.T2);
  });
  for (std::size_t i = 0; i < r.solutions.size(); ++i) {
    const double lam = r.solutions[i].lambda;
    if (!(std::abs(r.achieved[i] - lam) <= 1e-6 * lam)) {
      throw NumericalError("propagated ratio " + format_double(r.achieved[i]) + " differs from eigenvalue " + format_double(lam));
    }
  }
  r.f_min = fields.front();
  r.f_max = fields.back();
  return r;
}

inline RunContext run_optimize(const ScenarioConfig& cfg) {
  auto ctx = detail::prepare(cfg);
  const auto r = optimize(cfg, ctx.system);
  {
    CsvWriter w(detail::out_path(cfg, ctx, "solutions.csv"), {"index", "lambda", "achieved_ratio", "cond_K_T1"});
    for (std::size_t i = 0; i < r.solutions.size(); ++i) {
      w.row({static_cast<double>(i), r.solutions[i].lambda, r.achieved[i], r.solutions[i].cond_K_T1});
    }
  }
  const RVector grid = r.binned.omega_grid();
  const RVector ts = cfg.time.values();
  ShapedField f_max_scaled = r.f_max;
  f_max_scaled.d *= cfg.scale;
  const std::pair<const char*, const ShapedField*> fields[] = {{"min", &r.f_min}, {"max", &f_max_scaled}};
  for (const auto& [tag, f] : fields) {
    const std::string t = tag;
    write_complex_series(detail::out_path(cfg, ctx, "field_" + t + ".csv"), "omega_rad_fs", grid, spectral_values(*f));
    write_complex_series(detail::out_path(cfg, ctx, "pulse_" + t + ".csv"), "t_fs", ts, field_time_profile(*f, ts));
    const auto tr = population_trace(*f, r.binned, ts, cfg.threads);
    detail::note_validity(ctx, tr.tau_valid, "optimize");
    detail::write_trace(detail::out_path(cfg, ctx, "population_" + t + ".csv"), tr);
  }
  ctx.results = {{"lambda_min", r.solutions.front().lambda},
                 {"lambda_max", r.solutions.back().lambda},
                 {"achieved_min", r.achieved.front()},
                 {"achieved_max", r.achieved.back()},
                 {"cond_K_T1", r.solutions.front().cond_K_T1},
                 {"t_over_fs", r.basis.t_over},
                 {"max_field_scale", {cfg.scale.real(), cfg.scale.imag()}}};
  write_manifest(cfg, ctx, "optimize");
  return ctx;
}

inline RunContext run_diagnose(const ScenarioConfig& cfg) {
  auto ctx = detail::prepare(cfg);
  const auto windows = cfg.diag_windows.empty() ? std::vector<EnergyWindow>{cfg.window} : cfg.diag_windows;
  const auto rows = correlation_report(ctx.system, windows, cfg.T1, cfg.T2, cfg.N_A, cfg.cond_cap, cfg.threads);
  {
    CsvWriter w(detail::out_path(cfg, ctx, "report.csv"),
                {"E_L_eV", "E_H_eV", "N_A", "H_Omega", "H_K_T1", "H_K_T2", "H_R_R", "abs_H_C_R", "lambda_min", "lambda_max", "cond_K_T1"});
    for (const auto& r : rows) {
      w.row({r.window.lo, r.window.hi, static_cast<double>(r.N_A), r.H_Omega, r.H_K_T1, r.H_K_T2, r.H_R_R, r.abs_H_C_R,
             r.lambda_min, r.lambda_max, r.cond_K_T1});
    }
  }
  std::ofstream md(detail::out_path(cfg, ctx, "report.md"), std::ios::binary);
  md << "| [E_L, E_H] (eV) | H(Omega)^(1/N_A) | H(K(T1))^(1/N_A) | H(K(T2))^(1/N_A) | H_R(R)^(1/N_A) | |H_C(R)|^(1/N_A) | lambda_min | lambda_max |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "| [%.2f, %.2f] | %.3e | %.3e | %.3e | %.3e | %.3e | %.3e | %.3e |\n", r.window.lo, r.window.hi,
                  r.H_Omega, r.H_K_T1, r.H_K_T2, r.H_R_R, r.abs_H_C_R, r.lambda_min, r.lambda_max);
    md << buf;
    if (!r.omega_det_positive) ctx.warnings.push_back("det(Omega) is not positive in window [" + format_double(r.window.lo) + ", " + format_double(r.window.hi) + "]");
  }
  ctx.results["windows"] = rows.size();
  if (rows.size() >= 3) {
    std::vector<double> h, range;
    for (const auto& r : rows) {
      h.push_back(r.H_Omega);
      range.push_back(std::log10(r.lambda_max / r.lambda_min));
    }
    const double rho = spearman(h, range);
    ctx.results["spearman_H_Omega_vs_log10_range"] = rho;
    md << "\nSpearman correlation of H(Omega)^(1/N_A) with log10(lambda_max/lambda_min): " << format_double(rho) << "\n";
  }
  write_manifest(cfg, ctx, "diagnose");
  return ctx;
}

inline RunContext run_simplify(const ScenarioConfig& cfg) {
  auto ctx = detail::prepare(cfg);
  const auto r = optimize(cfg, ctx.system);
  const Eigen::Index n_S = cfg.N_S > 0 ? cfg.N_S : cfg.N_A / 2;
  std::vector<Eigen::Index> n_R = cfg.N_R;
  if (n_R.empty()) {
    for (Eigen::Index k : {cfg.N_A, 3 * cfg.N_A / 4, cfg.N_A / 2, cfg.N_A / 4}) {
      if (k >= 1 && (n_R.empty() || n_R.back() != k)) n_R.push_back(k);
    }
  }
  const double T1 = cfg.T1, T2 = cfg.T2;
  const double span0 = r.solutions.back().lambda - r.solutions.front().lambda;
  const auto avg_min = local_average(r.f_min, n_S, cfg.cond_cap);
  const auto avg_max = local_average(r.f_max, n_S, cfg.cond_cap);
  const auto sm_min = smooth_expand(avg_min, n_S, cfg.cond_cap);
  const auto sm_max = smooth_expand(avg_max, n_S, cfg.cond_cap);
  {
    CsvWriter w(detail::out_path(cfg, ctx, "simplification.csv"), {"variant", "achieved_min_ratio", "achieved_max_ratio", "span_fraction"});
    const std::pair<const char*, std::pair<const ShapedField*, const ShapedField*>> variants[] = {
        {"optimized", {&r.f_min, &r.f_max}}, {"local_average", {&avg_min, &avg_max}}, {"smooth_expand", {&sm_min, &sm_max}}};
    nlohmann::json jv = nlohmann::json::object();
    for (const auto& [name, pair] : variants) {
      const double a = achieved_ratio(*pair.first, r.binned, T1, T2);
      const double b = achieved_ratio(*pair.second, r.binned, T1, T2);
      w.row(name, {a, b, (b - a) / span0});
      jv[name] = {{"achieved_min", a}, {"achieved_max", b}, {"span_fraction", (b - a) / span0}};
    }
    ctx.results["simplification"] = jv;
  }
  const auto rows = retention_sweep(r.binned, r.f_min, r.f_max, n_R, T1, T2, cfg.cond_cap, cfg.threads);
  CsvWriter w(detail::out_path(cfg, ctx, "retention.csv"),
              {"N_R", "achieved_min_ratio", "achieved_max_ratio", "fresh_solve_min", "fresh_solve_max"});
  for (const auto& row : rows) w.row({static_cast<double>(row.N_R), row.achieved_min, row.achieved_max, row.fresh_min, row.fresh_max});
  ctx.results["N_S"] = n_S;
  ctx.results["lambda_min"] = r.solutions.front().lambda;
  ctx.results["lambda_max"] = r.solutions.back().lambda;
  write_manifest(cfg, ctx, "simplify");
  return ctx;
}

}  // namespace resctl
