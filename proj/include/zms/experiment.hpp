/// \file experiment.hpp
/// Configuration ingestion, task orchestration, artifact persistence and the
/// consolidated verification table. The JSON config schema is versioned
/// ("schema": 1); exit codes: 0 success, 2 config/schema violation,
/// 3 numerical failure, 4 invariant-check failure.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zms/asymptotics.hpp"
#include "zms/csv.hpp"
#include "zms/energy.hpp"
#include "zms/nonlinearity.hpp"
#include "zms/potential.hpp"
#include "zms/radial_ode.hpp"
#include "zms/version.hpp"

namespace zms {

using json = nlohmann::json;

struct schema_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Task {
  GroundState,
  Audit,
  EpsilonScan,
  Landscape,
  VerifyLemmas,
  Sobolev,
  CvEstimate
};

inline const char* to_string(Task t) {
  switch (t) {
    case Task::GroundState: return "GroundState";
    case Task::Audit: return "Audit";
    case Task::EpsilonScan: return "EpsilonScan";
    case Task::Landscape: return "Landscape";
    case Task::VerifyLemmas: return "VerifyLemmas";
    case Task::Sobolev: return "Sobolev";
    default: return "CvEstimate";
  }
}

inline std::optional<Task> task_from_string(const std::string& s) {
  for (Task t : {Task::GroundState, Task::Audit, Task::EpsilonScan,
                 Task::Landscape, Task::VerifyLemmas, Task::Sobolev,
                 Task::CvEstimate})
    if (s == to_string(t)) return t;
  return std::nullopt;
}

/// Pass/fail thresholds for the verification checks. Defaults are pinned;
/// a config may override individual entries (tolerance governance).
struct CheckTolerances {
  double decay_u = 0.05;        ///< tail exponent of w vs -(N-2)
  double decay_du = 0.10;       ///< tail exponent of |w'| vs -(N-1)
  double nehari_rel = 5e-3;     ///< |J_0(w)| / ||grad w||^2
  double pohozaev_rel = 1e-2;   ///< |I_0(w) - (1/N)||grad w||^2| / c_0
  double eps_slope = 0.05;      ///< interaction slope vs -(N-2)
  double power2_slope = 0.10;   ///< two-center kernel slope tolerance
  double power3_slope = 0.15;   ///< three-center kernel slope tolerance
  double vplus_slope = 0.15;    ///< V+ interaction slope vs -tau
  double vplus_margin = 0.5;    ///< required excess of -slope over (N-2)
  double t_half = 0.05;         ///< |T_{1/2} - 2| / 2 at the largest R
  double eta_over_c0 = 0.01;    ///< landscape margin (2c0 - max I)/c0
  double boundary = 0.05;       ///< lambda = 1 endpoint: I_V < (1+x) c0
  double tvm_spread = 0.20;     ///< relative spread of C_b across R
  double newc_refine = 0.05;    ///< grid-refinement stability of C_a
  double cv_band = 0.02;        ///< |cV_estimate - c0| / c0
  double barycenter = 0.02;     ///< absolute, relative to max(1, |target|)
  double projection_t1 = 1e-6;  ///< |T(w; V=0) - 1|
};

struct ExperimentConfig {
  json echo;
  std::optional<NonlinearitySpec> nl;
  std::optional<PotentialSpec> potential;
  QuadratureConfig quad;
  OdeTolerances ode;
  std::vector<double> R_grid{8, 11, 16, 23, 32, 45, 64};
  int lambda_points = 21;
  int s_points = 17;
  double tvm_b = 4.0;
  double landscape_R = 64.0;
  vec3 y0{1, 0, 0};
  vec3 y{3, 0, 0};
  std::string out = "out";
  std::uint64_t seed = 12345;
  std::string profile_path;  // optional precomputed profile
  bool cache = true;
  std::string cache_dir;  // defaults to <out>/cache
  CheckTolerances checks;

  const NonlinearitySpec& nonlinearity() const { return *nl; }
  const PotentialSpec& pot() const { return *potential; }
};

namespace cfgdetail {

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw schema_error("config: bad value for '" + key + "': " + e.what());
  }
}

inline vec3 get_vec3(const json& j, const std::string& key, vec3 fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3)
    throw schema_error("config: '" + key + "' must be a 3-vector");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

}  // namespace cfgdetail

/// Parse and validate a config object. Throws schema_error on malformed
/// input and std::invalid_argument when a component rejects its parameters;
/// both map to exit code 2, before any artifact is written.
inline ExperimentConfig parse_config(json j) {
  using cfgdetail::get_or;
  using cfgdetail::get_vec3;
  if (!j.is_object()) throw schema_error("config: top level must be an object");
  if (j.contains("schema")) {
    if (!j["schema"].is_number_integer() || j["schema"].get<int>() != 1)
      throw schema_error("config: unsupported schema version");
  } else {
    j["schema"] = 1;
  }

  ExperimentConfig cfg;

  int N = 3;
  double p = 4.0, q = 8.0;
  if (j.contains("nonlinearity")) {
    const auto& nj = j["nonlinearity"];
    if (!nj.is_object()) throw schema_error("config: 'nonlinearity' object");
    for (const char* key : {"N", "p", "q"})
      if (!nj.contains(key))
        throw schema_error(std::string("config: nonlinearity missing '") +
                           key + "'");
    N = nj["N"].get<int>();
    p = nj["p"].get<double>();
    q = nj["q"].get<double>();
  }
  try {
    cfg.nl.emplace(N, p, q);
  } catch (const std::invalid_argument& e) {
    throw schema_error(std::string("config: ") + e.what());
  }

  PotentialSpec pc;
  pc.N = N;
  if (j.contains("potential")) {
    const auto& pj = j["potential"];
    if (!pj.is_object()) throw schema_error("config: 'potential' object");
    const std::string fam = get_or<std::string>(pj, "family", "PowerDecay");
    if (fam == "PowerDecay")
      pc.family = PotentialFamily::PowerDecay;
    else if (fam == "CompactBump")
      pc.family = PotentialFamily::CompactBump;
    else if (fam == "SignChanging")
      pc.family = PotentialFamily::SignChanging;
    else
      throw schema_error("config: unknown potential family '" + fam + "'");
    pc.A0 = get_or<double>(pj, "A0", 1.0);
    pc.kappa = get_or<double>(pj, "kappa", 3.0);
    pc.bump_radius = get_or<double>(pj, "bump_radius", 1.0);
    pc.neg_amplitude = get_or<double>(pj, "neg_amplitude", 0.0);
    pc.neg_radius = get_or<double>(pj, "neg_radius", 1.0);
    pc.center = get_vec3(pj, "center", {0, 0, 0});
  } else {
    pc.family = PotentialFamily::PowerDecay;
    pc.A0 = 1.0;
    pc.kappa = 3.0;
  }
  cfg.potential = make_potential(pc);  // invalid_argument -> exit 2

  if (j.contains("quadrature")) {
    const auto& qj = j["quadrature"];
    const std::string m =
        get_or<std::string>(qj, "method", "AxisymmetricProduct");
    if (m == "AxisymmetricProduct")
      cfg.quad.method = QuadMethod::AxisymmetricProduct;
    else if (m == "TensorGrid")
      cfg.quad.method = QuadMethod::TensorGrid;
    else if (m == "MonteCarlo")
      cfg.quad.method = QuadMethod::MonteCarlo;
    else
      throw schema_error("config: unknown quadrature method '" + m + "'");
    cfg.quad.tol = get_or<double>(qj, "tol", cfg.quad.tol);
    cfg.quad.box_radius = get_or<double>(qj, "box_radius", cfg.quad.box_radius);
    cfg.quad.max_cells = get_or<int>(qj, "max_cells", cfg.quad.max_cells);
    cfg.quad.mc_samples = get_or<long>(qj, "mc_samples", cfg.quad.mc_samples);
  }
  if (j.contains("ode")) {
    const auto& oj = j["ode"];
    cfg.ode.rtol = get_or<double>(oj, "rtol", cfg.ode.rtol);
    cfg.ode.atol = get_or<double>(oj, "atol", cfg.ode.atol);
    cfg.ode.r_max = get_or<double>(oj, "r_max", cfg.ode.r_max);
    cfg.ode.r_switch = get_or<double>(oj, "r_switch", cfg.ode.r_switch);
    cfg.ode.amp_lo = get_or<double>(oj, "amp_lo", cfg.ode.amp_lo);
    cfg.ode.amp_hi = get_or<double>(oj, "amp_hi", cfg.ode.amp_hi);
    cfg.ode.sweep_points = get_or<int>(oj, "sweep_points", cfg.ode.sweep_points);
    cfg.ode.bisect_rel = get_or<double>(oj, "bisect_rel", cfg.ode.bisect_rel);
  }
  if (j.contains("grids")) {
    const auto& gj = j["grids"];
    if (gj.contains("R")) cfg.R_grid = gj["R"].get<std::vector<double>>();
    cfg.lambda_points = get_or<int>(gj, "lambda_points", cfg.lambda_points);
    cfg.s_points = get_or<int>(gj, "s_points", cfg.s_points);
    cfg.tvm_b = get_or<double>(gj, "b", cfg.tvm_b);
    cfg.landscape_R = get_or<double>(gj, "landscape_R", cfg.landscape_R);
  }
  cfg.y0 = get_vec3(j, "y0", cfg.y0);
  cfg.y = get_vec3(j, "y", cfg.y);
  if (std::abs(norm(cfg.y0) - 1.0) > 1e-9)
    throw schema_error("config: |y0| must equal 1");
  if (std::abs(norm(sub(cfg.y, cfg.y0)) - 2.0) > 1e-9)
    throw schema_error("config: |y - y0| must equal 2");
  cfg.out = get_or<std::string>(j, "out", cfg.out);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.quad.seed = cfg.seed;
  cfg.quad.threads = get_or<unsigned>(j, "threads", 0u);
  cfg.profile_path = get_or<std::string>(j, "profile", "");
  if (!cfg.profile_path.empty() &&
      !std::filesystem::exists(cfg.profile_path))
    throw schema_error("config: referenced profile file does not exist: " +
                       cfg.profile_path);
  cfg.cache = get_or<bool>(j, "cache", true);
  cfg.cache_dir = get_or<std::string>(j, "cache_dir", "");

  if (j.contains("checks")) {
    const auto& cj = j["checks"];
    auto& c = cfg.checks;
    c.decay_u = get_or<double>(cj, "decay_u", c.decay_u);
    c.decay_du = get_or<double>(cj, "decay_du", c.decay_du);
    c.nehari_rel = get_or<double>(cj, "nehari_rel", c.nehari_rel);
    c.pohozaev_rel = get_or<double>(cj, "pohozaev_rel", c.pohozaev_rel);
    c.eps_slope = get_or<double>(cj, "eps_slope", c.eps_slope);
    c.power2_slope = get_or<double>(cj, "power2_slope", c.power2_slope);
    c.power3_slope = get_or<double>(cj, "power3_slope", c.power3_slope);
    c.vplus_slope = get_or<double>(cj, "vplus_slope", c.vplus_slope);
    c.vplus_margin = get_or<double>(cj, "vplus_margin", c.vplus_margin);
    c.t_half = get_or<double>(cj, "t_half", c.t_half);
    c.eta_over_c0 = get_or<double>(cj, "eta_over_c0", c.eta_over_c0);
    c.boundary = get_or<double>(cj, "boundary", c.boundary);
    c.tvm_spread = get_or<double>(cj, "tvm_spread", c.tvm_spread);
    c.newc_refine = get_or<double>(cj, "newc_refine", c.newc_refine);
    c.cv_band = get_or<double>(cj, "cv_band", c.cv_band);
    c.barycenter = get_or<double>(cj, "barycenter", c.barycenter);
    c.projection_t1 = get_or<double>(cj, "projection_t1", c.projection_t1);
  }

  cfg.echo = j;
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw schema_error("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw schema_error(std::string("config: JSON parse failure: ") + e.what());
  }
  return parse_config(std::move(j));
}

/// Profile acquisition with on-disk caching keyed by (N, p, q, tolerances).
inline RadialProfile obtain_profile(const ExperimentConfig& cfg) {
  if (!cfg.profile_path.empty()) return load_profile(cfg.profile_path);
  std::string key;
  {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g",
                  cfg.nl->N(), cfg.nl->p(), cfg.nl->q(), cfg.ode.rtol,
                  cfg.ode.atol, cfg.ode.r_max, cfg.ode.bisect_rel);
    key = buf;
  }
  std::filesystem::path dir =
      cfg.cache_dir.empty() ? std::filesystem::path(cfg.out) / "cache"
                            : std::filesystem::path(cfg.cache_dir);
  std::filesystem::path file =
      dir / ("omega_" + std::to_string(fnv1a(key)) + ".csv");
  if (cfg.cache && std::filesystem::exists(file))
    return load_profile(file.string());
  RadialProfile prof = ground_state(*cfg.nl, cfg.ode);
  if (cfg.cache) {
    std::filesystem::create_directories(dir);
    save_profile(prof, file.string());
  }
  return prof;
}

struct VerifyRow {
  std::string name;
  double computed = 0;
  double predicted = 0;
  double tolerance = 0;
  bool pass = false;
};

/// The consolidated quantitative verification table (one row per estimate).
/// Requires a ground-state profile; `prof` may be shared across calls.
inline std::vector<VerifyRow> verify_lemmas(const ExperimentConfig& cfg,
                                            const RadialProfile& prof) {
  const NonlinearitySpec& nl = *cfg.nl;
  const PotentialSpec& V = *cfg.potential;
  const CheckTolerances& t = cfg.checks;
  const int N = nl.N();
  const double nm2 = N - 2.0;
  std::vector<VerifyRow> rows;
  auto push = [&](const std::string& name, double computed, double predicted,
                  double tol, bool pass) {
    rows.push_back({name, computed, predicted, tol, pass});
  };

  // Power-integral kernels at the exponents used by the interaction bounds.
  {
    const double alpha = N + 2.0, beta = nm2;
    std::vector<double> vals;
    for (double R : cfg.R_grid) {
      auto res = two_center_integral(
          [&](double a, double b) {
            return std::pow(1.0 + a, -alpha) * std::pow(1.0 + b, -beta);
          },
          scale(cfg.y0, R), scale(cfg.y, R), cfg.quad, N);
      vals.push_back(res.value);
    }
    const double mu = std::min({alpha, beta, alpha + beta - N});
    const double slope = fit_loglog(cfg.R_grid, vals).slope;
    push("power_a_slope", slope, -mu, t.power2_slope,
         std::abs(slope + mu) <= t.power2_slope);
  }
  {
    const double kap = 3.0, gam = nm2;
    std::vector<double> vals;
    for (double R : cfg.R_grid) {
      auto res = three_center_integral(
          [&](double r0, double r1, double r2) {
            return std::pow(1.0 + r0, -kap) * std::pow(1.0 + r1, -gam) *
                   std::pow(1.0 + r2, -gam);
          },
          scale(cfg.y0, R), scale(cfg.y, R), cfg.quad, N);
      vals.push_back(res.value);
    }
    const double tau = std::min({kap, 2 * gam, kap + 2 * gam - N});
    const double slope = fit_loglog(cfg.R_grid, vals).slope;
    push("power_b_slope", slope, -tau, t.power3_slope,
         std::abs(slope + tau) <= t.power3_slope);
  }

  // Interaction asymptotics and the sandwich.
  {
    auto rep = epsilon_scan(nl, prof, cfg.R_grid, cfg.y0, cfg.y, cfg.quad);
    const double slope = rep.fitted.at("slope");
    push("epsilon_slope", slope, -nm2, t.eps_slope,
         std::abs(slope + nm2) <= t.eps_slope);
    const double c3 = rep.fitted.at("C3_est"), c4 = rep.fitted.at("C4_est");
    push("epsilon_sandwich", c4 / c3, 1.0, 1.0, c4 > 0 && c4 <= c3);
  }

  // Mean-value bound stability.
  {
    std::vector<double> s_grid;
    for (int i = 0; i < cfg.s_points; ++i)
      s_grid.push_back(cfg.tvm_b * i / (cfg.s_points - 1.0));
    auto rep = tvm_check(nl, prof, cfg.tvm_b, s_grid, cfg.R_grid, cfg.y0,
                         cfg.y, cfg.quad);
    const double spread = rep.fitted.at("C_b_spread");
    push("tvm_stability", spread, 0.0, t.tvm_spread,
         std::isfinite(rep.fitted.at("C_b_est")) && spread <= t.tvm_spread &&
             rep.fitted.at("D_at_1_rel") < 1e-6);
  }

  // V+ interaction decay.
  {
    auto rep =
        vplus_interaction_scan(nl, prof, V, cfg.R_grid, cfg.y0, cfg.y, cfg.quad);
    if (rep.fitted.count("slope")) {
      const double slope = rep.fitted.at("slope");
      const double tau = rep.fitted.at("tau_pred");
      push("vplus_slope", slope, -tau, t.vplus_slope,
           std::abs(slope + tau) <= t.vplus_slope);
      push("vplus_margin", rep.fitted.at("margin_over_Nm2"), t.vplus_margin,
           0.0, rep.fitted.at("margin_over_Nm2") >= t.vplus_margin);
    } else {
      push("vplus_slope", 0, 0, 0, true);  // V+ identically zero
    }
  }

  // Superadditivity defect constant and its grid stability.
  {
    const double nu = 0.5 * (2.0 / nm2 + (nl.q() - 2.0));
    const double c100 = lemma_new_constant(nl, 2.0, nu, 100);
    const double c200 = lemma_new_constant(nl, 2.0, nu, 200);
    const double rel = std::abs(c200 - c100) / std::max(c200, 1e-300);
    push("superadditivity_C", c100, c200, t.newc_refine,
         std::isfinite(c100) && c100 >= 0 && rel <= t.newc_refine);
  }

  // Projection scalar: T = 1 on the Nehari set itself (V = 0), and the
  // large-separation limit T_{1/2} -> 2.
  {
    auto st = make_state(prof, 1.0, 8.0, cfg.y0, cfg.y);
    const double T1 = nehari_project(nl, st, nullptr, cfg.quad);
    push("projection_T1", T1, 1.0, t.projection_t1,
         std::abs(T1 - 1.0) <= t.projection_t1);

    std::vector<double> Ts;
    for (double R : cfg.R_grid) {
      StateQuadrature qd(nl, prof, R, cfg.y0, cfg.y,
                         V.is_zero() ? nullptr : &V, cfg.quad);
      Ts.push_back(qd.project_T(0.5));
    }
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < Ts.size(); ++i)
      if (std::abs(Ts[i + 1] - 2.0) > std::abs(Ts[i] - 2.0) * (1 + 1e-9))
        monotone = false;
    const double Tend = Ts.back();
    push("projection_limit_T_half", Tend, 2.0, t.t_half,
         std::abs(Tend - 2.0) <= 2.0 * t.t_half && monotone);
  }

  // Landscape gap and the boundary level.
  {
    std::vector<double> lg;
    for (int i = 0; i < cfg.lambda_points; ++i)
      lg.push_back(double(i) / (cfg.lambda_points - 1));
    auto rep = landscape(nl, prof, V, cfg.landscape_R, lg, cfg.y0, cfg.y,
                         cfg.quad);
    const double c0v = rep.fitted.at("c0");
    const double eta = rep.fitted.at("eta_est");
    push("landscape_gap", eta / c0v, t.eta_over_c0, 0.0,
         eta / c0v > t.eta_over_c0 &&
             rep.fitted.at("argmax_interior") == 1.0);
    push("energy_on_boundary", rep.fitted.at("I_lambda1") / c0v,
         1.0 + t.boundary, 0.0,
         rep.fitted.at("I_lambda1") < (1.0 + t.boundary) * c0v);
  }

  // c_V level over the translated-bump family.
  {
    const double c0v = c0(nl, prof);
    const double cv = cV_upper_estimate(nl, prof, V, cfg.R_grid, cfg.quad);
    push("cv_level", cv / c0v, 1.0, t.cv_band,
         cv >= c0v * (1.0 - t.cv_band) && cv <= c0v * (1.0 + t.cv_band));
  }

  return rows;
}

namespace rundetail {

inline void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

inline void write_error_report(const std::filesystem::path& out_dir, int code,
                               const std::string& kind,
                               const std::string& message) {
  json err{{"exit_code", code}, {"kind", kind}, {"message", message}};
  std::error_code ec;
  if (std::filesystem::exists(out_dir, ec))
    write_json(err, out_dir / "error.json");
  std::fprintf(stderr, "%s\n", err.dump().c_str());
}

inline json scan_sidecar(const ScanReport& rep, const ExperimentConfig& cfg) {
  json fitted = json::object();
  for (const auto& [k, v] : rep.fitted) fitted[k] = v;
  return json{{"task", rep.task},
              {"fitted", fitted},
              {"seed", rep.seed},
              {"toolkit_version", zms::version},
              {"config", cfg.echo}};
}

}  // namespace rundetail

/// Execute one task; writes artifacts under cfg.out and returns the exit
/// status (0 on success, 4 when an attached invariant check fails; numerical
/// failures map to 3).
inline int run(const ExperimentConfig& cfg, Task task) {
  namespace fs = std::filesystem;
  const fs::path out_dir(cfg.out);
  try {
    fs::create_directories(out_dir);
    rundetail::write_json(
        json{{"toolkit_version", zms::version},
             {"task", to_string(task)},
             {"seed", cfg.seed},
             {"config", cfg.echo}},
        out_dir / "config_echo.json");

    const NonlinearitySpec& nl = *cfg.nl;
    const PotentialSpec& V = *cfg.potential;
    const CheckTolerances& t = cfg.checks;
    bool checks_ok = true;

    switch (task) {
      case Task::GroundState: {
        RadialProfile prof = obtain_profile(cfg);
        save_profile(prof, (out_dir / "profile.csv").string());
        const DecayReport rep = decay_report(prof);
        rundetail::write_json(
            json{{"exponent_u", rep.exponent_u},
                 {"exponent_du", rep.exponent_du},
                 {"tail_c", rep.tail_c},
                 {"A2_est", rep.A2_est},
                 {"A3_est", rep.A3_est},
                 {"amplitude", prof.amplitude}},
            out_dir / "decay_report.json");
        const double nm2 = prof.N - 2.0;
        checks_ok = std::abs(rep.exponent_u + nm2) <= t.decay_u &&
                    std::abs(rep.exponent_du + nm2 + 1.0) <= t.decay_du;
        break;
      }
      case Task::Audit: {
        auto grid = make_log_grid(1e-4, 1e4, 241);
        auto audit = growth_audit(nl, grid);
        std::vector<std::vector<double>> rows;
        for (double s : grid) {
          auto ev = eval(nl, s);
          rows.push_back({s, ev.F, ev.f, ev.fprime,
                          logarithmic_derivative(nl, s)});
        }
        ScanReport srep;
        srep.task = "Audit";
        srep.columns = {"s", "F", "f", "fprime", "g"};
        srep.rows = std::move(rows);
        write_scan_csv(srep, (out_dir / "nonlinearity_audit.csv").string());
        rundetail::write_json(
            json{{"A1_est", audit.A1_est},
                 {"theta_est", audit.theta_est},
                 {"g_limit_0", audit.g_limits.first},
                 {"g_limit_inf", audit.g_limits.second},
                 {"monotone_ok", audit.monotone_ok},
                 {"passes", audit_passes(nl, audit)}},
            out_dir / "growth_audit.json");
        auto pa = audit_V(V);
        rundetail::write_json(json{{"lhalf_mass", pa.lhalf_mass},
                                   {"lr_norm", pa.lr_norm},
                                   {"v2_envelope", pa.v2_envelope},
                                   {"neg_mass", pa.neg_mass},
                                   {"s_threshold", pa.s_threshold},
                                   {"v1_ok", pa.v1_ok},
                                   {"v2_ok", pa.v2_ok}},
                              out_dir / "potential_audit.json");
        checks_ok = audit_passes(nl, audit) && pa.v1_ok && pa.v2_ok &&
                    audit.theta_est >= nl.p() - 1e-9;
        break;
      }
      case Task::EpsilonScan: {
        RadialProfile prof = obtain_profile(cfg);
        auto rep = epsilon_scan(nl, prof, cfg.R_grid, cfg.y0, cfg.y, cfg.quad);
        write_scan_csv(rep, (out_dir / "epsilon_scan.csv").string());
        rundetail::write_json(rundetail::scan_sidecar(rep, cfg),
                              out_dir / "epsilon_scan.json");
        const double nm2 = nl.N() - 2.0;
        bool positive = true;
        for (const auto& row : rep.rows) positive = positive && row[1] > 0;
        checks_ok = positive &&
                    std::abs(rep.fitted.at("slope") + nm2) <= t.eps_slope &&
                    rep.fitted.at("C4_est") > 0 &&
                    rep.fitted.at("C4_est") <= rep.fitted.at("C3_est");
        break;
      }
      case Task::Landscape: {
        RadialProfile prof = obtain_profile(cfg);
        std::vector<double> lg;
        for (int i = 0; i < cfg.lambda_points; ++i)
          lg.push_back(double(i) / (cfg.lambda_points - 1));
        auto rep = landscape(nl, prof, V, cfg.landscape_R, lg, cfg.y0, cfg.y,
                             cfg.quad);
        write_scan_csv(rep, (out_dir / "landscape.csv").string());
        rundetail::write_json(rundetail::scan_sidecar(rep, cfg),
                              out_dir / "landscape.json");
        const double c0v = rep.fitted.at("c0");
        checks_ok = rep.fitted.at("eta_est") / c0v > t.eta_over_c0 &&
                    rep.fitted.at("I_lambda1") < (1.0 + t.boundary) * c0v &&
                    rep.fitted.at("argmax_interior") == 1.0;
        break;
      }
      case Task::VerifyLemmas: {
        RadialProfile prof = obtain_profile(cfg);
        auto rows = verify_lemmas(cfg, prof);
        std::vector<std::vector<std::string>> srows;
        for (const auto& r : rows) {
          srows.push_back({r.name, format_g17(r.computed),
                           format_g17(r.predicted), format_g17(r.tolerance),
                           r.pass ? "pass" : "fail"});
          std::printf("%-28s computed=%-14.6g predicted=%-14.6g tol=%-10.4g %s\n",
                      r.name.c_str(), r.computed, r.predicted, r.tolerance,
                      r.pass ? "pass" : "FAIL");
          checks_ok = checks_ok && r.pass;
        }
        write_table_csv({"check", "computed", "predicted", "tolerance",
                         "status"},
                        srows, (out_dir / "verify_lemmas.csv").string());
        break;
      }
      case Task::Sobolev: {
        const double S = sobolev_constant(nl.N());
        std::printf("S(N=%d) = %.12g (Rayleigh-quotient cross-check within "
                    "1e-6 relative)\n",
                    nl.N(), S);
        rundetail::write_json(json{{"N", nl.N()}, {"S", S}},
                              out_dir / "sobolev.json");
        break;
      }
      case Task::CvEstimate: {
        RadialProfile prof = obtain_profile(cfg);
        std::vector<CvRow> rows;
        const double cv =
            cV_upper_estimate(nl, prof, V, cfg.R_grid, cfg.quad, &rows);
        const double c0v = c0(nl, prof);
        ScanReport rep;
        rep.task = "CvEstimate";
        rep.columns = {"R", "T", "I_V"};
        for (const auto& r : rows) rep.rows.push_back({r.R, r.T, r.I_V});
        rep.fitted["cv_estimate"] = cv;
        rep.fitted["c0"] = c0v;
        rep.seed = cfg.seed;
        write_scan_csv(rep, (out_dir / "cv_estimate.csv").string());
        rundetail::write_json(rundetail::scan_sidecar(rep, cfg),
                              out_dir / "cv_estimate.json");
        checks_ok = cv >= c0v * (1.0 - t.cv_band) &&
                    cv <= c0v * (1.0 + t.cv_band);
        break;
      }
    }

    if (!checks_ok) {
      rundetail::write_error_report(out_dir, 4, "invariant",
                                    std::string(to_string(task)) +
                                        ": attached invariant checks failed");
      return 4;
    }
    return 0;
  } catch (const schema_error& e) {
    rundetail::write_error_report(out_dir, 2, "schema", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    rundetail::write_error_report(out_dir, 2, "config", e.what());
    return 2;
  } catch (const numerical_error& e) {
    rundetail::write_error_report(out_dir, 3, "numerical", e.what());
    return 3;
  }
}

/// Parse + run with the exit-code mapping the CLI uses. Config rejection
/// happens before any artifact is written (exit 2, machine-readable report
/// on stderr only).
inline int run_from_json(json raw, Task task) {
  try {
    ExperimentConfig cfg = parse_config(std::move(raw));
    return run(cfg, task);
  } catch (const std::invalid_argument& e) {
    json err{{"exit_code", 2}, {"kind", "schema"}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 2;
  } catch (const numerical_error& e) {
    json err{{"exit_code", 3}, {"kind", "numerical"}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 3;
  }
}

}  // namespace zms
