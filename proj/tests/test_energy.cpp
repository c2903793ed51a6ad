#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "zms/energy.hpp"

using zms::make_state;
using zms::NonlinearitySpec;
using zms::QuadratureConfig;
using zms::RadialProfile;
using zms::StateQuadrature;

namespace {
const NonlinearitySpec& spec348() {
  static NonlinearitySpec s(3, 4, 8);
  return s;
}
const RadialProfile& profile348() {
  static RadialProfile p = zms::ground_state(spec348());
  return p;
}
QuadratureConfig quad_cfg() {
  QuadratureConfig cfg;
  cfg.tol = 1e-6;
  return cfg;
}
}  // namespace

TEST_CASE("state construction guards") {
  const auto& prof = profile348();
  CHECK_NOTHROW(make_state(prof, 0.5, 8.0));
  CHECK_THROWS_AS(make_state(prof, -0.1, 8.0), std::invalid_argument);
  CHECK_THROWS_AS(make_state(prof, 1.1, 8.0), std::invalid_argument);
  CHECK_THROWS_AS(make_state(prof, 0.5, 8.0, {2, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(make_state(prof, 0.5, 8.0, {1, 0, 0}, {4, 0, 0}),
                  std::invalid_argument);
  // A rotated geometry is fine as long as the constraints hold.
  const double s = 1.0 / std::sqrt(2.0);
  CHECK_NOTHROW(make_state(prof, 0.5, 8.0, {s, s, 0}, {3 * s, 3 * s, 0}));
}

TEST_CASE("energy report identities and the zero state") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  auto V = zms::make_power_decay(1.0, 3.0);

  auto st = make_state(prof, 0.4, 16.0, {1, 0, 0}, {3, 0, 0}, 1.3);
  auto rep = zms::energy(spec, st, &V, quad_cfg());
  CHECK(rep.I_V ==
        0.5 * rep.gradient_sq + 0.5 * rep.potential_term - rep.F_term);
  CHECK(rep.J_V == rep.gradient_sq + rep.potential_term - rep.fu_term);
  CHECK(rep.quad_error > 0);
  CHECK(rep.gradient_sq > 0);
  CHECK(rep.potential_term > 0);  // V >= 0

  auto zero = make_state(prof, 0.4, 16.0, {1, 0, 0}, {3, 0, 0}, 0.0);
  auto zrep = zms::energy(spec, zero, &V, quad_cfg());
  CHECK(zrep.I_V == 0.0);
  CHECK(zrep.J_V == 0.0);
}

TEST_CASE("the ground state sits on the Nehari set") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  const double grad = zms::radial_gradient_sq(prof);
  const double fu = zms::radial_fu(spec, prof);
  CHECK(std::abs(grad - fu) / grad < 5e-3);

  // Same statement through the state-energy machinery (lambda = 1, V = 0).
  auto st = make_state(prof, 1.0, 8.0);
  auto rep = zms::energy(spec, st, nullptr, quad_cfg());
  CHECK(std::abs(rep.J_V) < 5e-3 * rep.gradient_sq);
}

TEST_CASE("Pohozaev identity fixes the ground-state level") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  const double c0 = zms::c0(spec, prof);  // throws if the cross-check fails
  CHECK(c0 > 0);
  const double grad = zms::radial_gradient_sq(prof);
  CHECK(std::abs(c0 - grad / 3.0) < 1e-2 * c0);

  // I_0(t w) < c_0 away from the fibering maximum at t = 1.
  for (double t : {0.5, 2.0}) {
    const double It =
        0.5 * t * t * grad - zms::radial_F(spec, prof.scaled(t));
    CHECK(It < c0);
  }
}

TEST_CASE("two-bump residual J_0 vanishes with separation at T = 2") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  double prev = std::numeric_limits<double>::infinity();
  for (double R : {8.0, 16.0, 32.0, 64.0}) {
    StateQuadrature q(spec, prof, R, {1, 0, 0}, {3, 0, 0}, nullptr,
                      quad_cfg());
    auto rep = q.report(0.5, 2.0);
    const double rel = std::abs(rep.J_V) / rep.gradient_sq;
    CHECK(rel < prev * (1.0 + 1e-9));
    prev = rel;
  }
  CHECK(prev < 0.07);  // |J_0| / ||grad||^2 at R = 64
}

TEST_CASE("Nehari projection") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  const auto cfg = quad_cfg();

  // Already on the Nehari set: T = 1 (to the solver's own accuracy).
  auto st1 = make_state(prof, 1.0, 8.0);
  const double T1 = zms::nehari_project(spec, st1, nullptr, cfg);
  CHECK(T1 == Catch::Approx(1.0).margin(1e-6));

  // Projection of c*u spans the same ray: T(c u) = T(u)/c.
  for (double c : {0.5, 2.0, 10.0}) {
    auto scaled = prof.scaled(c);
    auto stc = make_state(scaled, 1.0, 8.0);
    const double Tc = zms::nehari_project(spec, stc, nullptr, cfg);
    CHECK(Tc == Catch::Approx(T1 / c).epsilon(1e-7));
  }

  // The root is genuine: J changes sign across it.
  StateQuadrature q(spec, prof, 16.0, {1, 0, 0}, {3, 0, 0}, nullptr, cfg);
  const double Th = q.project_T(0.5);
  CHECK(q.J(0.5, 0.9 * Th) > 0);
  CHECK(q.J(0.5, 1.1 * Th) < 0);

  // Large-separation limit of the half-mixture projection.
  auto V = zms::make_power_decay(1.0, 3.0);
  double prev = std::numeric_limits<double>::infinity();
  double T_end = 0;
  for (double R : {8.0, 16.0, 32.0, 64.0}) {
    StateQuadrature qv(spec, prof, R, {1, 0, 0}, {3, 0, 0}, &V, cfg);
    T_end = qv.project_T(0.5);
    CHECK(std::abs(T_end - 2.0) < prev * (1.0 + 1e-9));
    prev = std::abs(T_end - 2.0);
  }
  CHECK(T_end == Catch::Approx(2.0).epsilon(0.05));

  // No sign change anywhere: the guard reports a projection failure.
  CHECK_THROWS_AS(
      zms::detail_energy::project_root([](double) { return 1.0; }),
      zms::numerical_error);
}

TEST_CASE("fibering map is unimodal with its maximum at the projection") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  auto st = make_state(prof, 1.0, 8.0);  // T = 1 is the projection (V = 0)
  std::vector<double> tg;
  for (int i = 0; i <= 40; ++i) tg.push_back(0.05 * i);
  auto curve = zms::fibering_curve(spec, st, nullptr, quad_cfg(), tg);
  CHECK(curve.points.front().I == 0.0);
  CHECK(curve.argmax_t == Catch::Approx(1.0).margin(0.05 + 1e-12));
  int peaks = 0;
  for (std::size_t i = 2; i < curve.points.size(); ++i) {
    const double d1 = curve.points[i - 1].I - curve.points[i - 2].I;
    const double d2 = curve.points[i].I - curve.points[i - 1].I;
    if (d1 > 0 && d2 < 0) ++peaks;
  }
  CHECK(peaks == 1);
}

TEST_CASE("energy inequality chain from the fibering structure") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  auto V = zms::make_power_decay(1.0, 3.0);
  auto audit = zms::growth_audit(spec, zms::make_log_grid(1e-4, 1e4, 241));
  const double th = audit.theta_est;
  StateQuadrature q(spec, prof, 23.0, {1, 0, 0}, {3, 0, 0}, &V, quad_cfg());
  for (double lam : {0.0, 0.3, 0.5, 0.8, 1.0})
    for (double T : {0.6, 1.0, 1.7, 2.4}) {
      auto rep = q.report(lam, T);
      const double norm_sq = rep.gradient_sq + rep.potential_term;
      CHECK(rep.I_V - rep.J_V / th >=
            (0.5 - 1.0 / th) * norm_sq - 1e-6 * norm_sq);
    }
}

TEST_CASE("norm equivalence holds on suite states") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  // Sign-changing potential with negative mass at half the threshold.
  zms::PotentialSpec cand;
  cand.family = zms::PotentialFamily::SignChanging;
  cand.N = 3;
  cand.A0 = 1.0;
  cand.kappa = 3.0;
  cand.neg_amplitude = 1.0;
  auto V = zms::make_potential(cand);
  const double factor = V.norm_equivalence_factor();
  CHECK(factor > 0);
  for (double lam : {0.0, 0.5, 1.0})
    for (double R : {4.0, 16.0}) {
      StateQuadrature q(spec, prof, R, {1, 0, 0}, {3, 0, 0}, &V, quad_cfg());
      auto rep = q.report(lam, 1.0);
      CHECK(rep.gradient_sq + rep.potential_term >=
            factor * rep.gradient_sq * (1.0 - 1e-6));
    }
}

TEST_CASE("far-separation additivity of the free energy") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  const double c0 = zms::c0(spec, prof);
  double prev = std::numeric_limits<double>::infinity();
  for (double R : {8.0, 16.0, 32.0, 64.0}) {
    StateQuadrature q(spec, prof, R, {1, 0, 0}, {3, 0, 0}, nullptr,
                      quad_cfg());
    auto rep = q.report(0.5, 2.0);  // w_0 + w_y
    const double eps = q.eps_interaction();
    const double ratio = std::abs(rep.I_V - 2.0 * c0) / eps;
    CHECK(ratio > 0.05);
    CHECK(ratio < 20.0);
    CHECK(ratio < prev * (1.0 + 1e-9));
    prev = ratio;
  }
}

TEST_CASE("upper estimate of the c_V level") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  const auto cfg = quad_cfg();
  const double c0 = zms::c0(spec, prof);
  const std::vector<double> Rg{8, 11, 16, 23, 32, 45, 64};

  // V == 0: translation invariance makes the estimate c_0 exactly.
  auto V0 = zms::make_power_decay(0.0, 3.0);
  const double cv0 = zms::cV_upper_estimate(spec, prof, V0, Rg, cfg);
  CHECK(cv0 == Catch::Approx(c0).epsilon(1e-5));

  // Positive decaying potential: rows decrease toward c_0 from above.
  auto V = zms::make_power_decay(1.0, 3.0);
  std::vector<zms::CvRow> rows;
  const double cv = zms::cV_upper_estimate(spec, prof, V, Rg, cfg, &rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].I_V >= c0 * (1.0 - 1e-6));
    if (i > 0) CHECK(rows[i].I_V < rows[i - 1].I_V);
  }
  CHECK(cv == Catch::Approx(c0).epsilon(0.02));
  CHECK(cv >= c0 * (1.0 - 1e-6));
}
