#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "zms/asymptotics.hpp"

using zms::make_state;
using zms::NonlinearitySpec;
using zms::QuadratureConfig;
using zms::RadialProfile;
using zms::vec3;

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
const std::vector<double> R_grid{8, 11, 16, 23, 32, 45, 64};
std::vector<double> lambda21() {
  std::vector<double> lg;
  for (int i = 0; i < 21; ++i) lg.push_back(i / 20.0);
  return lg;
}
}  // namespace

TEST_CASE("interaction integral scan") {
  auto rep = zms::epsilon_scan(spec348(), profile348(), R_grid, {1, 0, 0},
                               {3, 0, 0}, quad_cfg());
  // Positive integrand at every separation, error estimate on every row.
  REQUIRE(rep.rows.size() == R_grid.size());
  for (const auto& row : rep.rows) {
    CHECK(row[1] > 0);
    CHECK(row[2] > 0);
    CHECK(row[2] < 1e-3 * row[1]);
  }
  CHECK(rep.fitted.at("slope") == Catch::Approx(-1.0).margin(0.05));
  // Sandwich envelope: 0 < C4 <= C3, and every row obeys it by construction.
  const double c3 = rep.fitted.at("C3_est"), c4 = rep.fitted.at("C4_est");
  CHECK(c4 > 0);
  CHECK(c4 <= c3);
  for (const auto& row : rep.rows) {
    const double pref = row[1] * row[0];
    CHECK(pref >= c4 * (1 - 1e-12));
    CHECK(pref <= c3 * (1 + 1e-12));
  }
}

TEST_CASE("interaction integral is rotation invariant") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  auto cfg = quad_cfg();
  auto kernel = [&](double a, double b) {
    return spec.f(prof.value(a)) * prof.value(b);
  };
  const double R = 16.0;
  auto base = zms::two_center_integral(kernel, {R, 0, 0}, {3 * R, 0, 0}, cfg);

  std::mt19937_64 rng(314159);
  QuadratureConfig mc = cfg;
  mc.mc_samples = 2000000;
  for (int i = 0; i < 3; ++i) {
    auto M = oracle::random_rotation(rng);
    const vec3 p1 = oracle::apply(M, {R, 0, 0});
    const vec3 p2 = oracle::apply(M, {3 * R, 0, 0});
    // Deterministic path: exact by construction.
    auto rot = zms::two_center_integral(kernel, p1, p2, cfg);
    CHECK(rot.value == Catch::Approx(base.value).epsilon(1e-9));
    // Monte Carlo cross-check in world coordinates.
    mc.seed = 1000 + i;
    auto m = zms::mc_two_center(kernel, p1, p2, mc);
    CHECK(std::abs(m.value - base.value) <= 4.0 * m.error);
  }
}

TEST_CASE("mean-value bound scan") {
  std::vector<double> s_grid;
  for (int i = 0; i <= 16; ++i) s_grid.push_back(4.0 * i / 16.0);
  auto rep = zms::tvm_check(spec348(), profile348(), 4.0, s_grid, R_grid,
                            {1, 0, 0}, {3, 0, 0}, quad_cfg());
  CHECK(std::isfinite(rep.fitted.at("C_b_est")));
  CHECK(rep.fitted.at("C_b_est") > 0);
  // One constant works for every R: the per-R maxima agree within 20%.
  CHECK(rep.fitted.at("C_b_spread") < 0.20);
  // s = 1: integrand vanishes identically.
  CHECK(rep.fitted.at("D_at_1_rel") < 1e-9);
  // s = 0 rows: both terms vanish.
  for (const auto& row : rep.rows)
    if (row[1] == 0.0) CHECK(std::abs(row[2]) < 1e-12);
}

TEST_CASE("potential interaction scan") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  auto V = zms::make_power_decay(1.0, 3.0);
  auto rep = zms::vplus_interaction_scan(spec, prof, V, R_grid, {1, 0, 0},
                                         {3, 0, 0}, quad_cfg());
  CHECK(rep.fitted.at("tau_pred") == 2.0);
  for (const auto& row : rep.rows) CHECK(row[1] > 0);
  // The decay is strictly faster than the interaction scale R^{-(N-2)}:
  // the fitted slope clears -(N-2) by at least 0.5.
  CHECK(rep.fitted.at("slope") < -1.5);
  CHECK(rep.fitted.at("margin_over_Nm2") >= 0.5);

  // V == 0: every row vanishes.
  auto V0 = zms::make_power_decay(0.0, 3.0);
  auto zrep = zms::vplus_interaction_scan(spec, prof, V0, R_grid, {1, 0, 0},
                                          {3, 0, 0}, quad_cfg());
  for (const auto& row : zrep.rows) CHECK(row[1] == 0.0);
  CHECK(zrep.fitted.count("all_zero") == 1);
}

TEST_CASE("projected energy landscape") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  auto V = zms::make_power_decay(1.0, 3.0);
  const double c0 = zms::c0(spec, prof);

  for (double R : {32.0, 64.0}) {
    auto rep = zms::landscape(spec, prof, V, R, lambda21(), {1, 0, 0},
                              {3, 0, 0}, quad_cfg());
    REQUIRE(rep.rows.size() == 21);
    // Margin below 2 c_0 and an interior maximum.
    CHECK(rep.fitted.at("eta_est") > 0);
    CHECK(rep.fitted.at("argmax_interior") == 1.0);
    const double am = rep.fitted.at("argmax_lambda");
    CHECK(am > 0.0);
    CHECK(am < 1.0);
    // Boundary rows sit near c_0, the interior near (but below) 2 c_0.
    CHECK(rep.fitted.at("I_lambda0") < 1.1 * c0);
    CHECK(rep.fitted.at("I_lambda1") < 1.1 * c0);
    CHECK(rep.fitted.at("max_I") > 1.8 * c0);
    for (const auto& row : rep.rows) CHECK(row[4] > 0);  // error estimates
  }

  CHECK_THROWS_AS(zms::landscape(spec, prof, V, 64.0, {0.0, 0.5, 1.0},
                                 {1, 0, 0}, {3, 0, 0}, quad_cfg()),
                  std::invalid_argument);
}

TEST_CASE("landscape endpoints coincide for a midpoint-symmetric potential") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  const double R = 16.0;
  // Smooth bump centred at the midpoint of the two bumps: reflection maps
  // the lambda = 0 and lambda = 1 states onto each other and fixes V.
  zms::PotentialSpec cand;
  cand.family = zms::PotentialFamily::CompactBump;
  cand.N = 3;
  cand.A0 = 0.5;
  cand.kappa = 3.0;
  cand.center = {2 * R, 0, 0};
  auto V = zms::make_potential(cand);
  auto rep = zms::landscape(spec, prof, V, R, lambda21(), {1, 0, 0},
                            {3, 0, 0}, quad_cfg());
  CHECK(rep.fitted.at("I_lambda0") ==
        Catch::Approx(rep.fitted.at("I_lambda1")).epsilon(2e-4));
  CHECK(rep.rows.front()[1] ==
        Catch::Approx(rep.rows.back()[1]).epsilon(2e-4));  // T values
}

TEST_CASE("barycenter identities") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  auto cfg = quad_cfg();

  // Radial state centred at the origin maps to 0.
  auto b0 = zms::barycenter(spec, make_state(prof, 1.0, 0.0), cfg);
  CHECK(zms::norm(b0) < 0.02);

  // Translation: w(. - z) maps to z.
  {
    auto b = zms::barycenter(spec, make_state(prof, 1.0, 3.0), cfg);
    CHECK(b[0] == Catch::Approx(3.0).margin(0.02));
    CHECK(std::abs(b[1]) < 0.02);
    CHECK(std::abs(b[2]) < 0.02);
  }
  std::mt19937_64 rng(2718);
  for (int i = 0; i < 3; ++i) {
    auto M = oracle::random_rotation(rng);
    const vec3 y0 = oracle::apply(M, {1, 0, 0});
    const vec3 y = oracle::apply(M, {3, 0, 0});
    const double R = 5.0 + 3.0 * i;
    auto b = zms::barycenter(spec, make_state(prof, 1.0, R, y0, y), cfg);
    const vec3 target = zms::scale(y0, R);
    CHECK(zms::norm(zms::sub(b, target)) < 0.02 * std::max(1.0, R));
  }

  // Rotation equivariance of a genuinely two-bump state.
  {
    auto base = zms::barycenter(spec, make_state(prof, 0.3, 8.0), cfg);
    for (int i = 0; i < 3; ++i) {
      auto M = oracle::random_rotation(rng);
      const vec3 y0 = oracle::apply(M, {1, 0, 0});
      const vec3 y = oracle::apply(M, {3, 0, 0});
      auto b = zms::barycenter(spec, make_state(prof, 0.3, 8.0, y0, y), cfg);
      const vec3 expect = oracle::apply(M, base);
      CHECK(zms::norm(zms::sub(b, expect)) < 0.02 * std::max(1.0, zms::norm(base)));
    }
  }

  // Symmetric half-mixture maps to the midpoint of the two centers.
  {
    const double R = 16.0;
    auto b = zms::barycenter(spec, make_state(prof, 0.5, R), cfg);
    CHECK(b[0] == Catch::Approx(2.0 * R).margin(0.05));
  }

  // The zero state is rejected.
  CHECK_THROWS_AS(
      zms::barycenter(spec, make_state(prof, 0.5, 8.0, {1, 0, 0}, {3, 0, 0}, 0.0),
                      cfg),
      std::invalid_argument);
}

TEST_CASE("scan validation guards") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  CHECK_THROWS_AS(zms::epsilon_scan(spec, prof, {8, 16, 32}, {1, 0, 0},
                                    {3, 0, 0}, quad_cfg()),
                  std::invalid_argument);
  CHECK_THROWS_AS(zms::epsilon_scan(spec, prof, {8, 9, 10, 11, 12},
                                    {1, 0, 0}, {3, 0, 0}, quad_cfg()),
                  std::invalid_argument);
  CHECK_THROWS_AS(zms::tvm_check(spec, prof, 0.5, {0.0, 0.2}, R_grid,
                                 {1, 0, 0}, {3, 0, 0}, quad_cfg()),
                  std::invalid_argument);
}
