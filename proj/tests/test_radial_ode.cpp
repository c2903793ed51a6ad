#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "zms/radial_ode.hpp"

using zms::NonlinearitySpec;
using zms::RadialProfile;

namespace {
const NonlinearitySpec& spec348() {
  static NonlinearitySpec s(3, 4, 8);
  return s;
}
const RadialProfile& profile348() {
  static RadialProfile p = zms::ground_state(spec348());
  return p;
}
}  // namespace

TEST_CASE("shot classification across the amplitude range") {
  const auto& spec = spec348();

  // Machine-small data: the nonlinearity is negligible, r u cannot stay
  // bounded, so the shot is never a fast-decay candidate.
  auto [t0, c0] = zms::shoot(spec, 1e-6, 1e4);
  CHECK(c0.cls != zms::ShotClass::FastCandidate);

  auto [t1, c1] = zms::shoot(spec, 1e-2, 1e4);
  CHECK(c1.cls == zms::ShotClass::SlowDecay);

  auto [t2, c2] = zms::shoot(spec, 50.0, 1e4);
  CHECK(c2.cls == zms::ShotClass::Crossing);
  CHECK(c2.r_event > 0);
  CHECK(c2.r_event < 1.0);

  CHECK_THROWS_AS(zms::shoot(spec, -1.0, 1e4), std::invalid_argument);
  CHECK_THROWS_AS(zms::shoot(spec, 0.0, 1e4), std::invalid_argument);
}

TEST_CASE("series start controls the singular origin") {
  const auto& spec = spec348();
  const double a = 1.3;
  auto [traj, cls] = zms::shoot(spec, a, 50.0);
  REQUIRE(traj.r.size() > 4);
  // u(r) = a - f(a) r^2 / (2N) + O(r^4), so u''(0) = -f(a)/N.
  const double r1 = traj.r[1];
  const double curv = (a - traj.u[1]) / (r1 * r1);
  CHECK(curv == Catch::Approx(spec.f(a) / 6.0).epsilon(1e-4));
}

TEST_CASE("bracketing pair exists and has opposite classifications") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  const double a = prof.amplitude;
  auto lo = zms::shoot(spec, a * 0.99, 1e4).second.cls;
  auto hi = zms::shoot(spec, a * 1.01, 1e4).second.cls;
  CHECK(lo != hi);
  CHECK(lo != zms::ShotClass::FastCandidate);
  CHECK(hi != zms::ShotClass::FastCandidate);
}

TEST_CASE("ground state profile shape") {
  const auto& prof = profile348();
  REQUIRE(prof.r.size() > 100);
  CHECK(prof.r.front() == 0.0);
  CHECK(prof.u.front() == prof.amplitude);
  CHECK(prof.du.front() == 0.0);

  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    CHECK(prof.u[i] > 0.0);
    CHECK(prof.du[i] <= 0.0);
    if (i > 0) CHECK(prof.u[i] < prof.u[i - 1]);
  }

  // r^{N-2} u is monotone on the tail and sits within 1% of tail_c over the
  // last decade.
  double prev_v = 0;
  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    if (prof.r[i] < 1.0) continue;
    const double v = prof.r[i] * prof.u[i];
    CHECK(v >= prev_v * (1.0 - 1e-9));
    prev_v = v;
    if (prof.r[i] >= prof.r_max() / 10.0)
      CHECK(v == Catch::Approx(prof.tail_c).epsilon(0.01));
  }
  CHECK(prof.tail_c > 0);
  CHECK(std::isfinite(prof.tail_c));
}

TEST_CASE("decay exponents match the fast-decay law") {
  const auto rep = zms::decay_report(profile348());
  CHECK(rep.exponent_u == Catch::Approx(-1.0).margin(0.05));
  CHECK(rep.exponent_du == Catch::Approx(-2.0).margin(0.1));
  CHECK(rep.A2_est > 0);
  CHECK(rep.A2_est <= rep.A3_est);
  CHECK(rep.tail_c > 0);
}

TEST_CASE("interior ODE residual via independent five-point stencils") {
  const auto& spec = spec348();
  const auto& prof = profile348();
  double max_resid = 0, max_f = 0;
  for (std::size_t i = 2; i + 2 < prof.r.size(); i += 3) {
    std::vector<double> xs(prof.r.begin() + i - 2, prof.r.begin() + i + 3);
    auto w = oracle::fd_weights(prof.r[i], xs, 2);
    double upp = 0;
    for (int k = 0; k < 5; ++k) upp += w[k] * prof.u[i - 2 + k];
    const double resid =
        upp + 2.0 / prof.r[i] * prof.du[i] + spec.f(prof.u[i]);
    max_resid = std::max(max_resid, std::abs(resid));
    max_f = std::max(max_f, std::abs(spec.f(prof.u[i])));
  }
  CHECK(max_resid < 1e-6 * max_f);
}

TEST_CASE("profile interpolation and tail extrapolation") {
  const auto& prof = profile348();

  // Node exactness and the centre value.
  CHECK(zms::profile_value(prof, {0, 0, 0}, {0, 0, 0}) == prof.amplitude);
  for (std::size_t i = 10; i < prof.r.size(); i += 97)
    CHECK(prof.value(prof.r[i]) == Catch::Approx(prof.u[i]).epsilon(1e-14));

  // Between nodes the interpolant stays within the bracketing node values
  // (monotone data, monotone interpolant).
  for (std::size_t i = 10; i + 1 < prof.r.size(); i += 53) {
    const double mid = 0.5 * (prof.r[i] + prof.r[i + 1]);
    const double v = prof.value(mid);
    CHECK(v <= prof.u[i]);
    CHECK(v >= prof.u[i + 1]);
  }

  // Beyond r_max: exact power law with the fitted tail coefficient.
  const auto before = prof.extrapolation_count();
  const double rr = 2.0 * prof.r_max();
  CHECK(prof.value(rr) == Catch::Approx(prof.tail_c / rr).epsilon(1e-12));
  CHECK(prof.extrapolation_count() > before);
}

TEST_CASE("profile CSV round trip is bit exact") {
  const auto& prof = profile348();
  const auto path =
      (std::filesystem::temp_directory_path() / "zms_profile_rt.csv").string();
  zms::save_profile(prof, path);
  const auto back = zms::load_profile(path);
  REQUIRE(back.r.size() == prof.r.size());
  CHECK(back.N == prof.N);
  CHECK(back.p == prof.p);
  CHECK(back.q == prof.q);
  CHECK(back.amplitude == prof.amplitude);
  CHECK(back.tail_c == prof.tail_c);
  bool exact = true;
  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    exact = exact && back.r[i] == prof.r[i] && back.u[i] == prof.u[i] &&
            back.du[i] == prof.du[i];
  }
  CHECK(exact);
  std::filesystem::remove(path);
}

TEST_CASE("failure paths report useful context") {
  const auto& spec = spec348();

  // All-crossing sweep range: no bracket; the message carries the table.
  zms::OdeTolerances tol;
  tol.amp_lo = 100.0;
  tol.amp_hi = 1000.0;
  tol.sweep_points = 5;
  try {
    zms::ground_state(spec, tol);
    FAIL("expected no-bracket failure");
  } catch (const zms::numerical_error& e) {
    CHECK(std::string(e.what()).find("Crossing") != std::string::npos);
  }

  // Impossible tolerance demand: step-size underflow.
  zms::OdeTolerances bad;
  bad.rtol = 1e-30;
  bad.atol = 1e-30;
  CHECK_THROWS_AS(zms::shoot(spec, 1.0, 10.0, bad), zms::numerical_error);

  // Tail regression needs at least 20 points.
  RadialProfile tiny;
  tiny.N = 3;
  tiny.amplitude = 1;
  tiny.tail_c = 1;
  tiny.r = {0, 1, 2, 3, 4, 40, 80, 120, 160, 200, 240, 280, 320, 360, 400};
  for (double r : tiny.r) {
    tiny.u.push_back(1.0 / (1 + r));
    tiny.du.push_back(-1.0 / ((1 + r) * (1 + r)));
  }
  tiny.rebuild();
  CHECK_THROWS_AS(zms::decay_report(tiny), std::invalid_argument);
}

TEST_CASE("ground state in four dimensions") {
  NonlinearitySpec spec(4, 3.0, 6.0);  // 2 < 3 < 2* = 4 < 6
  zms::OdeTolerances tol;
  tol.r_max = 1e3;
  auto prof = zms::ground_state(spec, tol);
  auto rep = zms::decay_report(prof);
  CHECK(rep.exponent_u == Catch::Approx(-2.0).margin(0.05));
  CHECK(rep.exponent_du == Catch::Approx(-3.0).margin(0.1));
}
