#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "zms/nonlinearity.hpp"

using zms::NonlinearitySpec;

namespace {
// Closed-form primitive for (p,q) = (4,8): F(s) = (s^4 - log(1+s^4)) / 4.
// For small s the difference cancels; use the series
// u - log(1+u) = u^2/2 - u^3/3 + u^4/4 - ... with u = s^4.
double F_closed_48(double s) {
  const double u = std::pow(s, 4);
  if (u < 1e-4) {
    double term = 0, sign = 1, upow = u * u;
    for (int k = 2; k <= 8; ++k, sign = -sign, upow *= u)
      term += sign * upow / k;
    return 0.25 * term;
  }
  return 0.25 * (u - std::log1p(u));
}
}  // namespace

TEST_CASE("model nonlinearity point values") {
  NonlinearitySpec spec(3, 4, 8);
  CHECK(spec.f(0.0) == 0.0);
  CHECK(spec.f(1.0) == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(spec.fprime(1.0) == Catch::Approx(2.5).epsilon(1e-13));

  // f(1) = 1/2 and f'(1) = (p+q-2)/4 for any admissible exponents.
  for (auto [p, q] : {std::pair{3.5, 7.0}, {5.0, 9.0}, {4.5, 6.5}}) {
    NonlinearitySpec s3(3, p, q);
    CHECK(s3.f(1.0) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(s3.fprime(1.0) == Catch::Approx((p + q - 2) / 4).epsilon(1e-13));
  }
}

TEST_CASE("fprime agrees with central differences") {
  NonlinearitySpec spec(3, 4, 8);
  const double h = 1e-6;
  for (double s : {0.3, 0.9, 1.0, 1.7, 4.0, 25.0}) {
    const double fd = (spec.f(s + h) - spec.f(s - h)) / (2 * h);
    CHECK(spec.fprime(s) == Catch::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("primitive F matches closed form and an independent oracle") {
  NonlinearitySpec spec(3, 4, 8);
  for (double s : {1e-5, 1e-3, 0.1, 0.5, 1.0, 2.0, 7.0, 1e2, 1e5, 3e6}) {
    CHECK(spec.F(s) == Catch::Approx(F_closed_48(s)).epsilon(2e-8));
  }
  // Non-integer exponents: compare against adaptive Simpson.
  NonlinearitySpec gen(3, 3.7, 7.3);
  for (double s : {0.2, 1.0, 3.0, 40.0}) {
    const double ref =
        oracle::integrate([&](double t) { return gen.f(t); }, 0.0, s, 1e-13);
    CHECK(gen.F(s) == Catch::Approx(ref).epsilon(2e-8));
    // The two adaptive schemes each claim ~1e-12 absolute here.
    CHECK(gen.F_direct(s) == Catch::Approx(ref).epsilon(5e-9).margin(1e-11));
  }
}

TEST_CASE("odd extension: f odd, F even, f' even") {
  NonlinearitySpec spec(3, 4, 8);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-4.0, 4.0);
  for (int i = 0; i < 200; ++i) {
    const double s = dist(rng);
    auto plus = zms::eval(spec, s);
    auto minus = zms::eval(spec, -s);
    CHECK(minus.f == -plus.f);
    CHECK(minus.F == plus.F);
    CHECK(minus.fprime == plus.fprime);
  }
  CHECK_THROWS_AS(zms::eval(spec, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(zms::eval(spec, INFINITY), std::invalid_argument);
}

TEST_CASE("logarithmic derivative g") {
  NonlinearitySpec spec(3, 4, 8);
  // Limits: q-1 near zero, p-1 at infinity, and the exact value at s = 1.
  CHECK(zms::logarithmic_derivative(spec, 1e-8) == Catch::Approx(7.0).epsilon(1e-9));
  CHECK(zms::logarithmic_derivative(spec, 1e8) == Catch::Approx(3.0).epsilon(1e-9));
  CHECK(zms::logarithmic_derivative(spec, 1.0) == Catch::Approx(5.0).epsilon(1e-14));
  // Cross-check against s f'(s)/f(s) from eval.
  for (double s : {0.4, 1.0, 2.5, 12.0}) {
    auto ev = zms::eval(spec, s);
    CHECK(zms::logarithmic_derivative(spec, s) ==
          Catch::Approx(s * ev.fprime / ev.f).epsilon(1e-12));
  }
  CHECK_THROWS_AS(zms::logarithmic_derivative(spec, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(zms::logarithmic_derivative(spec, -1.0),
                  std::invalid_argument);
}

TEST_CASE("growth audit on the default exponents") {
  NonlinearitySpec spec(3, 4, 8);
  auto grid = zms::make_log_grid(1e-4, 1e4, 241);
  auto audit = zms::growth_audit(spec, grid);

  CHECK(audit.monotone_ok);
  // g-limits straddle 2*-1 = 5: p-1 = 3 < 5 < q-1 = 7.
  CHECK(audit.g_limits.first > 5.0);
  CHECK(audit.g_limits.second < 5.0);
  CHECK(audit.g_limits.first == Catch::Approx(7.0).epsilon(1e-3));
  CHECK(audit.g_limits.second == Catch::Approx(3.0).epsilon(1e-3));
  // theta >= p for the model family (f(t)/t^{p-1} increasing), and > 2.
  CHECK(audit.theta_est >= spec.p() - 1e-9);
  CHECK(audit.theta_est > 2.0);
  CHECK(zms::audit_passes(spec, audit));

  // (f2) chain on the grid: 0 <= theta F <= f s < f' s^2.
  for (double s : grid) {
    auto ev = zms::eval(spec, s);
    CHECK(ev.F >= 0.0);
    CHECK(audit.theta_est * ev.F <= ev.f * s * (1 + 1e-9));
    CHECK(ev.f * s < ev.fprime * s * s);
  }

  CHECK_THROWS_AS(zms::growth_audit(spec, zms::make_log_grid(1e-4, 1e4, 50)),
                  std::invalid_argument);
  CHECK_THROWS_AS(zms::growth_audit(spec, zms::make_log_grid(1e-2, 1e4, 241)),
                  std::invalid_argument);
}

TEST_CASE("A1 estimate bounds f, F, f' on a fresh random grid") {
  NonlinearitySpec spec(3, 4, 8);
  auto audit = zms::growth_audit(spec, zms::make_log_grid(1e-4, 1e4, 241));
  std::mt19937_64 rng(20240229);
  std::uniform_real_distribution<double> expo(-4.0, 4.0);
  const double slack = 1.0 + 1e-9;
  for (int i = 0; i < 500; ++i) {
    const double s = std::pow(10.0, expo(rng));
    auto ev = zms::eval(spec, s);
    const double p = spec.p(), q = spec.q();
    CHECK(std::abs(ev.f) <=
          audit.A1_est * std::min(std::pow(s, p - 1), std::pow(s, q - 1)) *
              slack);
    CHECK(std::abs(ev.F) <=
          audit.A1_est * std::min(std::pow(s, p), std::pow(s, q)) * slack);
    CHECK(std::abs(ev.fprime) <=
          audit.A1_est * std::min(std::pow(s, p - 2), std::pow(s, q - 2)) *
              slack);
  }
}

TEST_CASE("f(s)/s is strictly increasing on positive grids") {
  NonlinearitySpec spec(3, 4, 8);
  auto grid = zms::make_log_grid(1e-4, 1e4, 300);
  double prev = 0;
  for (double s : grid) {
    const double ratio = spec.f(s) / s;
    CHECK(ratio > prev);
    prev = ratio;
  }
}

TEST_CASE("superadditivity defect constant") {
  NonlinearitySpec spec(3, 4, 8);

  // s = 0 or t = 0: the defect vanishes identically.
  for (double t : {0.1, 0.7, 1.9}) {
    const double defect = spec.F(0.0 + t) - spec.F(0.0) - spec.F(t) -
                          spec.f(0.0) * t - spec.f(t) * 0.0;
    CHECK(defect == Catch::Approx(0.0).margin(1e-18));
  }

  const double c100 = zms::lemma_new_constant(spec, 2.0, 1.0, 100);
  CHECK(std::isfinite(c100));
  CHECK(c100 >= 0.0);

  // Doubling the grid moves the estimate by < 5%.
  const double c200 = zms::lemma_new_constant(spec, 2.0, 1.0, 200);
  CHECK(std::abs(c200 - c100) <= 0.05 * std::max(c200, 1e-300));

  CHECK_THROWS_AS(zms::lemma_new_constant(spec, 2.0, -0.5, 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(zms::lemma_new_constant(spec, 2.0, 6.5, 100),
                  std::invalid_argument);
}

TEST_CASE("spec construction guards") {
  CHECK_THROWS_AS(NonlinearitySpec(2, 4, 8), std::invalid_argument);
  CHECK_THROWS_AS(NonlinearitySpec(3, 2.0, 8), std::invalid_argument);   // p = 2
  CHECK_THROWS_AS(NonlinearitySpec(3, 6.5, 8), std::invalid_argument);   // p > 2*
  CHECK_THROWS_AS(NonlinearitySpec(3, 4, 5.5), std::invalid_argument);   // q < 2*
}
