/// \file quadrature.hpp
/// Radial integrals over R^N with analytic power-law tail correction, and the
/// Sobolev embedding constant with its Rayleigh-quotient cross-check.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "zms/quad1d.hpp"
#include "zms/util.hpp"

namespace zms {

enum class QuadMethod { AxisymmetricProduct, TensorGrid, MonteCarlo };

struct QuadratureConfig {
  QuadMethod method = QuadMethod::AxisymmetricProduct;
  double tol = 1e-6;        ///< target relative error
  double box_radius = 0;    ///< truncation radius; 0 = 4x largest separation
  int max_cells = 12000;    ///< cell budget for the 2-D adaptive engine
  long mc_samples = 2000000;
  std::uint64_t seed = 12345;
  unsigned threads = 0;     ///< 0 = hardware concurrency
};

struct IntegralResult {
  double value = 0;
  double error = 0;  ///< engine error estimate (absolute)
  bool tolerance_met = true;
};

/// |S^{N-1}|, the surface measure of the unit sphere in R^N.
inline double unit_sphere_area(int N) {
  return 2.0 * std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N);
}

/// Integral of a radial function g over R^N. The integrand is evaluated
/// directly on [0, r_max]; the remainder is added through the substitution
/// r = 1/t, which maps the tail onto [0, 1/r_max] (g is evaluated past r_max
/// there, where callers supply their power-law extrapolation). Throws if the
/// local decay exponent of g at r_max is >= -N (truncation/tail unsafe).
inline double radial_integral(const std::function<double(double)>& g,
                              double r_max, int N, double tol = 1e-10) {
  require(N >= 3, "radial_integral: N >= 3 required");
  require(r_max > 0, "radial_integral: r_max > 0 required");
  std::vector<double> splits;
  for (double s = 1.0; s < r_max; s *= 4.0) splits.push_back(s);
  auto integrand = [&](double r) { return g(r) * std::pow(r, N - 1.0); };
  auto core = integrate_adaptive(integrand, 0.0, r_max, 1e-300, tol, 8000,
                                 splits);

  double tail = 0.0;
  const double g_end = g(r_max);
  if (g_end != 0.0) {
    const double r_in = 0.9 * r_max;
    const double g_in = g(r_in);
    if (g_in == 0.0 || (g_in > 0) != (g_end > 0))
      throw numerical_error("radial_integral: cannot fit tail at r_max");
    const double slope = std::log(std::abs(g_end) / std::abs(g_in)) /
                         std::log(r_max / r_in);
    if (slope >= -double(N))
      throw numerical_error(
          "radial_integral: integrand decay exponent " + std::to_string(slope) +
          " >= -N; truncation unsafe");
    const double t_max = 1.0 / r_max;
    auto tf = [&](double t) {
      return t > 0 ? g(1.0 / t) * std::pow(t, -(N + 1.0)) : 0.0;
    };
    auto rest = integrate_adaptive(
        tf, 0.0, t_max, std::max(1e-300, 0.01 * tol * std::abs(core.value)),
        tol, 2000, {0.25 * t_max, 0.5 * t_max});
    tail = rest.value;
  }
  return unit_sphere_area(N) * (core.value + tail);
}

/// Best constant of the embedding D^{1,2} -> L^{2*}:
/// S = pi N (N-2) (Gamma(N/2)/Gamma(N))^{2/N}. Every call is cross-checked
/// against the Rayleigh quotient of the bubble U(x) = (1+|x|^2)^{-(N-2)/2}
/// evaluated by radial_integral; disagreement beyond 1e-6 relative throws.
inline double sobolev_constant(int N) {
  require(N >= 3, "sobolev_constant: N >= 3 required");
  const double S = M_PI * N * (N - 2.0) *
                   std::pow(std::tgamma(0.5 * N) / std::tgamma(double(N)),
                            2.0 / N);

  const double nm2 = N - 2.0;
  const double two_star = 2.0 * N / nm2;
  auto grad_sq = [&](double r) {
    return nm2 * nm2 * r * r * std::pow(1.0 + r * r, -double(N));
  };
  auto u_pow = [&](double r) { return std::pow(1.0 + r * r, -double(N)); };
  const double r_cut = 2e3;
  const double num = radial_integral(grad_sq, r_cut, N, 1e-11);
  const double den = radial_integral(u_pow, r_cut, N, 1e-11);
  const double rayleigh = num / std::pow(den, 2.0 / two_star);
  if (std::abs(rayleigh - S) > 1e-6 * S)
    throw numerical_error(
        "sobolev_constant: Rayleigh-quotient cross-check failed: formula " +
        std::to_string(S) + " vs quotient " + std::to_string(rayleigh));
  return S;
}

}  // namespace zms
