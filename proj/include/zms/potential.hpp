/// \file potential.hpp
/// Parametric potential families with construction-time validation of the
/// decay and smallness assumptions they are required to satisfy: a positive
/// power-decay envelope, a smooth compact bump, and a sign-changing
/// combination whose negative part must stay below the Sobolev threshold.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "zms/axisym.hpp"
#include "zms/quadrature.hpp"
#include "zms/util.hpp"

namespace zms {

enum class PotentialFamily { PowerDecay, CompactBump, SignChanging };

inline const char* to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::PowerDecay: return "PowerDecay";
    case PotentialFamily::CompactBump: return "CompactBump";
    default: return "SignChanging";
  }
}

/// Smooth bump supported on |t| < 1, normalised to 1 at the origin.
inline double mollifier(double t) {
  const double t2 = t * t;
  if (t2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t2));
}

struct PotentialSpec {
  PotentialFamily family = PotentialFamily::PowerDecay;
  int N = 3;
  double A0 = 1.0;     ///< envelope amplitude
  double kappa = 3.0;  ///< envelope decay exponent, > max{2, N-2}
  double bump_radius = 1.0;
  double neg_amplitude = 0.0;  ///< SignChanging: depth of the negative bump
  double neg_radius = 1.0;
  vec3 center{0, 0, 0};

  double neg_mass = 0.0;     ///< int |V^-|^{N/2}, computed at construction
  double s_threshold = 0.0;  ///< S^{N/2}

  bool is_zero() const {
    return A0 == 0.0 &&
           (family != PotentialFamily::SignChanging || neg_amplitude == 0.0);
  }

  /// Value at distance r from `center` (all shipped families are radial).
  double radial_value(double r) const {
    switch (family) {
      case PotentialFamily::PowerDecay:
        return A0 * std::pow(1.0 + r, -kappa);
      case PotentialFamily::CompactBump:
        return A0 * mollifier(r / bump_radius);
      case PotentialFamily::SignChanging:
        return A0 * std::pow(1.0 + r, -kappa) -
               neg_amplitude * mollifier(r / neg_radius);
    }
    return 0.0;
  }

  double operator()(const vec3& x) const {
    return radial_value(norm(sub(x, center)));
  }

  /// 1 - S^{-1} (int |V^-|^{N/2})^{2/N}: the coefficient in the lower bound
  /// ||u||_V^2 >= factor * ||u||^2. Positive by the construction-time audit.
  double norm_equivalence_factor() const {
    const double S = std::pow(s_threshold, 2.0 / N);
    return 1.0 - std::pow(neg_mass, 2.0 / N) / S;
  }
};

/// Raw negative-part mass int |V^-|^{N/2} of a candidate spec (no validation).
inline double negative_part_mass(const PotentialSpec& cand) {
  if (cand.family != PotentialFamily::SignChanging || cand.neg_amplitude <= 0)
    return 0.0;
  auto vm = [&](double r) {
    const double v = cand.radial_value(r);
    return v < 0 ? std::pow(-v, 0.5 * cand.N) : 0.0;
  };
  // The negative part lives inside the bump support.
  return radial_integral(vm, cand.neg_radius * 1.25, cand.N, 1e-10);
}

/// Validate and return a usable potential. kappa must exceed max{2, N-2} and
/// the negative-part mass must stay strictly below S^{N/2}.
inline PotentialSpec make_potential(PotentialSpec cand) {
  require(cand.N >= 3, "make_potential: N >= 3 required");
  require(cand.A0 >= 0, "make_potential: A0 >= 0 required");
  require(cand.neg_amplitude >= 0, "make_potential: neg amplitude >= 0");
  require(cand.bump_radius > 0 && cand.neg_radius > 0,
          "make_potential: bump radii must be positive");
  const double kmin = std::max(2.0, cand.N - 2.0);
  if (!(cand.kappa > kmin))
    throw std::invalid_argument(
        "make_potential: kappa = " + std::to_string(cand.kappa) +
        " must exceed max{2, N-2} = " + std::to_string(kmin));
  cand.s_threshold = std::pow(sobolev_constant(cand.N), 0.5 * cand.N);
  cand.neg_mass = negative_part_mass(cand);
  if (cand.neg_mass >= cand.s_threshold)
    throw std::invalid_argument(
        "make_potential: negative-part mass " + std::to_string(cand.neg_mass) +
        " >= S^{N/2} = " + std::to_string(cand.s_threshold));
  return cand;
}

inline PotentialSpec make_power_decay(double A0, double kappa, int N = 3) {
  PotentialSpec c;
  c.family = PotentialFamily::PowerDecay;
  c.A0 = A0;
  c.kappa = kappa;
  c.N = N;
  return make_potential(c);
}

struct PotentialAudit {
  double lhalf_mass = 0;    ///< int |V|^{N/2}
  double lr_norm = 0;       ///< (int |V|^N)^{1/N}, with r = N
  double v2_envelope = 0;   ///< max of V(x) (1+|x|)^kappa over the sample set
  double neg_mass = 0;      ///< int |V^-|^{N/2}
  double s_threshold = 0;   ///< S^{N/2}
  bool v1_ok = false;
  bool v2_ok = false;
};

/// Report-only audit of the integrability, envelope and smallness conditions.
inline PotentialAudit audit_V(const PotentialSpec& spec,
                              std::vector<double> sample_radii = {}) {
  PotentialAudit audit;
  audit.s_threshold = spec.s_threshold > 0
                          ? spec.s_threshold
                          : std::pow(sobolev_constant(spec.N), 0.5 * spec.N);
  audit.neg_mass = spec.neg_mass;
  if (spec.is_zero()) {
    audit.v1_ok = audit.v2_ok = true;
    return audit;
  }
  const double half = 0.5 * spec.N;
  const double r_cut = spec.family == PotentialFamily::CompactBump
                           ? spec.bump_radius * 1.25
                           : 1e4;
  audit.lhalf_mass = radial_integral(
      [&](double r) { return std::pow(std::abs(spec.radial_value(r)), half); },
      r_cut, spec.N, 1e-9);
  audit.lr_norm = std::pow(
      radial_integral(
          [&](double r) {
            return std::pow(std::abs(spec.radial_value(r)), double(spec.N));
          },
          r_cut, spec.N, 1e-9),
      1.0 / spec.N);

  if (sample_radii.empty()) {
    for (double r = 0; r <= 4.0; r += 1.0 / 64) sample_radii.push_back(r);
    for (double r : make_log_grid(4.0, 1e4, 200)) sample_radii.push_back(r);
  }
  const double c = norm(spec.center);
  double env = 0;
  for (double r : sample_radii) {
    const double v = spec.radial_value(r);
    if (v > 0) env = std::max(env, v * std::pow(1.0 + c + r, spec.kappa));
  }
  audit.v2_envelope = env;
  audit.v1_ok = std::isfinite(audit.lhalf_mass) &&
                audit.neg_mass < audit.s_threshold;
  audit.v2_ok = env <= spec.A0 * (1.0 + 1e-9) + 1e-300;
  return audit;
}

}  // namespace zms
