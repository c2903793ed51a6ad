/// \file radial_ode.hpp
/// Shooting solver for the radial profile of the limit equation
///
///     u'' + (N-1)/r u' + f(u) = 0,   u(0) = a,  u'(0) = 0.
///
/// Trajectories fall into a dichotomy in the shooting amplitude a: on one
/// side u crosses zero at finite radius, on the other it stays positive but
/// r^{N-2} u(r) diverges (slow decay). The unique fast-decaying profile sits
/// on the boundary; bisection on a pins it down. Which side is which is
/// detected from a coarse sweep, not hard-coded.
///
/// Far from the origin the integration runs in the transformed variable
/// v = r^{N-2} u, which obeys v'' + (3-N)/r v' + r^{N-2} f(r^{-(N-2)} v) = 0
/// and tends to a constant on fast-decay trajectories. Near the boundary
/// amplitude both detectors can stay silent up to r_max; those shots are
/// assigned a side by the sign of v'(r_max), which flips at the critical
/// amplitude to machine resolution.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "zms/fit.hpp"
#include "zms/interp.hpp"
#include "zms/nonlinearity.hpp"
#include "zms/util.hpp"

namespace zms {

enum class ShotClass { Crossing, SlowDecay, FastCandidate };

inline const char* to_string(ShotClass c) {
  switch (c) {
    case ShotClass::Crossing: return "Crossing";
    case ShotClass::SlowDecay: return "SlowDecay";
    default: return "FastCandidate";
  }
}

struct ShotOutcome {
  ShotClass cls = ShotClass::FastCandidate;
  double r_event = 0;  ///< radius at which the classification triggered
};

struct Trajectory {
  std::vector<double> r, u, du;
};

struct OdeTolerances {
  double rtol = 1e-12;
  double atol = 1e-14;
  double r_max = 1e4;
  double r_switch = 10.0;   ///< hand-over radius to the v = r^{N-2}u form
  double amp_lo = 1e-3;     ///< coarse sweep range
  double amp_hi = 1e3;
  int sweep_points = 61;
  double bisect_rel = 1e-12;
  double slow_factor = 10.0;  ///< slow decay: v exceeds this x running min
  double slow_r_min = 10.0;   ///< running min tracked only past this radius
};

struct RadialProfile {
  int N = 3;
  double p = 4, q = 8;
  std::vector<double> r, u, du;
  double amplitude = 0;  ///< u(0)
  double tail_c = 0;     ///< fitted limit of r^{N-2} u(r)

  double r_max() const { return r.back(); }

  double value(double radius) const {
    if (radius >= r.back()) {
      ++*extrapolations_;
      return tail_c * std::pow(radius, -(N - 2.0));
    }
    return u_itp_(radius);
  }

  double deriv(double radius) const {
    if (radius >= r.back()) {
      ++*extrapolations_;
      return -(N - 2.0) * tail_c * std::pow(radius, -(N - 1.0));
    }
    return du_itp_(radius);
  }

  std::uint64_t extrapolation_count() const { return *extrapolations_; }

  /// Pointwise multiple c*u of the stored data (not a solution for c != 1).
  RadialProfile scaled(double c) const {
    RadialProfile s(*this);
    for (auto& v : s.u) v *= c;
    for (auto& v : s.du) v *= c;
    s.amplitude *= c;
    s.tail_c *= c;
    s.rebuild();
    return s;
  }

  void rebuild() {
    u_itp_ = pchip(r, u);
    du_itp_ = pchip(r, du);
    if (!extrapolations_)
      extrapolations_ = std::make_shared<std::atomic<std::uint64_t>>(0);
  }

 private:
  pchip u_itp_, du_itp_;
  std::shared_ptr<std::atomic<std::uint64_t>> extrapolations_ =
      std::make_shared<std::atomic<std::uint64_t>>(0);
};

/// omega(|x - center|) with power-law extrapolation past the stored grid.
inline double profile_value(const RadialProfile& prof,
                            const std::array<double, 3>& x,
                            const std::array<double, 3>& center) {
  const double dx = x[0] - center[0], dy = x[1] - center[1],
               dz = x[2] - center[2];
  return prof.value(std::sqrt(dx * dx + dy * dy + dz * dz));
}

namespace detail {

// Dormand-Prince 5(4) coefficients.
struct dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                          b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

using state2 = std::array<double, 2>;

/// One adaptive RK5(4) step of y' = rhs(r, y). On success advances (r, y, k1)
/// and returns true; on rejection shrinks h and returns false.
template <class Rhs>
inline bool rk45_step(const Rhs& rhs, double& r, state2& y, state2& k1,
                      double& h, double rtol, double atol) {
  using d = dopri5;
  state2 k2, k3, k4, k5, k6, k7, t, y5;
  auto stage = [&](double dr, const state2& yy, state2& k) { k = rhs(r + dr, yy); };

  t = {y[0] + h * d::a21 * k1[0], y[1] + h * d::a21 * k1[1]};
  stage(d::c2 * h, t, k2);
  t = {y[0] + h * (d::a31 * k1[0] + d::a32 * k2[0]),
       y[1] + h * (d::a31 * k1[1] + d::a32 * k2[1])};
  stage(d::c3 * h, t, k3);
  t = {y[0] + h * (d::a41 * k1[0] + d::a42 * k2[0] + d::a43 * k3[0]),
       y[1] + h * (d::a41 * k1[1] + d::a42 * k2[1] + d::a43 * k3[1])};
  stage(d::c4 * h, t, k4);
  t = {y[0] + h * (d::a51 * k1[0] + d::a52 * k2[0] + d::a53 * k3[0] +
                   d::a54 * k4[0]),
       y[1] + h * (d::a51 * k1[1] + d::a52 * k2[1] + d::a53 * k3[1] +
                   d::a54 * k4[1])};
  stage(d::c5 * h, t, k5);
  t = {y[0] + h * (d::a61 * k1[0] + d::a62 * k2[0] + d::a63 * k3[0] +
                   d::a64 * k4[0] + d::a65 * k5[0]),
       y[1] + h * (d::a61 * k1[1] + d::a62 * k2[1] + d::a63 * k3[1] +
                   d::a64 * k4[1] + d::a65 * k5[1])};
  stage(h, t, k6);
  y5 = {y[0] + h * (d::b1 * k1[0] + d::b3 * k3[0] + d::b4 * k4[0] +
                    d::b5 * k5[0] + d::b6 * k6[0]),
        y[1] + h * (d::b1 * k1[1] + d::b3 * k3[1] + d::b4 * k4[1] +
                    d::b5 * k5[1] + d::b6 * k6[1])};
  stage(h, y5, k7);

  double errn = 0;
  for (int i = 0; i < 2; ++i) {
    const double e = h * (d::e1 * k1[i] + d::e3 * k3[i] + d::e4 * k4[i] +
                          d::e5 * k5[i] + d::e6 * k6[i] + d::e7 * k7[i]);
    const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
    errn = std::max(errn, std::abs(e) / sc);
  }
  if (errn <= 1.0) {
    r += h;
    y = y5;
    k1 = k7;  // FSAL
    h *= std::clamp(0.9 * std::pow(std::max(errn, 1e-10), -0.2), 1.0, 5.0);
    return true;
  }
  h *= std::clamp(0.9 * std::pow(errn, -0.2), 0.2, 0.9);
  return false;
}

struct shot_internal {
  ShotOutcome outcome;
  Trajectory traj;
  double v_end = 0, dv_end = 0;  // v = r^{N-2} u and v' at the final radius
};

/// Integrate a single shot. When `nodes` is given, u and du are recorded
/// exactly at those radii (nodes[0] may be 0); otherwise each accepted step
/// is recorded.
inline shot_internal integrate_shot(const NonlinearitySpec& spec,
                                    double amplitude, const OdeTolerances& tol,
                                    double r_max,
                                    const std::vector<double>* nodes) {
  require(amplitude > 0 && std::isfinite(amplitude),
          "shoot: amplitude > 0 required");
  const int N = spec.N();
  const double nm2 = N - 2.0;
  const double fa = spec.f(amplitude);

  shot_internal out;
  auto record = [&](double r, double u, double du) {
    out.traj.r.push_back(r);
    out.traj.u.push_back(u);
    out.traj.du.push_back(du);
  };

  // Series start; u(r) = a - f(a) r^2/(2N) + f(a) f'(a) r^4 / (8N(N+2)).
  const double scale =
      fa > 0 ? std::sqrt(2.0 * N * amplitude / fa) : 1.0;
  const double r0 = std::min(1e-3, 1e-3 * scale);
  auto series_u = [&](double r) {
    return amplitude - fa * r * r / (2.0 * N) +
           fa * spec.fprime(amplitude) * std::pow(r, 4) / (8.0 * N * (N + 2));
  };
  auto series_du = [&](double r) {
    return -fa * r / N +
           fa * spec.fprime(amplitude) * std::pow(r, 3) / (2.0 * N * (N + 2));
  };

  std::size_t node_idx = 0;
  if (nodes) {
    while (node_idx < nodes->size() && (*nodes)[node_idx] <= r0) {
      const double rn = (*nodes)[node_idx];
      record(rn, rn == 0.0 ? amplitude : series_u(rn),
             rn == 0.0 ? 0.0 : series_du(rn));
      ++node_idx;
    }
  }

  auto rhs_u = [&](double r, const state2& y) -> state2 {
    return {y[1], -(N - 1.0) / r * y[1] - spec.f(y[0])};
  };
  auto rhs_v = [&](double r, const state2& z) -> state2 {
    const double u = z[0] * std::pow(r, -nm2);
    return {z[1], -(3.0 - N) / r * z[1] - std::pow(r, nm2) * spec.f(u)};
  };

  double r = r0;
  bool vform = false;
  state2 y{series_u(r0), series_du(r0)};
  double h = 0.1 * std::min(r0, scale);
  double vmin = std::numeric_limits<double>::infinity();
  bool have_vmin = false;
  if (!nodes) record(r, y[0], y[1]);

  auto as_u = [&](double rr, const state2& st) -> state2 {
    if (!vform) return st;
    const double rp = std::pow(rr, nm2);
    return {st[0] / rp, st[1] / rp - nm2 * st[0] / (rp * rr)};
  };

  state2 k1 = vform ? rhs_v(r, y) : rhs_u(r, y);
  while (r < r_max) {
    // Never step past the next event boundary: node, phase switch, r_max.
    double limit = r_max;
    if (!vform && tol.r_switch > r) limit = std::min(limit, tol.r_switch);
    if (nodes && node_idx < nodes->size())
      limit = std::min(limit, (*nodes)[node_idx]);
    double hstep = std::min(h, limit - r);
    if (hstep <= 1e-13 * std::max(r, 1.0)) {
      if (limit - r > 1e-13 * std::max(r, 1.0))
        throw numerical_error("radial_ode: step-size underflow at r = " +
                              std::to_string(r));
      hstep = limit - r;  // snap
    }

    const double r_prev = r;
    const state2 y_prev = y;
    double htry = hstep;
    bool ok = false;
    while (!ok) {
      double hh = htry;
      ok = vform ? rk45_step(rhs_v, r, y, k1, hh, tol.rtol, tol.atol)
                 : rk45_step(rhs_u, r, y, k1, hh, tol.rtol, tol.atol);
      if (!ok) {
        htry = hh;
        if (htry < 1e-13 * std::max(r, 1.0))
          throw numerical_error("radial_ode: step-size underflow at r = " +
                                std::to_string(r));
      } else {
        h = hh;  // controller suggestion for the next step
      }
    }

    const state2 uy = as_u(r, y);
    const state2 uy_prev = as_u(r_prev, y_prev);

    // Crossing event.
    if (uy[0] <= 0.0) {
      const double frac = uy_prev[0] / (uy_prev[0] - uy[0]);
      out.outcome = {ShotClass::Crossing, r_prev + frac * (r - r_prev)};
      if (!nodes) record(r, uy[0], uy[1]);
      out.v_end = std::pow(r, nm2) * uy[0];
      out.dv_end = std::pow(r, nm2) * (uy[1] + nm2 * uy[0] / r);
      return out;
    }
    // Slow-decay event: r^{N-2} u grows well past its running minimum.
    const double v = std::pow(r, nm2) * uy[0];
    if (r > tol.slow_r_min) {
      if (!have_vmin || v < vmin) {
        vmin = v;
        have_vmin = true;
      }
      if (v > tol.slow_factor * vmin) {
        out.outcome = {ShotClass::SlowDecay, r};
        if (!nodes) record(r, uy[0], uy[1]);
        out.v_end = v;
        out.dv_end = std::pow(r, nm2) * (uy[1] + nm2 * uy[0] / r);
        return out;
      }
    }

    if (nodes) {
      while (node_idx < nodes->size() &&
             r >= (*nodes)[node_idx] - 1e-12 * std::max(r, 1.0)) {
        record((*nodes)[node_idx], uy[0], uy[1]);
        ++node_idx;
      }
    } else {
      record(r, uy[0], uy[1]);
    }

    if (!vform && r >= tol.r_switch - 1e-12 * tol.r_switch) {
      const double rp = std::pow(r, nm2);
      y = {rp * uy[0], rp * (uy[1] + nm2 * uy[0] / r)};
      vform = true;
      k1 = rhs_v(r, y);
      h = std::max(h, 0.05 * r);
    }
  }

  const state2 uy = as_u(r, y);
  out.outcome = {ShotClass::FastCandidate, r};
  out.v_end = std::pow(r, nm2) * uy[0];
  out.dv_end = std::pow(r, nm2) * (uy[1] + nm2 * uy[0] / r);
  return out;
}

/// Output grid for the final profile: uniform spacing near the bump, then
/// geometric out to r_max (about 32 nodes per octave, >= 100 per decade).
inline std::vector<double> profile_grid(double r_max) {
  std::vector<double> g{0.0};
  const double h = 1.0 / 128.0;
  const double uniform_end = std::min(16.0, r_max);
  for (double r = h; r <= uniform_end + 0.5 * h; r += h) g.push_back(r);
  const double ratio = std::pow(2.0, 1.0 / 32.0);
  for (double r = g.back() * ratio; r < r_max; r *= ratio) g.push_back(r);
  if (g.back() < r_max) g.push_back(r_max);
  return g;
}

}  // namespace detail

/// Integrate one shot and classify it.
inline std::pair<Trajectory, ShotOutcome> shoot(const NonlinearitySpec& spec,
                                                double amplitude, double r_max,
                                                const OdeTolerances& tol = {}) {
  auto s = detail::integrate_shot(spec, amplitude, tol, r_max, nullptr);
  return {std::move(s.traj), s.outcome};
}

/// Fast-decaying ground-state profile by amplitude bisection.
///
/// A coarse sweep over a log grid of amplitudes establishes a bracket with
/// opposite classifications; the bracket is then bisected to relative width
/// `bisect_rel`. FastCandidate shots inside the shrinking bracket are assigned
/// a side by the sign of v'(r_max).
inline RadialProfile ground_state(const NonlinearitySpec& spec,
                                  const OdeTolerances& tol = {}) {
  enum side { crossing_side, slow_side };
  auto side_of = [&](const detail::shot_internal& s) {
    if (s.outcome.cls == ShotClass::Crossing) return crossing_side;
    if (s.outcome.cls == ShotClass::SlowDecay) return slow_side;
    return s.dv_end > 0 ? slow_side : crossing_side;
  };
  auto classify = [&](double a) {
    return detail::integrate_shot(spec, a, tol, tol.r_max, nullptr);
  };

  // Coarse sweep.
  std::vector<double> amps =
      make_log_grid(tol.amp_lo, tol.amp_hi, tol.sweep_points);
  std::vector<ShotClass> cls(amps.size());
  std::vector<side> sides(amps.size());
  std::string table;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    auto s = classify(amps[i]);
    cls[i] = s.outcome.cls;
    sides[i] = side_of(s);
    table += "  a = " + std::to_string(amps[i]) + "  ->  " +
             to_string(cls[i]) + "\n";
  }
  std::size_t lo_idx = amps.size();
  for (std::size_t i = 0; i + 1 < amps.size(); ++i) {
    if (sides[i] != sides[i + 1] && cls[i] != ShotClass::FastCandidate &&
        cls[i + 1] != ShotClass::FastCandidate) {
      lo_idx = i;
      break;
    }
  }
  if (lo_idx == amps.size())
    throw numerical_error(
        "ground_state: no bracketing pair of amplitudes found; sweep table:\n" +
        table);

  double lo = amps[lo_idx], hi = amps[lo_idx + 1];
  side lo_side = sides[lo_idx];
  while ((hi - lo) / (0.5 * (hi + lo)) > tol.bisect_rel) {
    const double mid = 0.5 * (lo + hi);
    if (side_of(classify(mid)) == lo_side)
      lo = mid;
    else
      hi = mid;
  }

  const double a_star = 0.5 * (lo + hi);
  auto nodes = detail::profile_grid(tol.r_max);
  auto fin = detail::integrate_shot(spec, a_star, tol, tol.r_max, &nodes);
  if (fin.outcome.cls != ShotClass::FastCandidate)
    throw numerical_error("ground_state: converged amplitude failed to reach "
                          "r_max as a fast-decay candidate");

  RadialProfile prof;
  prof.N = spec.N();
  prof.p = spec.p();
  prof.q = spec.q();
  prof.r = std::move(fin.traj.r);
  prof.u = std::move(fin.traj.u);
  prof.du = std::move(fin.traj.du);
  prof.amplitude = a_star;

  // tail_c: least-squares constant fit of r^{N-2} u over the last decade.
  {
    kahan_sum acc;
    std::size_t cnt = 0;
    const double nm2 = spec.N() - 2.0;
    for (std::size_t i = 0; i < prof.r.size(); ++i) {
      if (prof.r[i] >= tol.r_max / 10.0) {
        acc.add(std::pow(prof.r[i], nm2) * prof.u[i]);
        ++cnt;
      }
    }
    prof.tail_c = acc.value() / cnt;
  }
  prof.rebuild();

  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    if (prof.u[i] <= 0)
      throw numerical_error("ground_state: profile not positive");
    if (i > 0 && prof.u[i] >= prof.u[i - 1])
      throw numerical_error("ground_state: profile not strictly decreasing");
    if (prof.du[i] > 0)
      throw numerical_error("ground_state: positive derivative in profile");
  }
  return prof;
}

struct DecayReport {
  double exponent_u = 0;   ///< log-log slope of u over the last decade
  double exponent_du = 0;  ///< log-log slope of |u'| over the last decade
  double tail_c = 0;
  double A2_est = 0;  ///< min of u(r) (1+r)^{N-2} over the grid
  double A3_est = 0;  ///< max of u(r) (1+r)^{N-2} over the grid
};

inline DecayReport decay_report(const RadialProfile& prof) {
  std::vector<double> rs, us, dus;
  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    if (prof.r[i] >= prof.r_max() / 10.0) {
      rs.push_back(prof.r[i]);
      us.push_back(prof.u[i]);
      dus.push_back(std::abs(prof.du[i]));
    }
  }
  require(rs.size() >= 20, "decay_report: need >= 20 tail points");
  DecayReport rep;
  rep.exponent_u = fit_loglog(rs, us).slope;
  rep.exponent_du = fit_loglog(rs, dus).slope;
  rep.tail_c = prof.tail_c;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    const double env = prof.u[i] * std::pow(1.0 + prof.r[i], prof.N - 2.0);
    lo = std::min(lo, env);
    hi = std::max(hi, env);
  }
  rep.A2_est = lo;
  rep.A3_est = hi;
  return rep;
}

/// Profile CSV: key,value header rows, then r,u,du at 17 significant digits
/// (bit-exact round trip).
inline void save_profile(const RadialProfile& prof, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw numerical_error("save_profile: cannot open " + path);
  std::fprintf(fp, "N,%d\n", prof.N);
  std::fprintf(fp, "p,%.17g\n", prof.p);
  std::fprintf(fp, "q,%.17g\n", prof.q);
  std::fprintf(fp, "amplitude,%.17g\n", prof.amplitude);
  std::fprintf(fp, "tail_c,%.17g\n", prof.tail_c);
  std::fprintf(fp, "r,u,du\n");
  for (std::size_t i = 0; i < prof.r.size(); ++i)
    std::fprintf(fp, "%.17g,%.17g,%.17g\n", prof.r[i], prof.u[i], prof.du[i]);
  std::fclose(fp);
}

inline RadialProfile load_profile(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "r");
  if (!fp) throw numerical_error("load_profile: cannot open " + path);
  RadialProfile prof;
  char line[256];
  auto next = [&]() -> std::string {
    if (!std::fgets(line, sizeof line, fp)) return {};
    return line;
  };
  prof.N = std::stoi(next().substr(2));
  prof.p = std::strtod(next().substr(2).c_str(), nullptr);
  prof.q = std::strtod(next().substr(2).c_str(), nullptr);
  prof.amplitude = std::strtod(next().substr(10).c_str(), nullptr);
  prof.tail_c = std::strtod(next().substr(7).c_str(), nullptr);
  next();  // column header
  while (std::fgets(line, sizeof line, fp)) {
    double r, u, du;
    if (std::sscanf(line, "%lg,%lg,%lg", &r, &u, &du) == 3) {
      prof.r.push_back(r);
      prof.u.push_back(u);
      prof.du.push_back(du);
    }
  }
  std::fclose(fp);
  require(prof.r.size() >= 2, "load_profile: no data rows in " + path);
  prof.rebuild();
  return prof;
}

}  // namespace zms
