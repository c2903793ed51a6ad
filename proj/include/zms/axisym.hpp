/// \file axisym.hpp
/// Adaptive integration over R^N for integrands that are axisymmetric about a
/// line: reduction to cylindrical coordinates (s, rho) about the axis, tensor
/// Gauss-Kronrod cells with error-driven refinement. Also Monte Carlo and
/// graded tensor-grid fallbacks for non-axisymmetric center configurations.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <random>
#include <vector>

#include "zms/quadrature.hpp"
#include "zms/util.hpp"

namespace zms {
namespace axisym {

// 15-point Gauss-Kronrod rule on [-1,1] in ascending node order; odd indices
// form the embedded Gauss-7 rule.
inline constexpr int n_nodes = 15;
inline constexpr double nodes[n_nodes] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
inline constexpr double wk[n_nodes] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double wg[n_nodes] = {
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0,
    0.381830050505119, 0.0, 0.417959183673469, 0.0,
    0.381830050505119, 0.0, 0.279705391489277, 0.0,
    0.129484966168870, 0.0};

struct CellGeom {
  double s0, s1, p0, p1;
};

/// K15xK15 vs G7xG7 over one cell of the meridian half-plane, including the
/// axisymmetric measure rho^{N-2} (the |S^{N-2}| factor is applied by the
/// caller). Returns {K value, |K - G|}.
template <class F>
inline std::pair<double, double> eval_cell(const F& f, int N,
                                           const CellGeom& c) {
  const double sm = 0.5 * (c.s0 + c.s1), sh = 0.5 * (c.s1 - c.s0);
  const double pm = 0.5 * (c.p0 + c.p1), ph = 0.5 * (c.p1 - c.p0);
  double k = 0, g = 0;
  for (int i = 0; i < n_nodes; ++i) {
    const double s = sm + sh * nodes[i];
    double krow = 0, grow = 0;
    for (int j = 0; j < n_nodes; ++j) {
      const double rho = pm + ph * nodes[j];
      const double v = f(s, rho) * std::pow(rho, N - 2.0);
      krow += wk[j] * v;
      grow += wg[j] * v;
    }
    k += wk[i] * krow;
    g += wg[i] * grow;
  }
  const double jac = sh * ph;
  return {k * jac, std::abs(k - g) * jac};
}

/// Error-driven cell refinement against `driver`. Returns the final cell list
/// (sorted) and the driver integral with the |S^{N-2}| factor applied.
template <class F>
inline std::vector<CellGeom> refine_cells(
    const F& driver, int N, double s_lo, double s_hi, double rho_hi,
    std::vector<double> splits_s, std::vector<double> splits_rho, double tol,
    int max_cells, IntegralResult* result) {
  struct cell {
    CellGeom g;
    double val, err;
    bool operator<(const cell& o) const { return err < o.err; }
  };
  auto mk = [&](const CellGeom& g) {
    auto [v, e] = eval_cell(driver, N, g);
    return cell{g, v, e};
  };

  splits_s.push_back(s_lo);
  splits_s.push_back(s_hi);
  std::sort(splits_s.begin(), splits_s.end());
  splits_s.erase(std::unique(splits_s.begin(), splits_s.end()), splits_s.end());
  splits_s.erase(std::remove_if(splits_s.begin(), splits_s.end(),
                                [&](double s) { return s < s_lo || s > s_hi; }),
                 splits_s.end());
  splits_rho.push_back(0.0);
  splits_rho.push_back(rho_hi);
  std::sort(splits_rho.begin(), splits_rho.end());
  splits_rho.erase(std::unique(splits_rho.begin(), splits_rho.end()),
                   splits_rho.end());
  splits_rho.erase(
      std::remove_if(splits_rho.begin(), splits_rho.end(),
                     [&](double p) { return p < 0.0 || p > rho_hi; }),
      splits_rho.end());

  std::priority_queue<cell> heap;
  int count = 0;
  for (std::size_t i = 0; i + 1 < splits_s.size(); ++i)
    for (std::size_t j = 0; j + 1 < splits_rho.size(); ++j) {
      heap.push(mk({splits_s[i], splits_s[i + 1], splits_rho[j],
                    splits_rho[j + 1]}));
      ++count;
    }

  double total = 0, toterr = 0;
  {
    std::priority_queue<cell> copy = heap;
    while (!copy.empty()) {
      total += copy.top().val;
      toterr += copy.top().err;
      copy.pop();
    }
  }

  while (toterr > tol * std::max(std::abs(total), 1e-300) &&
         count < max_cells) {
    cell worst = heap.top();
    heap.pop();
    const CellGeom& w = worst.g;
    CellGeom left = w, right = w;
    if (w.s1 - w.s0 >= w.p1 - w.p0) {
      const double mid = 0.5 * (w.s0 + w.s1);
      left.s1 = mid;
      right.s0 = mid;
    } else {
      const double mid = 0.5 * (w.p0 + w.p1);
      left.p1 = mid;
      right.p0 = mid;
    }
    cell c1 = mk(left), c2 = mk(right);
    total += c1.val + c2.val - worst.val;
    toterr += c1.err + c2.err - worst.err;
    heap.push(c1);
    heap.push(c2);
    ++count;
  }

  std::vector<cell> cells;
  cells.reserve(heap.size());
  while (!heap.empty()) {
    cells.push_back(heap.top());
    heap.pop();
  }
  std::sort(cells.begin(), cells.end(), [](const cell& a, const cell& b) {
    return a.g.s0 != b.g.s0 ? a.g.s0 < b.g.s0 : a.g.p0 < b.g.p0;
  });
  kahan_sum vsum, esum;
  for (const auto& c : cells) {
    vsum.add(c.val);
    esum.add(c.err);
  }
  if (result) {
    const double sphere = unit_sphere_area(N - 1);
    result->value = sphere * vsum.value();
    result->error = sphere * esum.value();
    result->tolerance_met =
        esum.value() <= tol * std::max(std::abs(vsum.value()), 1e-300);
  }
  std::vector<CellGeom> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(c.g);
  return out;
}

inline std::vector<double> center_splits(std::initializer_list<double> centers,
                                         double lo, double hi) {
  std::vector<double> s;
  for (double c : centers)
    for (double off : {-16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0}) {
      const double v = c + off;
      if (v > lo && v < hi) s.push_back(v);
    }
  return s;
}

inline std::vector<double> rho_splits(double rho_hi) {
  std::vector<double> s;
  for (double v = 1.0; v < rho_hi; v *= 4.0) s.push_back(v);
  return s;
}

}  // namespace axisym

using vec3 = std::array<double, 3>;

inline double dot(const vec3& a, const vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline vec3 sub(const vec3& a, const vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline vec3 add(const vec3& a, const vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline vec3 scale(const vec3& a, double c) {
  return {a[0] * c, a[1] * c, a[2] * c};
}
inline double norm(const vec3& a) { return std::sqrt(dot(a, a)); }
inline vec3 cross(const vec3& a, const vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

/// Integral over R^N (N = 3 for point geometry) of kernel(a, b) where
/// a = |x - P1|, b = |x - P2|. Reduces to cylindrical coordinates about the
/// P1-P2 axis; P1 == P2 degenerates to a radial integral.
inline IntegralResult two_center_integral(
    const std::function<double(double, double)>& kernel, const vec3& P1,
    const vec3& P2, const QuadratureConfig& cfg, int N = 3) {
  const double d = norm(sub(P2, P1));
  const double B =
      cfg.box_radius > 0 ? cfg.box_radius : 4.0 * std::max(d, 1.0);
  if (d < 1e-12 * (1.0 + norm(P1))) {
    IntegralResult res;
    res.value = radial_integral([&](double r) { return kernel(r, r); }, B, N,
                                cfg.tol * 1e-2);
    res.error = cfg.tol * std::abs(res.value);
    return res;
  }
  // s measured along the axis from P1.
  auto f = [&](double s, double rho) {
    const double a = std::hypot(s, rho);
    const double b = std::hypot(s - d, rho);
    return kernel(a, b);
  };
  IntegralResult res;
  axisym::refine_cells(f, N, -B, d + B, B, axisym::center_splits({0.0, d}, -B, d + B),
                       axisym::rho_splits(B), cfg.tol, cfg.max_cells, &res);
  return res;
}

/// Monte Carlo companion of two_center_integral in world coordinates, with
/// sampling stratified near both centers. Returns value and 1-sigma error.
inline IntegralResult mc_two_center(
    const std::function<double(double, double)>& kernel, const vec3& P1,
    const vec3& P2, const QuadratureConfig& cfg) {
  const double d = norm(sub(P2, P1));
  const double B = cfg.box_radius > 0 ? cfg.box_radius : 4.0 * std::max(d, 1.0);
  const vec3 mid = scale(add(P1, P2), 0.5);
  const double R_far = 0.5 * d + B;
  const double r_near = 6.0;
  const double vol_far = 4.0 * M_PI / 3.0 * std::pow(R_far, 3);
  const double vol_near = 4.0 * M_PI / 3.0 * std::pow(r_near, 3);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto ball_point = [&](const vec3& c, double R) {
    vec3 dir{gauss(rng), gauss(rng), gauss(rng)};
    const double n = norm(dir);
    const double r = R * std::cbrt(unif(rng));
    return add(c, scale(dir, r / std::max(n, 1e-300)));
  };
  auto density = [&](const vec3& x) {
    double p = 0;
    if (norm(sub(x, mid)) < R_far) p += 0.5 / vol_far;
    if (norm(sub(x, P1)) < r_near) p += 0.25 / vol_near;
    if (norm(sub(x, P2)) < r_near) p += 0.25 / vol_near;
    return p;
  };

  kahan_sum sum, sum2;
  const long n = cfg.mc_samples;
  for (long i = 0; i < n; ++i) {
    const double sel = unif(rng);
    vec3 x;
    if (sel < 0.5)
      x = ball_point(mid, R_far);
    else if (sel < 0.75)
      x = ball_point(P1, r_near);
    else
      x = ball_point(P2, r_near);
    const double val =
        kernel(norm(sub(x, P1)), norm(sub(x, P2))) / density(x);
    sum.add(val);
    sum2.add(val * val);
  }
  IntegralResult res;
  res.value = sum.value() / n;
  const double var = std::max(0.0, sum2.value() / n - res.value * res.value);
  res.error = std::sqrt(var / n);
  res.tolerance_met = res.error <= cfg.tol * std::abs(res.value);
  return res;
}

/// Integral of kernel(r0, r1, r2) with r0 = |x|, r1 = |x - P1|, r2 = |x - P2|.
/// Collinear {0, P1, P2} reduces to the 2-D cylindrical engine; otherwise the
/// configured 3-D method (TensorGrid or MonteCarlo) is used and the error
/// estimate is returned alongside the value.
inline IntegralResult three_center_integral(
    const std::function<double(double, double, double)>& kernel,
    const vec3& P1, const vec3& P2, const QuadratureConfig& cfg, int N = 3);

namespace detail3c {

inline IntegralResult tensor_grid(
    const std::function<double(const vec3&)>& f, const std::vector<vec3>& cs,
    double B) {
  std::array<std::vector<double>, 3> breaks;
  for (int ax = 0; ax < 3; ++ax) {
    double lo = cs[0][ax], hi = cs[0][ax];
    for (const auto& c : cs) {
      lo = std::min(lo, c[ax]);
      hi = std::max(hi, c[ax]);
    }
    lo -= B;
    hi += B;
    std::vector<double>& b = breaks[ax];
    b = {lo, hi};
    for (const auto& c : cs)
      for (double off : {-16.0, -2.0, 0.0, 2.0, 16.0}) {
        const double v = c[ax] + off;
        if (v > lo && v < hi) b.push_back(v);
      }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  using axisym::n_nodes;
  using axisym::nodes;
  using axisym::wg;
  using axisym::wk;
  kahan_sum ksum, diff;
  for (std::size_t ix = 0; ix + 1 < breaks[0].size(); ++ix)
    for (std::size_t iy = 0; iy + 1 < breaks[1].size(); ++iy)
      for (std::size_t iz = 0; iz + 1 < breaks[2].size(); ++iz) {
        const double xm = 0.5 * (breaks[0][ix] + breaks[0][ix + 1]);
        const double xh = 0.5 * (breaks[0][ix + 1] - breaks[0][ix]);
        const double ym = 0.5 * (breaks[1][iy] + breaks[1][iy + 1]);
        const double yh = 0.5 * (breaks[1][iy + 1] - breaks[1][iy]);
        const double zm = 0.5 * (breaks[2][iz] + breaks[2][iz + 1]);
        const double zh = 0.5 * (breaks[2][iz + 1] - breaks[2][iz]);
        double ck = 0, cg = 0;
        for (int a = 0; a < n_nodes; ++a)
          for (int b = 0; b < n_nodes; ++b)
            for (int c = 0; c < n_nodes; ++c) {
              const vec3 x{xm + xh * nodes[a], ym + yh * nodes[b],
                           zm + zh * nodes[c]};
              const double v = f(x);
              ck += wk[a] * wk[b] * wk[c] * v;
              cg += wg[a] * wg[b] * wg[c] * v;
            }
        const double jac = xh * yh * zh;
        ksum.add(ck * jac);
        diff.add(std::abs(ck - cg) * jac);
      }
  IntegralResult res;
  res.value = ksum.value();
  res.error = diff.value();
  return res;
}

inline IntegralResult monte_carlo(const std::function<double(const vec3&)>& f,
                                  const std::vector<vec3>& cs, double B,
                                  const QuadratureConfig& cfg) {
  vec3 centroid{0, 0, 0};
  for (const auto& c : cs) centroid = add(centroid, c);
  centroid = scale(centroid, 1.0 / cs.size());
  double spread = 1.0;
  for (const auto& c : cs) spread = std::max(spread, norm(sub(c, centroid)));
  const double R_far = spread + B;
  const double r_near = 6.0;
  const double vol_far = 4.0 * M_PI / 3.0 * std::pow(R_far, 3);
  const double vol_near = 4.0 * M_PI / 3.0 * std::pow(r_near, 3);
  const double w_near = 0.5 / cs.size();

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto ball_point = [&](const vec3& c, double R) {
    vec3 dir{gauss(rng), gauss(rng), gauss(rng)};
    const double nn = norm(dir);
    const double r = R * std::cbrt(unif(rng));
    return add(c, scale(dir, r / std::max(nn, 1e-300)));
  };
  auto density = [&](const vec3& x) {
    double p = 0;
    if (norm(sub(x, centroid)) < R_far) p += 0.5 / vol_far;
    for (const auto& c : cs)
      if (norm(sub(x, c)) < r_near) p += w_near / vol_near;
    return p;
  };

  kahan_sum sum, sum2;
  const long n = cfg.mc_samples;
  for (long i = 0; i < n; ++i) {
    const double sel = unif(rng);
    vec3 x;
    if (sel < 0.5) {
      x = ball_point(centroid, R_far);
    } else {
      const std::size_t k = std::min<std::size_t>(
          cs.size() - 1, static_cast<std::size_t>((sel - 0.5) / w_near));
      x = ball_point(cs[k], r_near);
    }
    const double val = f(x) / density(x);
    sum.add(val);
    sum2.add(val * val);
  }
  IntegralResult res;
  res.value = sum.value() / n;
  const double var = std::max(0.0, sum2.value() / n - res.value * res.value);
  res.error = std::sqrt(var / n);
  res.tolerance_met = res.error <= cfg.tol * std::abs(res.value);
  return res;
}

}  // namespace detail3c

inline IntegralResult three_center_integral(
    const std::function<double(double, double, double)>& kernel,
    const vec3& P1, const vec3& P2, const QuadratureConfig& cfg, int N) {
  const vec3 origin{0, 0, 0};
  double sep = std::max({norm(P1), norm(P2), norm(sub(P2, P1))});
  const double B = cfg.box_radius > 0 ? cfg.box_radius : 4.0 * std::max(sep, 1.0);
  const double coll = norm(cross(P1, P2));
  const bool collinear = coll <= 1e-9 * std::max(1.0, norm(P1) * norm(P2));

  if (collinear && cfg.method != QuadMethod::MonteCarlo &&
      cfg.method != QuadMethod::TensorGrid) {
    vec3 axis = norm(sub(P2, P1)) > 1e-12 ? sub(P2, P1)
                : (norm(P1) > 1e-12 ? P1 : vec3{1, 0, 0});
    axis = scale(axis, 1.0 / norm(axis));
    const double s1 = dot(P1, axis), s2 = dot(P2, axis);
    const double lo = std::min({0.0, s1, s2}) - B;
    const double hi = std::max({0.0, s1, s2}) + B;
    auto f = [&](double s, double rho) {
      return kernel(std::hypot(s, rho), std::hypot(s - s1, rho),
                    std::hypot(s - s2, rho));
    };
    IntegralResult res;
    axisym::refine_cells(f, N, lo, hi, B,
                         axisym::center_splits({0.0, s1, s2}, lo, hi),
                         axisym::rho_splits(B), cfg.tol, cfg.max_cells, &res);
    return res;
  }

  require(N == 3, "three_center_integral: 3-D methods require N == 3");
  auto fworld = [&](const vec3& x) {
    return kernel(norm(x), norm(sub(x, P1)), norm(sub(x, P2)));
  };
  const std::vector<vec3> cs{origin, P1, P2};
  if (cfg.method == QuadMethod::MonteCarlo)
    return detail3c::monte_carlo(fworld, cs, B, cfg);
  return detail3c::tensor_grid(fworld, cs, B);
}

}  // namespace zms
