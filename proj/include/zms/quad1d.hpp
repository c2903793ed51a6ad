/// \file quad1d.hpp
/// Adaptive 1-D integration based on the 15-point Gauss–Kronrod rule.
#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "zms/util.hpp"

namespace zms {
namespace gk15 {

// Kronrod abscissae on [-1,1] (positive half; the rule is symmetric).
// Indices 1,3,5,7 of the full ascending table are the embedded Gauss-7 nodes.
inline constexpr double xk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

/// One Gauss–Kronrod panel on [a,b]: returns {K15 value, |K15-G7| estimate}.
template <class F>
inline std::pair<double, double> panel(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fk = 0.0, fg = 0.0;
  const double f0 = f(c);
  fk += wk[7] * f0;
  fg += wg[3] * f0;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * xk[i];
    const double fsum = f(c - dx) + f(c + dx);
    fk += wk[i] * fsum;
    if (i % 2 == 1) fg += wg[i / 2] * fsum;
  }
  return {fk * h, std::abs((fk - fg) * h)};
}

}  // namespace gk15

struct quad_result {
  double value = 0;
  double error = 0;
  bool converged = true;
};

/// Globally adaptive integration of f over [a,b]. `splits` seeds the initial
/// partition (useful when the integrand has known scales or kinks).
template <class F>
inline quad_result integrate_adaptive(const F& f, double a, double b,
                                      double abs_tol, double rel_tol,
                                      int max_panels = 4000,
                                      const std::vector<double>& splits = {}) {
  struct seg {
    double a, b, value, error;
    bool operator<(const seg& o) const { return error < o.error; }
  };
  std::priority_queue<seg> heap;
  double total = 0, toterr = 0;
  int panels = 0;

  std::vector<double> pts{a};
  for (double s : splits)
    if (s > a && s < b) pts.push_back(s);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto [v, e] = gk15::panel(f, pts[i], pts[i + 1]);
    heap.push({pts[i], pts[i + 1], v, e});
    total += v;
    toterr += e;
    ++panels;
  }

  auto tol = [&] { return std::max(abs_tol, rel_tol * std::abs(total)); };
  while (toterr > tol() && panels < max_panels) {
    seg worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      heap.push(worst);  // interval at machine resolution
      break;
    }
    auto [v1, e1] = gk15::panel(f, worst.a, mid);
    auto [v2, e2] = gk15::panel(f, mid, worst.b);
    total += v1 + v2 - worst.value;
    toterr += e1 + e2 - worst.error;
    heap.push({worst.a, mid, v1, e1});
    heap.push({mid, worst.b, v2, e2});
    ++panels;
  }

  // Recompute the value by summing panels in ascending order; this removes
  // the drift accumulated by incremental updates above.
  std::vector<seg> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(),
            [](const seg& l, const seg& r) { return l.a < r.a; });
  kahan_sum sum, errsum;
  for (const auto& s : all) {
    sum.add(s.value);
    errsum.add(s.error);
  }
  quad_result out;
  out.value = sum.value();
  out.error = errsum.value();
  out.converged = out.error <= std::max(abs_tol, rel_tol * std::abs(out.value));
  return out;
}

}  // namespace zms
