/// \file nonlinearity.hpp
/// Model double-power nonlinearity f(s) = s^{q-1} / (1 + s^{q-p}) with its
/// primitive F, derivative f', and the growth audits that check the standing
/// assumptions on (f, F, f') numerically.
///
/// The exponents satisfy 2 < p < 2N/(N-2) < q, so f grows like s^{q-1} near
/// zero (supercritical) and like s^{p-1} at infinity (subcritical). f is
/// extended to negative arguments as an odd function; F is then even.
#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "zms/interp.hpp"
#include "zms/quad1d.hpp"
#include "zms/util.hpp"

namespace zms {

struct f_eval {
  double F = 0;       ///< primitive, F(s) = int_0^s f
  double f = 0;       ///< the nonlinearity itself
  double fprime = 0;  ///< pointwise derivative f'(s)
};

class NonlinearitySpec {
 public:
  NonlinearitySpec(int N, double p, double q) : N_(N), p_(p), q_(q) {
    require(N >= 3, "NonlinearitySpec: N >= 3 required");
    require_finite(p, "p");
    require_finite(q, "q");
    const double crit = 2.0 * N / (N - 2.0);
    require(2.0 < p && p < crit && crit < q,
            "NonlinearitySpec: need 2 < p < 2N/(N-2) < q");
    build_cache();
  }

  int N() const { return N_; }
  double p() const { return p_; }
  double q() const { return q_; }
  double two_star() const { return 2.0 * N_ / (N_ - 2.0); }

  /// f(s); odd in s. Split at |s| = 1 so no large power overflows.
  double f(double s) const {
    const double a = std::abs(s);
    if (a == 0.0) return 0.0;
    double v;
    if (a <= 1.0)
      v = std::pow(a, q_ - 1.0) / (1.0 + std::pow(a, q_ - p_));
    else
      v = std::pow(a, p_ - 1.0) / (1.0 + std::pow(a, p_ - q_));
    return s < 0 ? -v : v;
  }

  /// f'(s); even in s. Closed form from the quotient rule.
  double fprime(double s) const {
    const double a = std::abs(s);
    if (a == 0.0) return 0.0;
    if (a <= 1.0) {
      const double w = std::pow(a, q_ - p_);
      return std::pow(a, q_ - 2.0) * ((q_ - 1.0) + (p_ - 1.0) * w) /
             ((1.0 + w) * (1.0 + w));
    }
    const double w = std::pow(a, p_ - q_);  // <= 1
    return std::pow(a, p_ - 2.0) * ((q_ - 1.0) * w + (p_ - 1.0)) /
           ((1.0 + w) * (1.0 + w));
  }

  /// Primitive F(s) from the log-log cache; asymptotic branches outside it.
  double F(double s) const {
    const double a = std::abs(s);
    if (a == 0.0) return 0.0;
    if (a < cache_lo_) return std::pow(a, q_) / q_;
    if (a > cache_hi_)
      return cache_F_hi_ + (std::pow(a, p_) - std::pow(cache_hi_, p_)) / p_;
    return std::exp(cache_(std::log(a)));
  }

  /// F by adaptive quadrature of f from 0 to |s|, bypassing the cache.
  /// Slow; used by the audits and as a reference inside the toolkit.
  double F_direct(double s) const {
    const double a = std::abs(s);
    if (a == 0.0) return 0.0;
    std::vector<double> splits;
    for (double t = 1e-6; t < a; t *= 10.0) splits.push_back(t);
    auto r = integrate_adaptive([this](double t) { return f(t); }, 0.0, a,
                                1e-300, 1e-13, 2000, splits);
    return r.value;
  }

 private:
  int N_;
  double p_, q_;
  pchip cache_;  // ln F as a function of ln s on [cache_lo_, cache_hi_]
  double cache_lo_ = 1e-6, cache_hi_ = 1e6, cache_F_hi_ = 0;

  void build_cache() {
    const int per_decade = 480;
    const double t0 = std::log(cache_lo_), t1 = std::log(cache_hi_);
    const int n = static_cast<int>(per_decade * (t1 - t0) / std::log(10.0)) + 1;
    std::vector<double> ts(n), lnF(n);
    kahan_sum acc;
    acc.add(std::pow(cache_lo_, q_) / q_);  // exact to machine at s = 1e-6
    double prev = cache_lo_;
    for (int i = 0; i < n; ++i) {
      const double t = t0 + (t1 - t0) * i / (n - 1);
      const double s = std::exp(t);
      if (i > 0) {
        auto [v, e] = gk15::panel([this](double u) { return f(u); }, prev, s);
        (void)e;  // single panel on a 0.5%-wide segment is machine accurate
        acc.add(v);
        prev = s;
      }
      ts[i] = t;
      lnF[i] = std::log(acc.value());
    }
    cache_F_hi_ = acc.value();
    cache_ = pchip(std::move(ts), std::move(lnF));
  }
};

/// (F, f, f') at s. Non-finite arguments are rejected.
inline f_eval eval(const NonlinearitySpec& spec, double s) {
  require_finite(s, "s");
  return {spec.F(s), spec.f(s), spec.fprime(s)};
}

/// g(s) = s f'(s) / f(s). For the model,
/// g(s) = [(q-1) + (p-1) s^{q-p}] / (1 + s^{q-p}); decreasing from q-1 to p-1.
inline double logarithmic_derivative(const NonlinearitySpec& spec, double s) {
  require(std::isfinite(s) && s > 0, "logarithmic_derivative: s > 0 required");
  if (s <= 1.0) {
    const double w = std::pow(s, spec.q() - spec.p());
    return ((spec.q() - 1.0) + (spec.p() - 1.0) * w) / (1.0 + w);
  }
  const double w = std::pow(s, spec.p() - spec.q());
  return ((spec.q() - 1.0) * w + (spec.p() - 1.0)) / (1.0 + w);
}

/// Empirical constants extracted from a sample grid. The underlying
/// assumptions only assert existence; the audit reports the values realised
/// by the model family on the grid.
struct GrowthAudit {
  double A1_est = 0;     ///< smallest constant bounding |f^(m)| on the grid
  double theta_est = 0;  ///< min over the grid of f(s)s / F(s)
  std::pair<double, double> g_limits{0, 0};  ///< (g near 0+, g near infinity)
  bool monotone_ok = false;                  ///< g non-increasing on the grid
};

inline GrowthAudit growth_audit(const NonlinearitySpec& spec,
                                const std::vector<double>& s_grid) {
  require(s_grid.size() >= 200, "growth_audit: need >= 200 grid points");
  require(s_grid.front() <= 1e-4 && s_grid.back() >= 1e4,
          "growth_audit: grid must span [1e-4, 1e4]");
  const double p = spec.p(), q = spec.q();
  GrowthAudit audit;
  audit.theta_est = std::numeric_limits<double>::infinity();
  audit.monotone_ok = true;
  double prev_g = std::numeric_limits<double>::infinity();
  for (double s : s_grid) {
    require(s > 0, "growth_audit: grid must be positive");
    const double Fd = spec.F_direct(s);
    const double fv = spec.f(s);
    const double fp = spec.fprime(s);
    const double bF = std::min(std::pow(s, p), std::pow(s, q));
    const double bf = std::min(std::pow(s, p - 1), std::pow(s, q - 1));
    const double bfp = std::min(std::pow(s, p - 2), std::pow(s, q - 2));
    audit.A1_est = std::max({audit.A1_est, std::abs(Fd) / bF,
                             std::abs(fv) / bf, std::abs(fp) / bfp});
    audit.theta_est = std::min(audit.theta_est, fv * s / Fd);
    const double g = logarithmic_derivative(spec, s);
    if (g > prev_g * (1.0 + 1e-9) + 1e-12) audit.monotone_ok = false;
    prev_g = g;
  }
  audit.g_limits = {logarithmic_derivative(spec, s_grid.front()),
                    logarithmic_derivative(spec, s_grid.back())};
  return audit;
}

/// Whether the audited quantities satisfy the assumptions they estimate:
/// theta > 2, g non-increasing, g-limits strictly bracketing 2*-1, g > 1.
inline bool audit_passes(const NonlinearitySpec& spec,
                         const GrowthAudit& audit) {
  const double c = spec.two_star() - 1.0;
  return audit.monotone_ok && audit.theta_est > 2.0 &&
         audit.g_limits.second < c && c < audit.g_limits.first &&
         audit.g_limits.second > 1.0;
}

/// Smallest C >= 0 with F(s+t) - F(s) - F(t) - f(s)t - f(t)s >= -C (st)^{1+nu/2}
/// on the positive grid (0,a]^2; rows with s = 0 or t = 0 have zero defect and
/// do not contribute.
inline double lemma_new_constant(const NonlinearitySpec& spec, double a,
                                 double nu, int n = 100) {
  require(a > 0, "lemma_new_constant: a > 0 required");
  require(nu > 0 && nu < spec.q() - 2.0,
          "lemma_new_constant: nu must lie in (0, q-2)");
  require(n >= 100, "lemma_new_constant: grid must be >= 100x100");
  std::vector<double> s(n), Fv(n), fv(n);
  for (int i = 0; i < n; ++i) {
    s[i] = a * double(i + 1) / n;
    Fv[i] = spec.F(s[i]);
    fv[i] = spec.f(s[i]);
  }
  const double ex = 1.0 + 0.5 * nu;
  double C = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {  // defect is symmetric in (s,t)
      const double defect =
          spec.F(s[i] + s[j]) - Fv[i] - Fv[j] - fv[i] * s[j] - fv[j] * s[i];
      if (defect < 0)
        C = std::max(C, -defect / std::pow(s[i] * s[j], ex));
    }
  }
  return C;
}

}  // namespace zms
