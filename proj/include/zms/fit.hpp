/// \file fit.hpp
/// Least-squares line fits, used for decay exponents and scan slopes.
#pragma once

#include <cmath>
#include <vector>

#include "zms/util.hpp"

namespace zms {

struct line_fit {
  double slope = 0;
  double intercept = 0;
  double stderr_slope = 0;  // standard error of the slope estimate
};

inline line_fit fit_line(const std::vector<double>& x,
                         const std::vector<double>& y) {
  const std::size_t n = x.size();
  require(n >= 2 && y.size() == n, "fit_line: need >= 2 points");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0, "fit_line: degenerate abscissae");
  line_fit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  if (n > 2) {
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (out.intercept + out.slope * x[i]);
      ss += r * r;
    }
    out.stderr_slope = std::sqrt(ss / ((n - 2) * sxx));
  }
  return out;
}

/// Fit y ~ C·x^slope by regressing log y on log x. All y must be positive.
inline line_fit fit_loglog(const std::vector<double>& x,
                           const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0 && y[i] > 0, "fit_loglog: positive data required");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

}  // namespace zms
