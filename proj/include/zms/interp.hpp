/// \file interp.hpp
/// Monotone cubic (Fritsch–Carlson) interpolation on a fixed knot vector.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "zms/util.hpp"

namespace zms {

/// Piecewise-cubic Hermite interpolant whose node slopes are limited so that
/// monotone data produce a monotone interpolant. Passes through all nodes.
class pchip {
 public:
  pchip() = default;

  pchip(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    require(n >= 2 && y_.size() == n, "pchip: need >= 2 nodes");
    for (std::size_t i = 0; i + 1 < n; ++i)
      require(x_[i] < x_[i + 1], "pchip: x must be strictly increasing");
    m_.assign(n, 0.0);
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      d[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 2) {
      m_[0] = m_[1] = d[0];
      return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0) != (d[i] > 0)) {
        m_[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
    m_[0] = edge_slope(h[0], h[1], d[0], d[1]);
    m_[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  }

  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }

  double operator()(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h * h10 * m_[i] + h01 * y_[i + 1] + h * h11 * m_[i + 1];
  }

  double derivative(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double g00 = (6 * t2 - 6 * t) / h;
    const double g10 = 3 * t2 - 4 * t + 1;
    const double g01 = (-6 * t2 + 6 * t) / h;
    const double g11 = 3 * t2 - 2 * t;
    return g00 * y_[i] + g10 * m_[i] + g01 * y_[i + 1] + g11 * m_[i + 1];
  }

 private:
  static double edge_slope(double h0, double h1, double d0, double d1) {
    // Moler's one-sided three-point rule, clipped for shape preservation.
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d0 == 0.0 || (m > 0) != (d0 > 0))
      m = 0.0;
    else if ((d0 > 0) != (d1 > 0) && std::abs(m) > 3.0 * std::abs(d0))
      m = 3.0 * d0;
    return m;
  }

  std::size_t segment(double x) const {
    if (x <= x_.front()) return 0;
    if (x >= x_.back()) return x_.size() - 2;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
  }

  std::vector<double> x_, y_, m_;
};

}  // namespace zms
