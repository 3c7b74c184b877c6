#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dyngal {

struct line_fit {
  double intercept = 0.0;
  double slope = 0.0;
  double rms_residual = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares y ~ intercept + slope * x.
inline line_fit fit_line(const std::vector<double>& x,
                         const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 points");
  const double n = double(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  line_fit out;
  out.n = x.size();
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (out.intercept + out.slope * x[i]);
    ss_res += e * e;
  }
  out.rms_residual = std::sqrt(ss_res / n);
  out.r_squared = syy == 0.0 ? 0.0 : std::max(0.0, 1.0 - ss_res / syy);
  return out;
}

}  // namespace dyngal
