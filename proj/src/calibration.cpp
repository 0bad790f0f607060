#include "spinsense/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "spinsense/constants.hpp"
#include "spinsense/error.hpp"

namespace spinsense {

void CoilGeometry::validate() const {
  if (!(n_turns > 0.0) || !(radius > 0.0) || !(axial_distance >= 0.0) || !(current_rms >= 0.0))
    fail(ErrorCode::InvalidArgument, "coil geometry must be positive");
}

double solenoid_axial_field(const CoilGeometry& coil) {
  coil.validate();
  const double r2 = coil.radius * coil.radius;
  const double d2 = coil.axial_distance * coil.axial_distance + r2;
  return coil.n_turns * PhysicalConstants::mu_0 * coil.current_rms * r2 / (2.0 * d2 * std::sqrt(d2));
}

LinearFit linear_calibration(const std::vector<std::pair<double, double>>& points) {
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  if (points.size() < 2) fail(ErrorCode::DegenerateAbscissa, "need at least two calibration points");
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end());
  if (lo->first == hi->first || !(sxx > 0.0))
    fail(ErrorCode::DegenerateAbscissa, "calibration currents are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    double ss_res = 0.0;
    for (const auto& [x, y] : points) {
      const double r = y - (fit.intercept + fit.slope * x);
      ss_res += r * r;
    }
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

double test_field_from_slope(double v_m_rms, double m_max) {
  if (!(m_max > 0.0)) fail(ErrorCode::ZeroSlope, "field slope must be positive");
  return v_m_rms / m_max;
}

}  // namespace spinsense
