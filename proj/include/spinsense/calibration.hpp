#pragma once

#include <utility>
#include <vector>

namespace spinsense {

struct CoilGeometry {
  double n_turns = 8.0;
  double radius = 15.68e-3;         // m
  double axial_distance = 30e-3;    // m
  double current_rms = 6.9e-3;      // A

  void validate() const;
};

/// On-axis field of a stack of circular loops, RMS in T.
double solenoid_axial_field(const CoilGeometry& coil);

struct LinearFit {
  double slope = 0.0;      // T/A
  double intercept = 0.0;  // T
  double r_squared = 0.0;
};

/// Ordinary least squares of field against current.
LinearFit linear_calibration(const std::vector<std::pair<double, double>>& points);

/// Test-field amplitude from a response voltage and the field slope.
double test_field_from_slope(double v_m_rms, double m_max);

}  // namespace spinsense
