#pragma once

// Comma-separated files with a mandatory header row and LF line endings.

#include <string>
#include <utility>
#include <vector>

#include "spinsense/crossing_fit.hpp"
#include "spinsense/iq_noise.hpp"
#include "spinsense/magnetometry.hpp"

namespace spinsense::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

/// Shortest representation that parses back to the same double.
std::string format_number(double v);
double parse_number(const std::string& text);

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);
void write_numeric_csv(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows);

/// Columns omega_s_hz, omega_d_hz, re, im; row-major in omega_s.
void write_grid_csv(const std::string& path, const ComplexGrid2D& grid);
ComplexGrid2D read_grid_csv(const std::string& path, double drive_power);

/// Columns offset_hz, value, unit.
void write_noise_csv(const std::string& path, const NoiseSpectrum& spectrum);
NoiseSpectrum read_noise_csv(const std::string& path);

/// Columns current_a, field_t.
std::vector<std::pair<double, double>> read_calibration_csv(const std::string& path);

/// Columns <axis_name>, absorptive_v, dispersive_v.
void write_sweep_csv(const std::string& path, const SweepTrace& trace, const std::string& axis_name);

/// Columns freq_hz, asd_v_per_rthz.
void write_spectrum_csv(const std::string& path, const Spectrum& spectrum);

}  // namespace spinsense::io
