#pragma once

// Field-to-voltage response, spectral estimation and sensitivity budgets
// for a cavity-readout magnetometer.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spinsense/cavity_model.hpp"
#include "spinsense/spin_hamiltonian.hpp"

namespace spinsense {

struct SweepTrace {
  std::vector<double> axis;  // T, rad/s or s
  std::vector<double> absorptive;  // V
  std::vector<double> dispersive;  // V

  void validate() const;
};

struct SensitivityConfig {
  double gain_db = 21.0;
  double temperature = 293.0;  // K
  double resistance = 50.0;    // ohm
  double processing_factor = 1.4142135623730951;
  double margin_db = -6.0;

  void validate() const;
};

struct TestFieldSpec {
  double amplitude_rms = 0.0;  // T
  double frequency = 0.0;      // rad/s

  void validate() const;
};

struct SlopeResult {
  std::vector<double> slope;  // V/T at each axis point
  double m_max = 0.0;         // max |slope|
  std::size_t argmax = 0;
};

/// Local quadratic least squares over a centred window (shifted inward at
/// the ends).
SlopeResult dispersive_slope(const SweepTrace& trace, std::size_t window = 5);

struct SpectrumOptions {
  std::size_t segment_length = 0;  // 0: one segment spanning the record
  double overlap = 0.5;
};

/// Single-sided amplitude spectral density.
struct Spectrum {
  std::vector<double> freq_hz;
  std::vector<double> asd;  // V/sqrt(Hz)
  double bin_width = 0.0;   // Hz
};

/// Welch estimate with a Hann window. A bin-centred sine of peak A integrates
/// to A^2/2 and white noise of variance s^2 reads s*sqrt(2/fs).
Spectrum amplitude_spectrum(const std::vector<double>& samples, double fs,
                            const SpectrumOptions& options = {});

/// Trimmed mean (10% each side) of the PSD over [f_lo, f_hi], skipping
/// +-2 bins around each tone, returned as an ASD.
double noise_floor(const Spectrum& spectrum, double f_lo, double f_hi,
                   const std::vector<double>& tone_freqs_hz = {}, double trim = 0.1);

/// RMS of a tone: PSD integrated over +-half_width bins minus the floor.
double tone_rms(const Spectrum& spectrum, double f_tone_hz, double floor_asd,
                std::size_t half_width = 3);

double sensitivity(double e_n, double v_m, double b_test);

double thermal_limit(const SensitivityConfig& cfg, double m_max);

struct PhaseNoiseBudget {
  double e_p = 0.0;               // V/sqrt(Hz)
  double phi_required_dbc = 0.0;  // dBc/Hz
  bool unbounded = false;         // e_p = 0: no phase-noise requirement
};

PhaseNoiseBudget phase_noise_budget(double e_total, double e_th, double phi_measured_dbc,
                                    const SensitivityConfig& cfg);

double noise_normalized_slope(double m, double power, double resistance);

struct GridOptimum {
  std::vector<double> per_row_min;  // min over columns, per row
  std::vector<std::size_t> per_row_argmin;
  std::vector<double> per_col_min;  // min over rows, per column
  std::vector<std::size_t> per_col_argmin;
  double min = 0.0;
  std::size_t row = 0, col = 0;
};

/// Rows index bias field, columns index power. Ties resolve to the lower index.
GridOptimum optimize_grid(const std::vector<std::vector<double>>& eta);

/// Cavity readout of a spin ensemble whose transition tracks the bias field.
struct SensorModel {
  SpinSystem spin;
  double theta = 0.0;  // field orientation
  double phi = 0.0;
  CavityParams cavity;
  EnsembleParams ensemble;  // omega_s is replaced by the field-dependent value
  NonIdealityParams nonideal;
  double omega_d = 0.0;        // rad/s
  double power = 0.0;          // W incident
  double gain_db = 21.0;       // chain gain
  double resistance = 50.0;    // ohm
  double demod_phase = 0.0;    // phi - phi0
  bool linearized = false;

  double spin_frequency(double b) const;
  /// Demodulated output voltage (absorptive + i dispersive).
  cplx voltage(double b) const;
  /// d(dispersive)/dB by central difference.
  double dispersive_derivative(double b, double h = 1e-8) const;
};

SweepTrace simulate_field_sweep(const SensorModel& model, const std::vector<double>& b_values);

struct TimeseriesSpec {
  double fs = 2000.0;        // Hz
  double duration = 20.0;    // s
  double noise_floor = 0.0;  // V/sqrt(Hz), white on both channels
};

/// Axis is time in s. Deterministic for a given seed.
SweepTrace simulate_timeseries(const SensorModel& model, double bias, const TestFieldSpec& test,
                               const TimeseriesSpec& spec, std::uint64_t seed);

}  // namespace spinsense
