#pragma once

// Run configuration. Every physical key carries its unit as a suffix and
// fields are stored in those units; accessors convert to SI / rad/s.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "spinsense/calibration.hpp"
#include "spinsense/crossing_fit.hpp"
#include "spinsense/magnetometry.hpp"
#include "spinsense/thermal_ensemble.hpp"

namespace spinsense::io {

struct SpinBlock {
  double d_ghz = -5.745;
  double g_par = 2.0;
  double g_perp = 2.0;
  double theta_deg = 0.0;
  double phi_deg = 0.0;
  bool operator==(const SpinBlock&) const = default;
};

struct MaterialBlock {
  double v_cav_mm3 = 52.2;
  double v_cell_nm3 = 0.2548;
  double cr_weight_fraction = 0.0005;
  double m_al2o3_g_per_mol = 101.96;
  double m_cr2o3_g_per_mol = 151.99;
  std::int64_t n_cell = 12;
  double zeta = 0.69;
  double temperature_k = 293.0;
  bool operator==(const MaterialBlock&) const = default;
};

struct CavityBlock {
  double omega_c_ghz = 11.4;
  double kappa_c0_khz = 330.0;
  double kappa_c1_khz = 330.0;
  bool operator==(const CavityBlock&) const = default;
};

struct EnsembleBlock {
  double g_eff_mhz = 3.5;
  double n_spins = 3.5e14;
  double kappa_s_mhz = 42.0;
  double kappa_th_khz = 120.0;
  bool operator==(const EnsembleBlock&) const = default;
};

struct DriveBlock {
  double power_dbm = 0.0;
  double omega_d_ghz = 11.4;
  bool operator==(const DriveBlock&) const = default;
};

struct NonidealityBlock {
  double o_r = -0.008;
  double o_i = 0.12;
  double a = 0.003;
  double b_s = 1e-9;
  double psi_rad = 0.14;
  double tau_s = -1.2e-8;
  double omega_s_off_rad_per_s = -7.3e6;
  double omega_d_off_rad_per_s = -5.6e5;
  bool operator==(const NonidealityBlock&) const = default;
};

struct GridBlock {
  double omega_s_span_mhz = 200.0;
  std::int64_t n_s = 50;
  double omega_d_span_mhz = 5.0;
  std::int64_t n_d = 50;
  double noise_sigma = 0.0;
  bool normalize = true;
  bool operator==(const GridBlock&) const = default;
};

struct EigenBlock {
  double b_min_gauss = 0.0;
  double b_max_gauss = 2000.0;
  std::int64_t n_points = 201;
  bool operator==(const EigenBlock&) const = default;
};

struct SweepBlock {
  double b_center_gauss = 31.0;
  double b_span_gauss = 20.0;
  std::int64_t n_b = 201;
  double p_min_dbm = -4.0;
  double p_max_dbm = 20.0;
  std::int64_t n_p = 13;
  double demod_phase_rad = 0.0;
  bool linearized = false;
  bool operator==(const SweepBlock&) const = default;
};

struct SensitivityBlock {
  double chain_gain_db = 21.0;
  double noise_temperature_k = 293.0;
  double load_ohm = 50.0;
  double processing_factor = 1.4142135623730951;
  double margin_db = -6.0;
  double e_n_nv_per_rthz = 26.0;
  double e_th_nv_per_rthz = 13.0;
  double v_m_mv = 0.646;
  double b_test_nt = 242.0;
  double m_max_v_per_t = 2994.0;
  double phi_dbc_per_hz = -129.5;
  double reference_power_dbm = 11.0;
  bool operator==(const SensitivityBlock&) const = default;
};

struct CoilBlock {
  double n_turns = 8.0;
  double radius_mm = 15.68;
  double axial_distance_mm = 30.0;
  double current_ma = 6.9;
  double fem_field_nt = 233.0;
  bool operator==(const CoilBlock&) const = default;
};

struct InputsBlock {
  std::string phase_noise_csv;
  std::string amplitude_noise_csv;
  std::string grid_csv;
  std::string calibration_csv;
  std::string eta_table_csv;
  bool operator==(const InputsBlock&) const = default;
};

struct NoiseBlock {
  double p0_v2_per_hz = 0.0;
  double carrier_v2 = 1.0;
  double spin_detuning_mhz = 0.0;
  bool resample = true;
  bool operator==(const NoiseBlock&) const = default;
};

struct TimeseriesBlock {
  double fs_hz = 2000.0;
  double duration_s = 20.0;
  std::int64_t segment_samples = 4000;
  double test_field_nt = 242.0;
  double test_freq_hz = 10.0;
  double noise_floor_nv_per_rthz = 26.0;
  double floor_band_lo_hz = 50.0;
  double floor_band_hi_hz = 900.0;
  bool operator==(const TimeseriesBlock&) const = default;
};

struct FitBlock {
  double tolerance = 1e-10;
  std::int64_t max_evaluations = 50000;
  std::int64_t starts = 1;
  double jitter = 0.3;
  double guess_scale = 1.0;
  bool operator==(const FitBlock&) const = default;
};

struct RunConfig {
  SpinBlock spin;
  MaterialBlock material;
  CavityBlock cavity;
  EnsembleBlock ensemble;
  DriveBlock drive;
  NonidealityBlock nonideality;
  GridBlock grid;
  EigenBlock eigen;
  SweepBlock sweep;
  SensitivityBlock sensitivity;
  CoilBlock coil;
  InputsBlock inputs;
  NoiseBlock noise;
  TimeseriesBlock timeseries;
  FitBlock fit;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;

  SpinSystem spin_system() const;
  double field_theta() const;
  double field_phi() const;
  MaterialParams material_params() const;
  CavityParams cavity_params() const;
  /// omega_s is set to the cavity frequency.
  EnsembleParams ensemble_params() const;
  NonIdealityParams nonideality_params() const;
  double drive_power() const;  // W
  double drive_omega() const;  // rad/s
  CrossingModel crossing_model() const;
  GridSpec grid_spec() const;
  SensitivityConfig sensitivity_config() const;
  CoilGeometry coil_geometry() const;
  TestFieldSpec test_field() const;
  TimeseriesSpec timeseries_spec() const;
  FitOptions fit_options() const;
  SensorModel sensor_model(double power_w) const;

  void validate() const;
};

/// Strict parse: ParseError (with line/column), UnknownKey, UnitMismatch.
RunConfig parse_config(const std::string& text);
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& cfg);
std::string serialize_config(const RunConfig& cfg);

/// Apply a `key value` override to a config document. The key is looked up
/// across all blocks and must be unique.
void apply_override(nlohmann::json& doc, const std::string& key, const std::string& value);

}  // namespace spinsense::io
