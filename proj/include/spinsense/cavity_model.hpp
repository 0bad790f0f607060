#pragma once

// Input-output model of a single-port cavity loaded by a thermally polarised
// spin ensemble. All rates and frequencies are angular (rad/s).

#include <complex>
#include <string>
#include <vector>

namespace spinsense {

using cplx = std::complex<double>;

struct CavityParams {
  double omega_c = 0.0;   // bare resonance
  double kappa_c0 = 0.0;  // intrinsic loss rate
  double kappa_c1 = 0.0;  // input coupling rate

  double kappa_c() const { return kappa_c0 + kappa_c1; }
  void validate() const;
};

struct EnsembleParams {
  double g_s = 0.0;       // single spin-photon coupling
  double n_spins = 0.0;   // polarised spins
  double kappa_s = 0.0;   // 2 / T2
  double kappa_th = 0.0;  // 1 / T1
  double omega_s = 0.0;   // spin transition

  double g_eff() const;
  void validate() const;
};

struct DriveParams {
  double omega_d = 0.0;
  double power = 0.0;  // W, incident

  void validate() const;
};

/// Auxiliary parameters absorbing experimental non-idealities of a measured
/// reflection map. All zero means "ideal".
struct NonIdealityParams {
  double o_r = 0.0;          // additive real offset
  double o_i = 0.0;          // additive imaginary offset
  double a = 0.0;            // amplitude correction
  double b = 0.0;            // s, amplitude slope across the drive span
  double psi = 0.0;          // rad, constant phase
  double tau = 0.0;          // s, delay
  double omega_s_off = 0.0;  // rad/s, shift applied to omega_s
  double omega_d_off = 0.0;  // rad/s, shift applied to omega_d
  double omega_d_mean = 0.0; // rad/s, reference point for b and tau
};

/// Human-readable warnings for offsets that are not small compared to 1.
std::vector<std::string> nonideality_warnings(const NonIdealityParams& ni);

/// Mean intracavity photon number P / (hbar omega_d kappa_c).
double photon_number(const DriveParams& drive, double kappa_c);

/// Spin interaction term including power saturation.
cplx spin_interaction(const EnsembleParams& ens, const DriveParams& drive, double n_cav);

/// Small-detuning approximation of spin_interaction.
cplx pi_saturated_approx(const EnsembleParams& ens, const DriveParams& drive, double n_cav);

/// Voltage reflection coefficient of the spin-loaded cavity.
cplx reflection(const CavityParams& cav, const EnsembleParams& ens, const DriveParams& drive);

/// Reflection with offsets, gain/phase corrections and frequency shifts applied.
cplx reflection_with_nonidealities(const CavityParams& cav, const EnsembleParams& ens,
                                   const DriveParams& drive, const NonIdealityParams& ni);

double single_spin_coupling(double v_cav, double omega_c, double n_perp);

double cooperativity(const EnsembleParams& ens, const CavityParams& cav);

/// Drive power at which g_s^2 n_cav / kappa_th equals kappa_s / 2, with
/// kappa_s = 2 / T2 and kappa_th = 1 / T1.
double kappa_th_threshold_power(double t1, double t2, double g_s, double omega_d, double kappa_c);

}  // namespace spinsense
