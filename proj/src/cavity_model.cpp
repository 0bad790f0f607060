#include "spinsense/cavity_model.hpp"

#include <cmath>

#include "spinsense/constants.hpp"
#include "spinsense/error.hpp"

namespace spinsense {

void CavityParams::validate() const {
  if (!(omega_c > 0.0) || !(kappa_c0 >= 0.0) || !(kappa_c1 >= 0.0))
    fail(ErrorCode::InvalidArgument, "cavity parameters must be non-negative, omega_c positive");
  if (!(kappa_c() > 0.0)) fail(ErrorCode::ZeroLinewidth, "loaded cavity linewidth is zero");
}

double EnsembleParams::g_eff() const { return g_s * std::sqrt(n_spins); }

void EnsembleParams::validate() const {
  if (!(g_s >= 0.0) || !(n_spins >= 0.0) || !(kappa_s >= 0.0) || !(kappa_th >= 0.0) ||
      !(omega_s >= 0.0))
    fail(ErrorCode::InvalidArgument, "ensemble parameters must be non-negative");
}

void DriveParams::validate() const {
  if (!(power >= 0.0)) fail(ErrorCode::InvalidArgument, "drive power must be non-negative");
  if (!(omega_d > 0.0)) fail(ErrorCode::InvalidArgument, "drive frequency must be positive");
}

std::vector<std::string> nonideality_warnings(const NonIdealityParams& ni) {
  std::vector<std::string> out;
  auto check = [&](const char* name, double v) {
    if (std::abs(v) >= 0.5)
      out.push_back(std::string(name) + " = " + std::to_string(v) + " is not small compared to 1");
  };
  check("o_r", ni.o_r);
  check("o_i", ni.o_i);
  check("a", ni.a);
  check("psi", ni.psi);
  return out;
}

double photon_number(const DriveParams& drive, double kappa_c) {
  drive.validate();
  if (!(kappa_c > 0.0)) fail(ErrorCode::ZeroLinewidth, "photon_number: kappa_c must be positive");
  return drive.power / (PhysicalConstants::hbar * drive.omega_d * kappa_c);
}

namespace {

void check_spin_rates(const EnsembleParams& ens, double n_cav) {
  ens.validate();
  if (!(ens.kappa_s > 0.0)) fail(ErrorCode::ZeroSpinLinewidth, "kappa_s must be positive");
  if (n_cav > 0.0 && !(ens.kappa_th > 0.0))
    fail(ErrorCode::ZeroKappaTh, "kappa_th must be positive when the cavity is driven");
}

}  // namespace

cplx spin_interaction(const EnsembleParams& ens, const DriveParams& drive, double n_cav) {
  check_spin_rates(ens, n_cav);
  const double g2 = ens.g_s * ens.g_s;
  const double half = 0.5 * ens.kappa_s;
  const double det = drive.omega_d - ens.omega_s;
  const double sat = n_cav > 0.0 ? g2 * n_cav * ens.kappa_s / (2.0 * ens.kappa_th) : 0.0;
  const cplx denom = cplx(half, det) + sat / cplx(half, -det);
  return g2 * ens.n_spins / denom;
}

cplx pi_saturated_approx(const EnsembleParams& ens, const DriveParams& drive, double n_cav) {
  check_spin_rates(ens, n_cav);
  const double g2 = ens.g_s * ens.g_s;
  const double det = drive.omega_d - ens.omega_s;
  const double broadened = 0.5 * ens.kappa_s + (n_cav > 0.0 ? g2 * n_cav / ens.kappa_th : 0.0);
  return (1.0 / broadened) * (g2 * ens.n_spins / cplx(1.0, 2.0 * det / ens.kappa_s));
}

cplx reflection(const CavityParams& cav, const EnsembleParams& ens, const DriveParams& drive) {
  cav.validate();
  const double kc = cav.kappa_c();
  const double n_cav = photon_number(drive, kc);
  const cplx pi = spin_interaction(ens, drive, n_cav);
  return -1.0 + cav.kappa_c1 / (cplx(0.5 * kc, drive.omega_d - cav.omega_c) + pi);
}

cplx reflection_with_nonidealities(const CavityParams& cav, const EnsembleParams& ens,
                                   const DriveParams& drive, const NonIdealityParams& ni) {
  EnsembleParams shifted_ens = ens;
  shifted_ens.omega_s = ens.omega_s - ni.omega_s_off;
  DriveParams shifted_drive = drive;
  shifted_drive.omega_d = drive.omega_d - ni.omega_d_off;
  const cplx gamma = reflection(cav, shifted_ens, shifted_drive);

  const double span = drive.omega_d - ni.omega_d_mean;
  const cplx rotation = std::polar(1.0, ni.psi + span * ni.tau);
  return cplx(ni.o_r, ni.o_i) + rotation * (1.0 + ni.a + ni.b * span) * gamma;
}

double single_spin_coupling(double v_cav, double omega_c, double n_perp) {
  if (!(v_cav > 0.0)) fail(ErrorCode::InvalidArgument, "v_cav must be positive");
  if (!(omega_c >= 0.0)) fail(ErrorCode::InvalidArgument, "omega_c must be non-negative");
  if (!(n_perp >= 0.0 && n_perp <= 1.0))
    fail(ErrorCode::InvalidArgument, "n_perp must lie in [0, 1]");
  return 0.5 * PhysicalConstants::gamma_e * n_perp *
         std::sqrt(PhysicalConstants::hbar * omega_c * PhysicalConstants::mu_0 / v_cav);
}

double cooperativity(const EnsembleParams& ens, const CavityParams& cav) {
  if (!(ens.kappa_s > 0.0)) fail(ErrorCode::ZeroSpinLinewidth, "kappa_s must be positive");
  if (!(cav.kappa_c() > 0.0)) fail(ErrorCode::ZeroLinewidth, "kappa_c must be positive");
  const double g = ens.g_eff();
  return 4.0 * g * g / (ens.kappa_s * cav.kappa_c());
}

double kappa_th_threshold_power(double t1, double t2, double g_s, double omega_d, double kappa_c) {
  if (!(t1 > 0.0) || !(t2 > 0.0) || !(omega_d > 0.0) || !(kappa_c > 0.0))
    fail(ErrorCode::InvalidArgument, "kappa_th_threshold_power: inputs must be positive");
  if (!(g_s > 0.0)) fail(ErrorCode::ZeroCoupling, "single spin coupling is zero");
  const double kappa_s = 2.0 / t2;
  const double kappa_th = 1.0 / t1;
  return kappa_s * kappa_th / (2.0 * g_s * g_s) * PhysicalConstants::hbar * omega_d * kappa_c;
}

}  // namespace spinsense
