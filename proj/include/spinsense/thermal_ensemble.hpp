#pragma once

#include <array>
#include <optional>

#include "spinsense/spin_hamiltonian.hpp"

namespace spinsense {

struct MaterialParams {
  double v_cav = 52.2e-9;        // m^3, modal field volume
  double v_cell = 0.2548e-27;    // m^3, unit-cell volume
  double alpha_cr = 0.0005;      // Cr2O3 weight fraction
  double m_al2o3 = 101.96;       // g/mol
  double m_cr2o3 = 151.99;       // g/mol
  int n_cell = 12;               // Al atoms per cell
  double zeta = 0.69;            // filling factor, informational only

  void validate() const;
};

/// Populations are ordered (+3/2, -3/2, +1/2, -1/2).
struct ThermalState {
  double temperature = 0.0;  // K
  std::array<double, 4> populations{};
  double polarization = 0.0;  // |p(+3/2) - p(+1/2)|
};

/// Boltzmann populations of the four sublevels. By default the Zeeman shift is
/// neglected and E(+-3/2) = hbar D, E(+-1/2) = -hbar D. Passing a field uses
/// the full eigensolve energies, labelling eigenstates by their dominant m_s.
ThermalState boltzmann_populations(const SpinSystem& sys, double temperature,
                                   const std::optional<FieldVector>& zeeman_field = std::nullopt);

double effective_polarization(const ThermalState& state);

/// Cr3+ ions inside the modal volume. Real-valued, never rounded.
double total_interrogated_spins(const MaterialParams& mat);

double polarized_spin_count(const MaterialParams& mat, const ThermalState& state);

/// Optical power needed to polarise `n_spins` at rate kappa_th using
/// `n_photons` photons of angular frequency `omega` per spin.
double optical_power_equivalent(double n_spins, double omega, double kappa_th, double n_photons);

}  // namespace spinsense
