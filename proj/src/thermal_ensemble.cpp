#include "spinsense/thermal_ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "spinsense/error.hpp"

namespace spinsense {

void MaterialParams::validate() const {
  if (!(v_cav > 0.0) || !(v_cell > 0.0) || !(m_al2o3 > 0.0) || !(m_cr2o3 > 0.0))
    fail(ErrorCode::InvalidArgument, "material volumes and molar masses must be positive");
  if (!(alpha_cr >= 0.0 && alpha_cr <= 1.0))
    fail(ErrorCode::InvalidArgument, "alpha_cr must lie in [0, 1]");
  if (n_cell < 1) fail(ErrorCode::InvalidArgument, "n_cell must be >= 1");
  if (!(zeta >= 0.0)) fail(ErrorCode::InvalidArgument, "zeta must be non-negative");
}

namespace {

// Map sorted eigenstates onto basis labels (+3/2, -3/2, +1/2, -1/2) by
// maximal total overlap.
std::array<double, 4> labelled_energies(const EigenSolution& sol) {
  static constexpr std::array<std::size_t, 4> basis_index{0, 3, 1, 2};
  std::array<std::size_t, 4> perm{0, 1, 2, 3}, best_perm = perm;
  double best = -1.0;
  do {
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += std::norm(sol.states[perm[k]][basis_index[k]]);
    if (s > best + 1e-12) {
      best = s;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::array<double, 4> e{};
  for (std::size_t k = 0; k < 4; ++k) e[k] = sol.energies[best_perm[k]];
  return e;
}

}  // namespace

ThermalState boltzmann_populations(const SpinSystem& sys, double temperature,
                                   const std::optional<FieldVector>& zeeman_field) {
  sys.validate();
  if (!(temperature > 0.0))
    fail(ErrorCode::NonPositiveTemperature, "temperature must be positive");

  std::array<double, 4> omega{};  // rad/s
  if (zeeman_field) {
    omega = labelled_energies(eigensolve(build_hamiltonian(sys, *zeeman_field)));
  } else {
    omega = {sys.d, sys.d, -sys.d, -sys.d};
  }

  const double beta = PhysicalConstants::hbar / (PhysicalConstants::k_B * temperature);
  const double e_min = *std::min_element(omega.begin(), omega.end());
  std::array<double, 4> w{};
  double z = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    w[k] = std::exp(-beta * (omega[k] - e_min));
    z += w[k];
  }
  ThermalState st;
  st.temperature = temperature;
  for (std::size_t k = 0; k < 4; ++k) st.populations[k] = w[k] / z;
  st.polarization = std::abs(st.populations[0] - st.populations[2]);
  return st;
}

double effective_polarization(const ThermalState& state) {
  return std::abs(state.populations[0] - state.populations[2]);
}

double total_interrogated_spins(const MaterialParams& mat) {
  mat.validate();
  return mat.v_cav / mat.v_cell * mat.alpha_cr * (mat.m_al2o3 / mat.m_cr2o3) *
         static_cast<double>(mat.n_cell);
}

double polarized_spin_count(const MaterialParams& mat, const ThermalState& state) {
  return effective_polarization(state) * total_interrogated_spins(mat);
}

double optical_power_equivalent(double n_spins, double omega, double kappa_th, double n_photons) {
  if (n_spins < 0.0 || omega < 0.0 || kappa_th < 0.0 || n_photons < 0.0)
    fail(ErrorCode::InvalidArgument, "optical_power_equivalent: inputs must be non-negative");
  return n_spins * PhysicalConstants::hbar * omega * kappa_th * n_photons;
}

}  // namespace spinsense
