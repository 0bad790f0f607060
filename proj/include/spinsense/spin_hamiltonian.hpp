#pragma once

// Cr3+ ground-state spin Hamiltonian (S = 3/2) with axial zero-field splitting
// and an anisotropic Zeeman term. Energies are angular frequencies (rad/s).

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "spinsense/constants.hpp"

namespace spinsense {

using cplx = std::complex<double>;

/// Dense 4x4 complex matrix, row-major.
struct Matrix4c {
  std::array<cplx, 16> a{};

  cplx& operator()(std::size_t r, std::size_t c) { return a[r * 4 + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return a[r * 4 + c]; }

  static Matrix4c zero() { return {}; }
  static Matrix4c identity();

  Matrix4c adjoint() const;
  double frobenius_norm() const;
  cplx trace() const;
};

Matrix4c operator+(const Matrix4c& x, const Matrix4c& y);
Matrix4c operator-(const Matrix4c& x, const Matrix4c& y);
Matrix4c operator*(const Matrix4c& x, const Matrix4c& y);
Matrix4c operator*(cplx s, const Matrix4c& x);

using Vector4c = std::array<cplx, 4>;

Vector4c operator*(const Matrix4c& m, const Vector4c& v);
cplx inner(const Vector4c& x, const Vector4c& y);  // <x|y>
double norm(const Vector4c& v);

/// Spin-3/2 operators in the basis m_s = (+3/2, +1/2, -1/2, -3/2).
struct SpinMatrices {
  Matrix4c sx, sy, sz;
};

const SpinMatrices& spin_three_halves();

struct SpinSystem {
  double d = -kTwoPi * 5.745e9;  // rad/s, negative for ruby
  double g_par = 2.0;
  double g_perp = 2.0;
  static constexpr double spin = 1.5;

  void validate() const;
};

/// Bias field in spherical coordinates about the crystal c-axis.
struct FieldVector {
  double magnitude = 0.0;  // T
  double theta = 0.0;      // rad, polar angle from c-axis
  double phi = 0.0;        // rad, azimuth

  void validate() const;
  std::array<double, 3> cartesian() const;
};

struct EigenSolution {
  std::array<double, 4> energies{};  // rad/s, ascending
  std::array<Vector4c, 4> states{};  // orthonormal, states[k] pairs with energies[k]
};

struct Transition {
  double frequency;  // rad/s, >= 0
  double amplitude;  // |<i|Sx|j>|^2
};

Matrix4c build_hamiltonian(const SpinSystem& sys, const FieldVector& field);

/// Cyclic complex Jacobi diagonalisation. Throws NonHermitianInput when
/// ||H - H^dagger|| exceeds 1e-9 ||H||.
EigenSolution eigensolve(const Matrix4c& h);

/// Closed-form levels for a field along the c-axis, ordered
/// (+3/2, +1/2, -1/2, -3/2).
std::array<double, 4> analytic_energies_axial(const SpinSystem& sys, double b_z);

/// Smallest axial field at which the |+-3/2> and |+-1/2> doublets touch.
double level_ordering_bound(const SpinSystem& sys);

Transition transition(const EigenSolution& sol, std::size_t i, std::size_t j);

/// Frequency of the transition adiabatically connected to |+3/2> <-> |+1/2>
/// (sorted levels 1 and 3 below the level-ordering bound).
double cavity_band_transition(const SpinSystem& sys, const FieldVector& field);

struct EnergySweepRow {
  double b;                          // T
  std::array<double, 4> energies{};  // rad/s, tracked branches
};

/// Sweep |B| along a fixed orientation, following each branch by maximal
/// eigenvector overlap with the previous row.
std::vector<EnergySweepRow> energy_level_sweep(const SpinSystem& sys, double theta, double phi,
                                               double b_min, double b_max, std::size_t n_points);

}  // namespace spinsense
