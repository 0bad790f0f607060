#include "spinsense/spin_hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spinsense/error.hpp"

namespace spinsense {

Matrix4c Matrix4c::identity() {
  Matrix4c m;
  for (std::size_t i = 0; i < 4; ++i) m(i, i) = 1.0;
  return m;
}

Matrix4c Matrix4c::adjoint() const {
  Matrix4c m;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) m(r, c) = std::conj((*this)(c, r));
  return m;
}

double Matrix4c::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : a) s += std::norm(z);
  return std::sqrt(s);
}

cplx Matrix4c::trace() const { return a[0] + a[5] + a[10] + a[15]; }

Matrix4c operator+(const Matrix4c& x, const Matrix4c& y) {
  Matrix4c m;
  for (std::size_t k = 0; k < 16; ++k) m.a[k] = x.a[k] + y.a[k];
  return m;
}

Matrix4c operator-(const Matrix4c& x, const Matrix4c& y) {
  Matrix4c m;
  for (std::size_t k = 0; k < 16; ++k) m.a[k] = x.a[k] - y.a[k];
  return m;
}

Matrix4c operator*(const Matrix4c& x, const Matrix4c& y) {
  Matrix4c m;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += x(r, k) * y(k, c);
      m(r, c) = s;
    }
  return m;
}

Matrix4c operator*(cplx s, const Matrix4c& x) {
  Matrix4c m;
  for (std::size_t k = 0; k < 16; ++k) m.a[k] = s * x.a[k];
  return m;
}

Vector4c operator*(const Matrix4c& m, const Vector4c& v) {
  Vector4c out{};
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) out[r] += m(r, c) * v[c];
  return out;
}

cplx inner(const Vector4c& x, const Vector4c& y) {
  cplx s = 0.0;
  for (std::size_t k = 0; k < 4; ++k) s += std::conj(x[k]) * y[k];
  return s;
}

double norm(const Vector4c& v) { return std::sqrt(std::real(inner(v, v))); }

const SpinMatrices& spin_three_halves() {
  static const SpinMatrices mats = [] {
    const double r3 = std::sqrt(3.0);
    Matrix4c raise;  // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>
    raise(0, 1) = r3;
    raise(1, 2) = 2.0;
    raise(2, 3) = r3;
    const Matrix4c lower = raise.adjoint();
    SpinMatrices s;
    s.sx = cplx(0.5, 0.0) * (raise + lower);
    s.sy = cplx(0.0, -0.5) * (raise - lower);
    s.sz(0, 0) = 1.5;
    s.sz(1, 1) = 0.5;
    s.sz(2, 2) = -0.5;
    s.sz(3, 3) = -1.5;
    return s;
  }();
  return mats;
}

void SpinSystem::validate() const {
  if (!(g_par > 0.0) || !(g_perp > 0.0))
    fail(ErrorCode::InvalidArgument, "g-factors must be positive");
  if (!std::isfinite(d)) fail(ErrorCode::InvalidArgument, "ZFS parameter must be finite");
}

void FieldVector::validate() const {
  if (!(magnitude >= 0.0)) fail(ErrorCode::InvalidArgument, "field magnitude must be >= 0");
  if (!(theta >= 0.0 && theta <= std::numbers::pi))
    fail(ErrorCode::InvalidArgument, "theta must lie in [0, pi]");
  if (!(phi >= 0.0 && phi < kTwoPi)) fail(ErrorCode::InvalidArgument, "phi must lie in [0, 2pi)");
}

std::array<double, 3> FieldVector::cartesian() const {
  const double st = std::sin(theta);
  return {magnitude * st * std::cos(phi), magnitude * st * std::sin(phi),
          magnitude * std::cos(theta)};
}

Matrix4c build_hamiltonian(const SpinSystem& sys, const FieldVector& field) {
  sys.validate();
  field.validate();
  const auto& s = spin_three_halves();
  const auto [bx, by, bz] = field.cartesian();
  const double gpar = sys.g_par * PhysicalConstants::mu_B / PhysicalConstants::hbar;
  const double gperp = sys.g_perp * PhysicalConstants::mu_B / PhysicalConstants::hbar;
  const double ss1 = sys.spin * (sys.spin + 1.0) / 3.0;

  Matrix4c h = cplx(gpar * bz) * s.sz + cplx(gperp * bx) * s.sx + cplx(gperp * by) * s.sy;
  const Matrix4c zfs = (s.sz * s.sz) - cplx(ss1) * Matrix4c::identity();
  h = h + cplx(sys.d) * zfs;
  // Symmetrise so the result is Hermitian bit-for-bit.
  for (std::size_t r = 0; r < 4; ++r) {
    h(r, r) = h(r, r).real();
    for (std::size_t c = r + 1; c < 4; ++c) h(c, r) = std::conj(h(r, c));
  }
  return h;
}

namespace {

double off_diagonal_norm(const Matrix4c& m) {
  double s = 0.0;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      if (r != c) s += std::norm(m(r, c));
  return std::sqrt(s);
}

// Fix the global phase so the largest-magnitude component (lowest index on
// ties) is real and positive.
void fix_phase(Vector4c& v) {
  std::size_t pivot = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double m = std::abs(v[k]);
    if (m > best * (1.0 + 1e-12) + 1e-300) {
      best = m;
      pivot = k;
    }
  }
  if (best <= 0.0) return;
  const cplx phase = std::conj(v[pivot]) / best;
  for (auto& z : v) z *= phase;
  v[pivot] = cplx(v[pivot].real(), 0.0);
}

// Replace the basis of a degenerate subspace with one that depends only on
// the subspace itself: Gram-Schmidt over projector columns, largest first.
void canonicalize_subspace(std::array<Vector4c, 4>& states, std::size_t first, std::size_t count) {
  Matrix4c proj;
  for (std::size_t k = first; k < first + count; ++k)
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) proj(r, c) += states[k][r] * std::conj(states[k][c]);

  std::array<bool, 4> used{};
  for (std::size_t out = 0; out < count; ++out) {
    std::size_t pick = 0;
    double best = -1.0;
    Vector4c best_col{};
    for (std::size_t m = 0; m < 4; ++m) {
      if (used[m]) continue;
      Vector4c col;
      for (std::size_t r = 0; r < 4; ++r) col[r] = proj(r, m);
      for (std::size_t prev = 0; prev < out; ++prev) {
        const cplx ov = inner(states[first + prev], col);
        for (std::size_t r = 0; r < 4; ++r) col[r] -= ov * states[first + prev][r];
      }
      const double n = norm(col);
      if (n > best * (1.0 + 1e-9) + 1e-300) {
        best = n;
        pick = m;
        best_col = col;
      }
    }
    used[pick] = true;
    for (auto& z : best_col) z /= best;
    const cplx phase = std::conj(best_col[pick]) / std::abs(best_col[pick]);
    for (auto& z : best_col) z *= phase;
    best_col[pick] = cplx(best_col[pick].real(), 0.0);
    states[first + out] = best_col;
  }
}

}  // namespace

EigenSolution eigensolve(const Matrix4c& input) {
  const double hnorm = input.frobenius_norm();
  if ((input - input.adjoint()).frobenius_norm() > 1e-9 * hnorm)
    fail(ErrorCode::NonHermitianInput, "eigensolve: input matrix is not Hermitian");

  Matrix4c a = input;
  for (std::size_t r = 0; r < 4; ++r) {
    a(r, r) = a(r, r).real();
    for (std::size_t c = r + 1; c < 4; ++c) {
      const cplx avg = 0.5 * (a(r, c) + std::conj(a(c, r)));
      a(r, c) = avg;
      a(c, r) = std::conj(avg);
    }
  }
  Matrix4c v = Matrix4c::identity();

  const double target = 1e-12 * hnorm;
  for (int sweep = 0; sweep < 64 && off_diagonal_norm(a) > target; ++sweep) {
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::size_t q = p + 1; q < 4; ++q) {
        const double g = std::abs(a(p, q));
        if (g == 0.0) continue;
        const cplx e = a(p, q) / g;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * g);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // U = diag(1, conj(e)) on (p,q) followed by the real rotation [[c, s], [-s, c]].
        const cplx upp = c;
        const cplx upq = s;
        const cplx uqp = -s * std::conj(e);
        const cplx uqq = c * std::conj(e);

        for (std::size_t k = 0; k < 4; ++k) {  // A <- A U
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * upp + akq * uqp;
          a(k, q) = akp * upq + akq * uqq;
        }
        for (std::size_t k = 0; k < 4; ++k) {  // A <- U^dagger A
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < 4; ++k) {  // V <- V U
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * upp + vkq * uqp;
          v(k, q) = vkp * upq + vkq * uqq;
        }
      }
    }
  }

  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });

  EigenSolution sol;
  for (std::size_t k = 0; k < 4; ++k) {
    sol.energies[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < 4; ++r) sol.states[k][r] = v(r, order[k]);
    fix_phase(sol.states[k]);
  }

  const double tol = 1e-9 * std::max(hnorm, 1.0);
  std::size_t start = 0;
  while (start < 4) {
    std::size_t end = start + 1;
    while (end < 4 && sol.energies[end] - sol.energies[end - 1] <= tol) ++end;
    if (end - start > 1) canonicalize_subspace(sol.states, start, end - start);
    start = end;
  }
  return sol;
}

std::array<double, 4> analytic_energies_axial(const SpinSystem& sys, double b_z) {
  sys.validate();
  const double z = sys.g_par * PhysicalConstants::mu_B / PhysicalConstants::hbar * b_z;
  return {sys.d + 1.5 * z, -sys.d + 0.5 * z, -sys.d - 0.5 * z, sys.d - 1.5 * z};
}

double level_ordering_bound(const SpinSystem& sys) {
  sys.validate();
  // max(E_{+-3/2}) = D + 3/2 z meets min(E_{+-1/2}) = -D - 1/2 z at z = -D.
  const double gpar = sys.g_par * PhysicalConstants::mu_B / PhysicalConstants::hbar;
  return std::abs(sys.d) / gpar;
}

Transition transition(const EigenSolution& sol, std::size_t i, std::size_t j) {
  if (i > 3 || j > 3 || i == j)
    fail(ErrorCode::IndexOutOfRange,
         "transition: indices must be distinct and in 0..3 (got " + std::to_string(i) + ", " +
             std::to_string(j) + ")");
  const auto& sx = spin_three_halves().sx;
  const cplx m = inner(sol.states[i], sx * sol.states[j]);
  return {std::abs(sol.energies[j] - sol.energies[i]), std::norm(m)};
}

double cavity_band_transition(const SpinSystem& sys, const FieldVector& field) {
  const EigenSolution sol = eigensolve(build_hamiltonian(sys, field));
  return sol.energies[3] - sol.energies[1];
}

std::vector<EnergySweepRow> energy_level_sweep(const SpinSystem& sys, double theta, double phi,
                                               double b_min, double b_max, std::size_t n_points) {
  if (n_points < 2 || !(b_max > b_min))
    fail(ErrorCode::EmptyRange, "energy_level_sweep: need n_points >= 2 and b_max > b_min");

  std::vector<EnergySweepRow> rows;
  rows.reserve(n_points);
  std::array<Vector4c, 4> tracked{};
  for (std::size_t n = 0; n < n_points; ++n) {
    const double b =
        b_min + (b_max - b_min) * static_cast<double>(n) / static_cast<double>(n_points - 1);
    const EigenSolution sol = eigensolve(build_hamiltonian(sys, FieldVector{b, theta, phi}));
    EnergySweepRow row{b, {}};
    if (n == 0) {
      row.energies = sol.energies;
      tracked = sol.states;
    } else {
      // Exhaustive assignment over the 24 permutations maximising total overlap.
      std::array<std::array<double, 4>, 4> ov{};
      for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t j = 0; j < 4; ++j) ov[k][j] = std::norm(inner(tracked[k], sol.states[j]));
      std::array<std::size_t, 4> perm{0, 1, 2, 3}, best_perm = perm;
      double best = -1.0;
      do {
        double s = 0.0;
        for (std::size_t k = 0; k < 4; ++k) s += ov[k][perm[k]];
        if (s > best + 1e-12) {
          best = s;
          best_perm = perm;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      for (std::size_t k = 0; k < 4; ++k) {
        row.energies[k] = sol.energies[best_perm[k]];
        tracked[k] = sol.states[best_perm[k]];
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace spinsense
