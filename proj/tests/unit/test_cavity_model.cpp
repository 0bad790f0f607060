#include <cmath>
#include <complex>
#include <random>

#include "spinsense/cavity_model.hpp"
#include "spinsense/constants.hpp"
#include "support.hpp"

using namespace spinsense;

namespace {

using lcplx = std::complex<long double>;

const double kOmegaC = hz_to_rad(11.4e9);
const double kKappaHalf = hz_to_rad(330e3);
const double kGEff = hz_to_rad(3.5e6);
const double kKappaS = hz_to_rad(42e6);
const double kKappaTh = hz_to_rad(120e3);
const double kN = 3.5e14;

CavityParams critical_cavity() { return {kOmegaC, kKappaHalf, kKappaHalf}; }

EnsembleParams reference_ensemble() {
  return {kGEff / std::sqrt(kN), kN, kKappaS, kKappaTh, kOmegaC};
}

// Direct long-double evaluation of the saturated interaction and reflection.
lcplx pi_oracle(long double g2, long double n, long double ks, long double kth, long double det,
                long double n_cav) {
  const lcplx i(0.0L, 1.0L);
  lcplx denom = ks / 2 + i * det;
  if (n_cav > 0) denom += (g2 * n_cav * ks / (2 * kth)) / (ks / 2 - i * det);
  return g2 * n / denom;
}

lcplx gamma_oracle(const CavityParams& c, const EnsembleParams& e, double omega_d, double power) {
  const long double kc = static_cast<long double>(c.kappa_c0) + c.kappa_c1;
  const long double n_cav =
      static_cast<long double>(power) / (PhysicalConstants::hbar * static_cast<long double>(omega_d) * kc);
  const long double g2 = static_cast<long double>(e.g_s) * e.g_s;
  const lcplx pi = pi_oracle(g2, e.n_spins, e.kappa_s, e.kappa_th,
                             static_cast<long double>(omega_d) - e.omega_s, n_cav);
  const lcplx i(0.0L, 1.0L);
  return -1.0L + static_cast<long double>(c.kappa_c1) /
                     (kc / 2 + i * (static_cast<long double>(omega_d) - c.omega_c) + pi);
}

}  // namespace

TEST_CASE("photon number") {
  DriveParams d{kOmegaC, 0.0};
  CHECK(photon_number(d, 2 * kKappaHalf) == 0.0);
  d.power = 1e-3;
  const long double want = 1e-3L / (1.054571817e-34L * (2.0L * 3.14159265358979323846L * 11.4e9L) *
                                    (2.0L * 3.14159265358979323846L * 660e3L));
  CHECK(rel_err(photon_number(d, 2 * kKappaHalf), static_cast<double>(want)) < 1e-13);
  const double n1 = photon_number(d, 2 * kKappaHalf);
  d.power = 2e-3;
  CHECK(photon_number(d, 2 * kKappaHalf) == 2.0 * n1);
  CHECK_ERROR_CODE(photon_number(d, 0.0), ErrorCode::ZeroLinewidth);
}

TEST_CASE("spin interaction") {
  const EnsembleParams e = reference_ensemble();
  const DriveParams on{kOmegaC, 0.0};
  SUBCASE("empty ensemble") {
    EnsembleParams z = e;
    z.n_spins = 0.0;
    CHECK(spin_interaction(z, on, 0.0) == cplx(0.0, 0.0));
  }
  SUBCASE("on resonance, unsaturated") {
    const cplx pi = spin_interaction(e, on, 0.0);
    CHECK(pi.imag() == doctest::Approx(0.0).scale(1.0));
    CHECK(rel_err(pi.real(), 2 * kGEff * kGEff / kKappaS) < 1e-12);
    const double xi = 4 * kGEff * kGEff / (kKappaS * 2 * kKappaHalf);
    CHECK(rel_err(pi.real(), 0.5 * xi * 2 * kKappaHalf) < 1e-12);
    CHECK(rad_to_hz(pi.real()) == doctest::Approx(0.59e6).epsilon(0.02));
  }
  SUBCASE("matches direct evaluation off resonance with saturation") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> det(-3 * kKappaS, 3 * kKappaS), ncav(0.0, 1e12);
    for (int k = 0; k < 200; ++k) {
      const DriveParams d{kOmegaC + det(rng), 0.0};
      const double n = ncav(rng);
      const cplx got = spin_interaction(e, d, n);
      const lcplx want = pi_oracle(static_cast<long double>(e.g_s) * e.g_s, e.n_spins, e.kappa_s,
                                   e.kappa_th, d.omega_d - e.omega_s, n);
      CHECK(std::abs(lcplx(got.real(), got.imag()) - want) / std::abs(want) < 1e-12L);
      CHECK(got.real() >= 0.0);
    }
  }
  SUBCASE("saturation lowers the on-resonance absorption") {
    double prev = spin_interaction(e, on, 0.0).real();
    for (double n = 1e6; n < 1e16; n *= 3.0) {
      const double cur = spin_interaction(e, on, n).real();
      CHECK(cur < prev);
      prev = cur;
    }
  }
  SUBCASE("errors") {
    EnsembleParams bad = e;
    bad.kappa_s = 0.0;
    CHECK_ERROR_CODE(spin_interaction(bad, on, 0.0), ErrorCode::ZeroSpinLinewidth);
    bad = e;
    bad.kappa_th = 0.0;
    CHECK_NOTHROW(spin_interaction(bad, on, 0.0));
    CHECK_ERROR_CODE(spin_interaction(bad, on, 1.0), ErrorCode::ZeroKappaTh);
  }
}

TEST_CASE("saturated approximation") {
  const EnsembleParams e = reference_ensemble();
  SUBCASE("exact without drive at any detuning") {
    for (double det : {0.0, 0.01, 0.3, 1.0, 5.0}) {
      const DriveParams d{kOmegaC + det * kKappaS, 0.0};
      const cplx a = pi_saturated_approx(e, d, 0.0);
      const cplx f = spin_interaction(e, d, 0.0);
      CHECK(std::abs(a - f) / std::abs(f) < 1e-12);
    }
  }
  SUBCASE("small detuning stays within ten percent when saturated") {
    const CavityParams c = critical_cavity();
    const double n = photon_number({kOmegaC, dbm_to_watts(0.0)}, c.kappa_c());
    for (int k = -20; k <= 20; ++k) {
      const DriveParams d{kOmegaC + k * kKappaS / 200.0, 0.0};
      const cplx a = pi_saturated_approx(e, d, n);
      const cplx f = spin_interaction(e, d, n);
      CHECK(std::abs(a - f) / std::abs(f) < 0.10);
    }
  }
  SUBCASE("large detuning degrades") {
    const double n = 1e14;
    const DriveParams d{kOmegaC + 3 * kKappaS, 0.0};
    const cplx a = pi_saturated_approx(e, d, n);
    const cplx f = spin_interaction(e, d, n);
    CHECK(std::abs(a - f) / std::abs(f) > 0.10);
  }
}

TEST_CASE("reflection") {
  const CavityParams c = critical_cavity();
  EnsembleParams e = reference_ensemble();
  SUBCASE("bare cavity at critical coupling is matched") {
    EnsembleParams z = e;
    z.n_spins = 0.0;
    CHECK(std::abs(reflection(c, z, {kOmegaC, 1e-3})) < 1e-15);
  }
  SUBCASE("far detuned limit") {
    const cplx g = reflection(c, e, {kOmegaC + 1e6 * kKappaHalf, 1e-3});
    CHECK(std::abs(g - cplx(-1.0, 0.0)) < 1e-5);
  }
  SUBCASE("reference parameters on resonance at low power") {
    const DriveParams d{kOmegaC, 1e-15};
    const cplx g = reflection(c, e, d);
    const lcplx want = gamma_oracle(c, e, d.omega_d, d.power);
    CHECK(std::abs(lcplx(g.real(), g.imag()) - want) < 1e-12L);
    CHECK(std::abs(g.imag()) < 1e-12);
    CHECK(std::abs(g) > 0.0);
    CHECK(std::abs(g) < 1.0);
    const double pi = 2 * kGEff * kGEff / kKappaS;
    CHECK(g.real() == doctest::Approx(-1.0 + kKappaHalf / (kKappaHalf + pi)).epsilon(1e-9));
  }
  SUBCASE("passivity") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto lg = [&](double lo, double hi) { return std::exp(std::log(lo) + u(rng) * std::log(hi / lo)); };
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const CavityParams cc{kOmegaC, lg(1e2, 1e8), lg(1e2, 1e8)};
      const EnsembleParams ee{lg(1e-3, 1e3), lg(1e6, 1e18), lg(1e4, 1e10), lg(1e2, 1e8),
                              kOmegaC + (u(rng) - 0.5) * 1e9};
      const DriveParams dd{kOmegaC + (u(rng) - 0.5) * 1e9, lg(1e-12, 1.0)};
      worst = std::max(worst, std::abs(reflection(cc, ee, dd)));
    }
    CHECK(worst <= 1.0 + 1e-9);
  }
  SUBCASE("no coupling reduces to the bare Lorentzian") {
    e.g_s = 0.0;
    for (int k = -50; k <= 50; ++k) {
      const double w = kOmegaC + k * kKappaHalf / 5.0;
      const cplx want = -1.0 + c.kappa_c1 / cplx(c.kappa_c() / 2, w - kOmegaC);
      CHECK(std::abs(reflection(c, e, {w, 1e-3}) - want) < 1e-15);
    }
  }
  SUBCASE("detuning symmetry when spins sit on the undriven cavity") {
    for (int k = 1; k <= 40; ++k) {
      const double dw = k * kKappaHalf / 4.0;
      const cplx up = reflection(c, e, {kOmegaC + dw, 0.0});
      const cplx dn = reflection(c, e, {kOmegaC - dw, 0.0});
      CHECK(std::abs(up.real() - dn.real()) < 1e-10);
      CHECK(std::abs(up.imag() + dn.imag()) < 1e-10);
    }
  }
}

TEST_CASE("reflection with non-idealities") {
  const CavityParams c = critical_cavity();
  const EnsembleParams e = reference_ensemble();
  const DriveParams d{kOmegaC + 2 * kKappaHalf, 1e-3};
  const cplx g = reflection(c, e, d);
  SUBCASE("ideal wrapper is the identity") {
    CHECK(reflection_with_nonidealities(c, e, d, {}) == g);
  }
  SUBCASE("half-turn phase flips the sign") {
    NonIdealityParams ni;
    ni.psi = std::numbers::pi;
    CHECK(std::abs(reflection_with_nonidealities(c, e, d, ni) + g) < 1e-15);
  }
  SUBCASE("table values at the mean drive") {
    NonIdealityParams ni{-0.008, 0.12, 0.003, 1e-9, 0.14, -1.2e-8, -7.3e6, -5.6e5, d.omega_d};
    EnsembleParams es = e;
    es.omega_s = e.omega_s + 7.3e6;
    const DriveParams ds{d.omega_d + 5.6e5, d.power};
    const lcplx inner = gamma_oracle(c, es, ds.omega_d, ds.power);
    const lcplx want = lcplx(-0.008L, 0.12L) +
                       std::polar(1.0L, 0.14L) * 1.003L * inner;
    const cplx got = reflection_with_nonidealities(c, e, d, ni);
    CHECK(std::abs(lcplx(got.real(), got.imag()) - want) < 1e-12L);
  }
  SUBCASE("warnings flag large offsets only") {
    NonIdealityParams ni{-0.008, 0.12, 0.003, 1e-9, 0.14, -1.2e-8, -7.3e6, -5.6e5, 0.0};
    CHECK(nonideality_warnings(ni).empty());
    ni.o_i = 0.9;
    ni.psi = -2.0;
    CHECK(nonideality_warnings(ni).size() == 2);
  }
}

TEST_CASE("coupling constants") {
  const double v = 52.2e-9;
  SUBCASE("single spin coupling") {
    CHECK(single_spin_coupling(v, kOmegaC, 0.0) == 0.0);
    const double g = single_spin_coupling(v, kOmegaC, 1.0);
    CHECK(rel_err(single_spin_coupling(4 * v, kOmegaC, 1.0), g / 2) < 1e-14);
    const double want = 0.5 * PhysicalConstants::gamma_e *
                        std::sqrt(PhysicalConstants::hbar * kOmegaC * PhysicalConstants::mu_0 / v);
    CHECK(rel_err(g, want) < 1e-14);
    CHECK(g * std::sqrt(kN) == doctest::Approx(kGEff).epsilon(0.10));
    CHECK_ERROR_CODE(single_spin_coupling(0.0, kOmegaC, 1.0), ErrorCode::InvalidArgument);
  }
  SUBCASE("cooperativity") {
    const EnsembleParams e = reference_ensemble();
    const double xi = cooperativity(e, critical_cavity());
    CHECK(xi == doctest::Approx(1.8).epsilon(0.05 / 1.8));
    EnsembleParams z = e;
    z.g_s = 0.0;
    CHECK(cooperativity(z, critical_cavity()) == 0.0);
    z = e;
    z.n_spins *= 2;
    CHECK(rel_err(cooperativity(z, critical_cavity()), 2 * xi) < 1e-14);
  }
  SUBCASE("saturation threshold power") {
    const double gs = single_spin_coupling(v, kOmegaC, 1.0);
    const double kc = 2 * kKappaHalf;
    const double p = kappa_th_threshold_power(2.6e-6, 5.5e-9, gs, kOmegaC, kc);
    CHECK(std::abs(watts_to_dbm(p) - 2.0) <= 0.5);
    const double ks = 2 / 5.5e-9, kth = 1 / 2.6e-6;
    const double want = ks * kth / (2 * gs * gs) * PhysicalConstants::hbar * kOmegaC * kc;
    CHECK(rel_err(p, want) < 1e-14);
    CHECK(p == doctest::Approx(1.6e-3).epsilon(0.05));
    const double n_cav = photon_number({kOmegaC, p}, kc);
    CHECK(rel_err(gs * gs * n_cav / kth, ks / 2) < 1e-12);
    CHECK(rel_err(kappa_th_threshold_power(2.6e-6, 5.5e-9, 2 * gs, kOmegaC, kc), p / 4) < 1e-14);
    CHECK_ERROR_CODE(kappa_th_threshold_power(2.6e-6, 5.5e-9, 0.0, kOmegaC, kc),
                     ErrorCode::ZeroCoupling);
  }
}
