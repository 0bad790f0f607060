#include <cmath>
#include <random>
#include <vector>

#include "spinsense/cavity_model.hpp"
#include "spinsense/constants.hpp"
#include "spinsense/crossing_fit.hpp"
#include "support.hpp"

using namespace spinsense;

namespace {

const double kOmegaC = hz_to_rad(11.4e9);
const double kN = 3.5e14;

CrossingModel reference_truth() {
  CrossingModel m;
  m.cavity = {kOmegaC, hz_to_rad(330e3), hz_to_rad(330e3)};
  m.ensemble = {hz_to_rad(3.5e6) / std::sqrt(kN), kN, hz_to_rad(42e6), hz_to_rad(120e3), 0.0};
  m.nonideal = {-0.008, 0.12, 0.003, 1e-9, 0.14, -1.2e-8, -7.3e6, -5.6e5, 0.0};
  return m;
}

GridSpec reference_grid(double power_dbm = 0.0) {
  return GridSpec::centered(kOmegaC, hz_to_rad(200e6), 50, hz_to_rad(5e6), 50,
                            dbm_to_watts(power_dbm));
}

CrossingModel perturbed(const CrossingModel& truth, std::mt19937_64& rng, double frac) {
  std::uniform_real_distribution<double> u(-frac, frac);
  auto p = pack_parameters(truth);
  for (auto& v : p) v *= 1.0 + u(rng);
  return unpack_parameters(p, truth);
}

double physical_error(const CrossingModel& got, const CrossingModel& want, FitParam k) {
  const auto a = pack_parameters(got), b = pack_parameters(want);
  const auto i = static_cast<std::size_t>(k);
  return std::abs(a[i] - b[i]) / std::abs(b[i]);
}

}  // namespace

TEST_CASE("grid specification") {
  const GridSpec g = reference_grid();
  CHECK(g.omega_s_values.size() == 50);
  CHECK(g.omega_d_values.front() == doctest::Approx(kOmegaC - hz_to_rad(2.5e6)));
  CHECK(g.mean_drive() == doctest::Approx(kOmegaC).epsilon(1e-15));
  CHECK_ERROR_CODE(GridSpec::centered(kOmegaC, 1.0, 1, 1.0, 5, 0.0), ErrorCode::InvalidArgument);
  GridSpec bad = g;
  std::swap(bad.omega_d_values[3], bad.omega_d_values[4]);
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::InvalidArgument);
  ComplexGrid2D short_grid{g, std::vector<cplx>(10)};
  CHECK_ERROR_CODE(short_grid.validate(), ErrorCode::InvalidArgument);
}

TEST_CASE("simulate crossing") {
  const CrossingModel truth = reference_truth();
  const GridSpec spec = reference_grid();
  SUBCASE("noiseless grid is the model") {
    const ComplexGrid2D a = simulate_crossing(truth, spec, 0.0, 1);
    const ComplexGrid2D b = evaluate_crossing(truth, spec, *kernels::kernels_for(kernels::Backend::Scalar));
    CHECK(a.values == b.values);
  }
  SUBCASE("no coupling gives identical rows") {
    CrossingModel bare = truth;
    bare.ensemble.g_s = 0.0;
    const ComplexGrid2D a = simulate_crossing(bare, spec, 0.0, 1);
    for (std::size_t i = 1; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j) CHECK(a.at(i, j) == a.at(0, j));
  }
  SUBCASE("seeded noise is reproducible") {
    const ComplexGrid2D a = simulate_crossing(truth, spec, 0.01, 42);
    const ComplexGrid2D b = simulate_crossing(truth, spec, 0.01, 42);
    const ComplexGrid2D c = simulate_crossing(truth, spec, 0.01, 43);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
  }
  SUBCASE("noise has the requested spread per channel") {
    const ComplexGrid2D clean = simulate_crossing(truth, spec, 0.0, 5);
    const ComplexGrid2D noisy = simulate_crossing(truth, spec, 0.02, 5);
    double sr = 0, si = 0;
    for (std::size_t k = 0; k < clean.values.size(); ++k) {
      const cplx d = noisy.values[k] - clean.values[k];
      sr += d.real() * d.real();
      si += d.imag() * d.imag();
    }
    const double n = static_cast<double>(clean.values.size());
    CHECK(std::sqrt(sr / n) == doctest::Approx(0.02).epsilon(0.05));
    CHECK(std::sqrt(si / n) == doctest::Approx(0.02).epsilon(0.05));
  }
  SUBCASE("negative noise is rejected") {
    CHECK_ERROR_CODE(simulate_crossing(truth, spec, -1.0, 0), ErrorCode::InvalidArgument);
  }
}

TEST_CASE("dip tracking follows the dense-scan minimum") {
  CrossingModel m = reference_truth();
  m.nonideal = {};
  const double wc = kOmegaC;
  for (double det_mhz : {-20.0, -5.0, 0.0, 5.0, 20.0}) {
    GridSpec spec = GridSpec::centered(wc, hz_to_rad(1e6), 2, hz_to_rad(4e6), 801, 1e-12);
    spec.omega_s_values = {wc + hz_to_rad(det_mhz * 1e6) - 1.0, wc + hz_to_rad(det_mhz * 1e6)};
    const ComplexGrid2D grid = evaluate_crossing(m, spec);
    const double got = dip_frequencies(grid)[1];

    EnsembleParams e = m.ensemble;
    e.omega_s = spec.omega_s_values[1];
    double best = 0, best_val = 1e9;
    for (int k = -200000; k <= 200000; ++k) {
      const double w = wc + hz_to_rad(2e6) * k / 200000.0;
      const double v = std::abs(reflection(m.cavity, e, {w, 1e-12}));
      if (v < best_val) best_val = v, best = w;
    }
    CAPTURE(det_mhz);
    CHECK(std::abs(got - best) < hz_to_rad(2e3));
  }
}

TEST_CASE("normalisation") {
  const GridSpec spec = reference_grid();
  SUBCASE("constant grid") {
    const cplx c = std::polar(3.0, 0.7);
    ComplexGrid2D g{spec, std::vector<cplx>(50 * 50, c)};
    for (auto mode : {Normalization::BorderMedian, Normalization::MaxAbs}) {
      const ComplexGrid2D n = normalize_grid(g, mode);
      for (const auto& z : n.values) {
        CHECK(std::abs(z) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::arg(z) == doctest::Approx(0.7).epsilon(1e-15));
      }
    }
  }
  SUBCASE("scale invariance") {
    const ComplexGrid2D g = simulate_crossing(reference_truth(), spec, 0.01, 3);
    ComplexGrid2D g5 = g;
    for (auto& z : g5.values) z *= 5.0;
    const ComplexGrid2D a = normalize_grid(g), b = normalize_grid(g5);
    for (std::size_t k = 0; k < a.values.size(); ++k)
      CHECK(std::abs(a.values[k] - b.values[k]) < 1e-15);
  }
  SUBCASE("simulated grid has unit border") {
    CrossingModel m = reference_truth();
    m.nonideal = {};
    ComplexGrid2D g = simulate_crossing(m, spec, 0.0, 0);
    for (auto& z : g.values) z *= 0.37;
    const ComplexGrid2D n = normalize_grid(g);
    double worst = 0;
    for (std::size_t i = 0; i < n.rows(); ++i)
      for (std::size_t j : {std::size_t{0}, n.cols() - 1}) worst = std::max(worst, std::abs(std::abs(n.at(i, j)) - 1.0));
    CHECK(worst < 0.1);
  }
  SUBCASE("zero border") {
    ComplexGrid2D g{spec, std::vector<cplx>(50 * 50)};
    g.at(20, 20) = 1.0;
    CHECK_ERROR_CODE(normalize_grid(g), ErrorCode::AllZeroBorder);
    CHECK(normalize_grid(g, Normalization::MaxAbs).at(20, 20) == cplx(1.0, 0.0));
  }
}

TEST_CASE("parameter packing") {
  const CrossingModel m = reference_truth();
  const auto p = pack_parameters(m);
  CHECK(p[static_cast<std::size_t>(FitParam::GEff)] == doctest::Approx(hz_to_rad(3.5e6)));
  const CrossingModel back = unpack_parameters(p, m);
  CHECK(pack_parameters(back) == p);
  CHECK(back.ensemble.n_spins == kN);
}

TEST_CASE("objective") {
  const CrossingModel truth = reference_truth();
  const ComplexGrid2D data = simulate_crossing(truth, reference_grid(), 0.0, 0);
  CHECK(crossing_objective(truth, data) < 1e-9);
  CrossingModel off = truth;
  off.ensemble.kappa_s *= 1.1;
  CHECK(crossing_objective(off, data) > 1e-3);
}

TEST_CASE("fit from the truth stays at the truth") {
  const CrossingModel truth = reference_truth();
  const ComplexGrid2D data = simulate_crossing(truth, reference_grid(), 0.0, 0);
  const FitResult r = fit_crossing(data, truth);
  CHECK(r.objective_value < 1e-9);
  for (std::size_t k = 0; k < kFitParamCount; ++k)
    CHECK(physical_error(r.model(), truth, static_cast<FitParam>(k)) < 1e-6);
}

TEST_CASE("noiseless round trip over random truths") {
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = pack_parameters(reference_truth());
    for (auto& v : p) v *= 1.0 + u(rng);
    const CrossingModel truth = unpack_parameters(p, reference_truth());
    const ComplexGrid2D data = simulate_crossing(truth, reference_grid(), 0.0, 0);
    const CrossingModel guess = perturbed(truth, rng, 0.2);
    const FitResult r = fit_crossing(data, guess);
    CAPTURE(trial);
    CAPTURE(r.objective_value);
    for (std::size_t k = 0; k < kFitParamCount; ++k) {
      const double err = physical_error(r.model(), truth, static_cast<FitParam>(k));
      CAPTURE(k);
      CHECK(err < (k < 5 ? 0.01 : 0.05));
    }
  }
}

TEST_CASE("fit is deterministic") {
  const CrossingModel truth = reference_truth();
  const ComplexGrid2D data = simulate_crossing(truth, reference_grid(), 0.01, 9);
  std::mt19937_64 rng(4);
  const CrossingModel guess = perturbed(truth, rng, 0.2);
  FitOptions o;
  o.starts = 3;
  o.seed = 17;
  o.max_evaluations = 6000;
  const FitResult a = fit_crossing(data, guess, std::nullopt, o);
  const FitResult b = fit_crossing(data, guess, std::nullopt, o);
  CHECK(pack_parameters(a.model()) == pack_parameters(b.model()));
  CHECK(a.objective_value == b.objective_value);
  CHECK(a.evaluations == b.evaluations);
  CHECK(a.objective_history == b.objective_history);
  for (std::size_t k = 1; k < a.objective_history.size(); ++k)
    CHECK(a.objective_history[k] <= a.objective_history[k - 1]);
  CHECK(a.evaluations <= o.max_evaluations + 3 * (kFitParamCount + 2));
  CHECK(a.objective_value <= crossing_objective(guess, data));
}

TEST_CASE("fit bounds") {
  const CrossingModel truth = reference_truth();
  const GridSpec spec = reference_grid();
  const ComplexGrid2D data = simulate_crossing(truth, spec, 0.0, 0);
  const FitBounds b = default_bounds(truth, spec);
  for (std::size_t k = 0; k < kFitParamCount; ++k) CHECK(b.lower[k] < b.upper[k]);
  CHECK(b.lower[0] == doctest::Approx(truth.cavity.kappa_c0 / 10));
  FitBounds inverted = b;
  std::swap(inverted.lower[2], inverted.upper[2]);
  CHECK_ERROR_CODE(fit_crossing(data, truth, inverted), ErrorCode::InvalidBounds);
  FitBounds outside = b;
  outside.upper[3] = truth.ensemble.kappa_th * 0.5;
  outside.lower[3] = truth.ensemble.kappa_th * 0.1;
  CHECK_ERROR_CODE(fit_crossing(data, truth, outside), ErrorCode::InvalidBounds);
  FitBounds nonpositive = b;
  nonpositive.lower[4] = 0.0;
  CHECK_ERROR_CODE(fit_crossing(data, truth, nonpositive), ErrorCode::InvalidBounds);

  FitBounds tight = b;
  tight.upper[2] = truth.ensemble.kappa_s * 0.9;
  tight.lower[2] = truth.ensemble.kappa_s * 0.5;
  CrossingModel g = truth;
  g.ensemble.kappa_s *= 0.7;
  FitOptions o;
  o.max_evaluations = 3000;
  const FitResult r = fit_crossing(data, g, tight, o);
  CHECK(r.ensemble.kappa_s <= tight.upper[2]);
  CHECK(r.ensemble.kappa_s >= tight.lower[2]);
}

TEST_CASE("relaxation times") {
  EnsembleParams e{1.0, 1.0, hz_to_rad(42e6), hz_to_rad(120e3), 0.0};
  const RelaxationTimes t = relaxation_times(e);
  CHECK(t.t2 == doctest::Approx(7.6e-9).epsilon(0.005));
  CHECK(t.t1 == doctest::Approx(1.3e-6).epsilon(0.02));
  e.kappa_s = 2.0;
  CHECK(relaxation_times(e).t2 == 1.0);
  e.kappa_th = 0.0;
  CHECK_ERROR_CODE(relaxation_times(e), ErrorCode::ZeroRate);
}

TEST_CASE("kappa_th identifiability depends on drive power") {
  const CrossingModel truth = reference_truth();
  const double kc = truth.cavity.kappa_c();
  const double p_th = kappa_th_threshold_power(1.0 / truth.ensemble.kappa_th,
                                               2.0 / truth.ensemble.kappa_s, truth.ensemble.g_s,
                                               kOmegaC, kc);
  const double p_dbm = watts_to_dbm(p_th);
  auto errors = [&](double dbm) {
    std::vector<double> out;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const ComplexGrid2D data = simulate_crossing(truth, reference_grid(dbm), 0.05, seed);
      std::mt19937_64 rng(seed);
      const FitResult r = fit_crossing(data, perturbed(truth, rng, 0.2));
      out.push_back(physical_error(r.model(), truth, FitParam::KappaTh));
    }
    return out;
  };
  const auto at = errors(p_dbm);
  const auto below = errors(p_dbm - 10.0);
  double worst_at = 0, rms_below = 0;
  for (double e : at) worst_at = std::max(worst_at, e);
  for (double e : below) rms_below += e * e;
  rms_below = std::sqrt(rms_below / static_cast<double>(below.size()));
  CAPTURE(p_dbm);
  CHECK(worst_at < 0.20);
  CHECK(rms_below > 0.50);
}
