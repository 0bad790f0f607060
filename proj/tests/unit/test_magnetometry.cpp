#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "spinsense/constants.hpp"
#include "spinsense/magnetometry.hpp"
#include "support.hpp"

using namespace spinsense;

namespace {

SensorModel reference_sensor(double power_dbm) {
  SensorModel m;
  const double wc = hz_to_rad(11.4e9);
  m.cavity = {wc, hz_to_rad(330e3), hz_to_rad(330e3)};
  m.ensemble = {hz_to_rad(3.5e6) / std::sqrt(3.5e14), 3.5e14, hz_to_rad(42e6), hz_to_rad(120e3), 0.0};
  m.omega_d = wc;
  m.power = dbm_to_watts(power_dbm);
  return m;
}

std::vector<double> field_axis(double center_gauss, double span_gauss, std::size_t n) {
  std::vector<double> b(n);
  for (std::size_t k = 0; k < n; ++k)
    b[k] = gauss_to_tesla(center_gauss - 0.5 * span_gauss + span_gauss * static_cast<double>(k) / (n - 1.0));
  return b;
}

}  // namespace

TEST_CASE("dispersive slope") {
  std::vector<double> x(21);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = 1e-3 * static_cast<double>(k) * static_cast<double>(k + 3) / 20.0;
  SUBCASE("flat trace") {
    const SlopeResult r = dispersive_slope({x, std::vector<double>(21, 0.1), std::vector<double>(21, 0.4)});
    CHECK(r.m_max == 0.0);
  }
  SUBCASE("linear and quadratic traces are exact everywhere") {
    std::vector<double> lin(21), quad(21);
    for (std::size_t k = 0; k < x.size(); ++k) {
      lin[k] = 2994.0 * x[k] - 0.2;
      quad[k] = 5e5 * x[k] * x[k] - 40.0 * x[k];
    }
    const SlopeResult a = dispersive_slope({x, lin, lin});
    for (double s : a.slope) CHECK(s == doctest::Approx(2994.0).epsilon(1e-9));
    CHECK(a.m_max == doctest::Approx(2994.0).epsilon(1e-9));
    const SlopeResult b = dispersive_slope({x, quad, quad}, 7);
    for (std::size_t k = 0; k < x.size(); ++k)
      CHECK(b.slope[k] == doctest::Approx(1e6 * x[k] - 40.0).epsilon(1e-8).scale(40.0));
    CHECK(b.argmax == 20);
  }
  SUBCASE("decreasing axis") {
    std::vector<double> xr(x.rbegin(), x.rend()), y(21);
    for (std::size_t k = 0; k < 21; ++k) y[k] = -7.0 * xr[k];
    for (double s : dispersive_slope({xr, y, y}).slope) CHECK(s == doctest::Approx(-7.0));
  }
  SUBCASE("errors") {
    const std::vector<double> four{0, 1, 2, 3};
    CHECK_ERROR_CODE(dispersive_slope({four, four, four}), ErrorCode::TooFewPoints);
    std::vector<double> bad = x;
    bad[5] = bad[4];
    CHECK_ERROR_CODE(dispersive_slope({bad, x, x}), ErrorCode::InvalidArgument);
  }
}

TEST_CASE("amplitude spectrum") {
  SUBCASE("bin-centred sine") {
    const double fs = 1000.0;
    const std::size_t n = 4000;
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) s[k] = std::sin(2 * std::numbers::pi * 10.0 * k / fs);
    const Spectrum sp = amplitude_spectrum(s, fs);
    CHECK(sp.bin_width == doctest::Approx(0.25));
    CHECK(tone_rms(sp, 10.0, 0.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  }
  SUBCASE("zero input") {
    const Spectrum sp = amplitude_spectrum(std::vector<double>(256, 0.0), 100.0);
    for (double a : sp.asd) CHECK(a == 0.0);
  }
  SUBCASE("white noise density") {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> s(200000);
    for (auto& v : s) v = nd(rng);
    SpectrumOptions o;
    o.segment_length = 2000;
    const Spectrum sp = amplitude_spectrum(s, 1000.0, o);
    double mean = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 1; k + 1 < sp.asd.size(); ++k, ++count) mean += sp.asd[k];
    mean /= static_cast<double>(count);
    CHECK(mean == doctest::Approx(0.0447).epsilon(0.05));
    CHECK(noise_floor(sp, 10.0, 490.0) == doctest::Approx(std::sqrt(2.0 / 1000.0)).epsilon(0.05));
  }
  SUBCASE("parseval for a single segment") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> s(4096);
    for (auto& v : s) v = nd(rng);
    const Spectrum sp = amplitude_spectrum(s, 1.0);
    double windowed = 0.0, w2 = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double w = 0.5 * (1 - std::cos(2 * std::numbers::pi * k / s.size()));
      windowed += w * w * s[k] * s[k];
      w2 += w * w;
    }
    double integrated = 0.0;
    for (double a : sp.asd) integrated += a * a * sp.bin_width;
    CHECK(integrated == doctest::Approx(windowed / w2).epsilon(1e-9));
  }
  SUBCASE("errors") {
    CHECK_ERROR_CODE(amplitude_spectrum(std::vector<double>(15, 1.0), 10.0), ErrorCode::TooFewSamples);
    const Spectrum sp = amplitude_spectrum(std::vector<double>(64, 1.0), 10.0);
    CHECK_ERROR_CODE(noise_floor(sp, 100.0, 200.0), ErrorCode::EmptyRange);
  }
}

TEST_CASE("noise floor skips tones and outliers") {
  Spectrum sp;
  sp.bin_width = 1.0;
  for (int k = 0; k < 101; ++k) {
    sp.freq_hz.push_back(k);
    sp.asd.push_back(2.0);
  }
  sp.asd[50] = 1e3;
  sp.asd[49] = sp.asd[51] = 50.0;
  CHECK(noise_floor(sp, 1.0, 100.0, {50.0}) == doctest::Approx(2.0));
  sp.asd[80] = 1e4;
  CHECK(noise_floor(sp, 1.0, 100.0, {50.0}) == doctest::Approx(2.0));
}

TEST_CASE("sensitivity figures") {
  SUBCASE("projected sensitivity") {
    const double eta = sensitivity(26e-9, 0.646e-3, 242e-9);
    CHECK(eta == doctest::Approx(9.7e-12).epsilon(0.02));
    CHECK(rel_err(eta, 26e-9 * 242e-9 / 0.646e-3) < 1e-15);
    CHECK(sensitivity(0.0, 0.646e-3, 242e-9) == 0.0);
    CHECK(sensitivity(26e-9, 0.646e-3, 216e-9) == doctest::Approx(8.7e-12).epsilon(0.01));
    CHECK(rel_err(sensitivity(26e-9, 2 * 0.646e-3, 242e-9), eta / 2) < 1e-15);
    CHECK_ERROR_CODE(sensitivity(26e-9, 0.0, 242e-9), ErrorCode::ZeroSignal);
  }
  SUBCASE("thermal limit") {
    const SensitivityConfig cfg;
    const double eta = thermal_limit(cfg, 2994.0);
    const double want = std::pow(10.0, 21.0 / 20.0) * std::sqrt(1.380649e-23 * 293.0 * 50.0) /
                        (std::sqrt(2.0) * 2994.0);
    CHECK(rel_err(eta, want) < 1e-14);
    CHECK(eta == doctest::Approx(1.19e-12).epsilon(0.01));
    CHECK(rel_err(thermal_limit(cfg, 2 * 2994.0), eta / 2) < 1e-15);
    SensitivityConfig cold = cfg;
    cold.temperature = 0.0;
    CHECK(thermal_limit(cold, 2994.0) == 0.0);
    CHECK_ERROR_CODE(thermal_limit(cfg, 0.0), ErrorCode::ZeroSlope);
  }
  SUBCASE("phase noise budget") {
    const SensitivityConfig cfg;
    const PhaseNoiseBudget b = phase_noise_budget(26e-9, 13e-9, -129.5, cfg);
    CHECK(rel_err(b.e_p, std::sqrt(507.0) * 1e-9) < 1e-14);
    CHECK(!b.unbounded);
    CHECK(b.phi_required_dbc == doctest::Approx(-129.5 + 20 * std::log10(13 / std::sqrt(507.0)) - 6));
    CHECK(std::abs(b.phi_required_dbc + 140.0) < 0.5);
    const PhaseNoiseBudget flat = phase_noise_budget(13e-9, 13e-9, -129.5, cfg);
    CHECK(flat.e_p == 0.0);
    CHECK(flat.unbounded);
    const PhaseNoiseBudget quiet = phase_noise_budget(13e-9, 0.0, -129.5, cfg);
    CHECK(quiet.phi_required_dbc == -std::numeric_limits<double>::infinity());
    CHECK_ERROR_CODE(phase_noise_budget(10e-9, 13e-9, -129.5, cfg), ErrorCode::NegativeRadicand);
  }
  SUBCASE("noise-normalised slope") {
    CHECK(rel_err(noise_normalized_slope(3000.0, 4e-3, 50.0), noise_normalized_slope(3000.0, 1e-3, 50.0) / 2) < 1e-15);
    CHECK(noise_normalized_slope(0.0, 1e-3, 50.0) == 0.0);
    CHECK_ERROR_CODE(noise_normalized_slope(1.0, 0.0, 50.0), ErrorCode::ZeroPower);
  }
  SUBCASE("gain scales numerator and denominator alike") {
    for (double g_db : {-10.0, 0.0, 13.0, 21.0, 40.0}) {
      const double g = db_to_voltage_gain(g_db);
      CHECK(rel_err(sensitivity(g * 26e-9, g * 0.646e-3, 242e-9), sensitivity(26e-9, 0.646e-3, 242e-9)) < 1e-12);
    }
    SensorModel a = reference_sensor(11.0), b = a;
    b.gain_db = a.gain_db + 17.0;
    const double b0 = gauss_to_tesla(31.0);
    const double ratio = db_to_voltage_gain(17.0);
    CHECK(rel_err(b.voltage(b0).imag(), ratio * a.voltage(b0).imag()) < 1e-12);
  }
}

TEST_CASE("grid optimisation") {
  SUBCASE("separable table") {
    const std::vector<double> bs{1, 2, 3, 4}, ps{5, 2, 9};
    std::vector<std::vector<double>> eta;
    for (double b : bs) {
      eta.emplace_back();
      for (double p : ps) eta.back().push_back(b + p);
    }
    const GridOptimum g = optimize_grid(eta);
    for (std::size_t i = 0; i < bs.size(); ++i) {
      CHECK(g.per_row_min[i] == bs[i] + 2);
      CHECK(g.per_row_argmin[i] == 1);
    }
    CHECK(g.min == 3.0);
    CHECK(g.row == 0);
    CHECK(g.col == 1);
  }
  SUBCASE("constant table ties go to the lowest index") {
    const GridOptimum g = optimize_grid(std::vector<std::vector<double>>(3, std::vector<double>(4, 7.0)));
    for (double v : g.per_col_min) CHECK(v == 7.0);
    for (auto k : g.per_col_argmin) CHECK(k == 0);
    CHECK(g.row == 0);
    CHECK(g.col == 0);
  }
  SUBCASE("brute force on random tables") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> v(0, 20);
    for (int t = 0; t < 50; ++t) {
      const std::size_t r = 1 + t % 7, c = 1 + t % 5;
      std::vector<std::vector<double>> eta(r, std::vector<double>(c));
      for (auto& row : eta)
        for (auto& x : row) x = v(rng);
      const GridOptimum g = optimize_grid(eta);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
          CHECK(g.per_row_min[i] <= eta[i][j]);
          CHECK(g.per_col_min[j] <= eta[i][j]);
          CHECK(g.min <= eta[i][j]);
        }
      for (std::size_t i = 0; i < r; ++i) CHECK(eta[i][g.per_row_argmin[i]] == g.per_row_min[i]);
      for (std::size_t j = 0; j < c; ++j) CHECK(eta[g.per_col_argmin[j]][j] == g.per_col_min[j]);
      CHECK(eta[g.row][g.col] == g.min);
    }
  }
  SUBCASE("errors") {
    CHECK_ERROR_CODE(optimize_grid({}), ErrorCode::EmptyTable);
    CHECK_ERROR_CODE(optimize_grid({{1.0, 2.0}, {3.0}}), ErrorCode::InvalidArgument);
  }
}

TEST_CASE("sensor model") {
  SensorModel m = reference_sensor(11.0);
  SUBCASE("exact and linearised field maps agree for axial fields") {
    SensorModel lin = m;
    lin.linearized = true;
    for (double g : {0.0, 10.0, 31.0, 100.0})
      CHECK(rel_err(lin.spin_frequency(gauss_to_tesla(g)), m.spin_frequency(gauss_to_tesla(g))) < 1e-12);
    CHECK(rad_to_hz(m.spin_frequency(gauss_to_tesla(31.0))) == doctest::Approx(11.403e9).epsilon(1e-3));
  }
  SUBCASE("voltage follows the reflection model") {
    const double b = gauss_to_tesla(31.0);
    EnsembleParams e = m.ensemble;
    e.omega_s = m.spin_frequency(b);
    const cplx g = reflection(m.cavity, e, {m.omega_d, m.power});
    const cplx want = std::sqrt(m.power * 50.0) * db_to_voltage_gain(21.0) * g;
    CHECK(std::abs(m.voltage(b) - want) < 1e-12 * std::abs(want));
  }
  SUBCASE("sweep derivative matches the finite difference") {
    const auto b = field_axis(31.0, 20.0, 401);
    const SweepTrace t = simulate_field_sweep(m, b);
    const SlopeResult s = dispersive_slope(t);
    const double d = m.dispersive_derivative(b[s.argmax], 1e-9);
    CHECK(rel_err(s.m_max, std::abs(d)) < 1e-3);
    CHECK(s.m_max > 100.0);
  }
}

TEST_CASE("noise-normalised slope peaks at an interior power") {
  std::vector<double> powers, best;
  for (double p = -4.0; p <= 20.0 + 1e-9; p += 2.0) {
    const SensorModel m = reference_sensor(p);
    const SlopeResult s = dispersive_slope(simulate_field_sweep(m, field_axis(31.0, 30.0, 301)));
    powers.push_back(p);
    best.push_back(noise_normalized_slope(s.m_max, m.power, m.resistance));
  }
  const auto k = static_cast<std::size_t>(std::max_element(best.begin(), best.end()) - best.begin());
  CAPTURE(powers[k]);
  CHECK(k > 0);
  CHECK(k + 1 < best.size());
}

TEST_CASE("simulated magnetometer time series") {
  SensorModel m = reference_sensor(11.0);
  const auto b = field_axis(31.0, 20.0, 401);
  const SlopeResult s = dispersive_slope(simulate_field_sweep(m, b));
  const double bias = b[s.argmax];
  const double slope = std::abs(m.dispersive_derivative(bias, 1e-9));
  const TestFieldSpec test{242e-9, hz_to_rad(10.0)};
  TimeseriesSpec spec;
  SpectrumOptions opt;
  opt.segment_length = 4000;

  SUBCASE("no field and no noise is constant") {
    const SweepTrace t = simulate_timeseries(m, bias, {0.0, hz_to_rad(10.0)}, {2000.0, 1.0, 0.0}, 1);
    for (std::size_t k = 1; k < t.axis.size(); ++k) {
      CHECK(t.dispersive[k] == t.dispersive[0]);
      CHECK(t.absorptive[k] == t.absorptive[0]);
    }
  }
  SUBCASE("tone amplitude matches the local slope and scales linearly") {
    spec.noise_floor = 0.0;
    const SweepTrace t1 = simulate_timeseries(m, bias, test, spec, 1);
    const double a1 = tone_rms(amplitude_spectrum(t1.dispersive, spec.fs, opt), 10.0, 0.0);
    CHECK(rel_err(a1, slope * test.amplitude_rms) < 0.02);
    const SweepTrace t2 = simulate_timeseries(m, bias, {2 * test.amplitude_rms, test.frequency}, spec, 1);
    const double a2 = tone_rms(amplitude_spectrum(t2.dispersive, spec.fs, opt), 10.0, 0.0);
    CHECK(rel_err(a2, 2 * a1) < 0.01);
  }
  SUBCASE("sensitivity from simulated spectra over ten seeds") {
    spec.noise_floor = 26e-9;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const SweepTrace t = simulate_timeseries(m, bias, test, spec, seed);
      const Spectrum sp = amplitude_spectrum(t.dispersive, spec.fs, opt);
      const double floor = noise_floor(sp, 50.0, 900.0, {10.0});
      const double tone = tone_rms(sp, 10.0, floor);
      const double eta = sensitivity(floor, tone, test.amplitude_rms);
      CAPTURE(seed);
      CHECK(rel_err(floor, 26e-9) < 0.05);
      CHECK(rel_err(eta, 26e-9 / slope) < 0.05);
    }
  }
  SUBCASE("seeded reproducibility") {
    spec.noise_floor = 26e-9;
    spec.duration = 1.0;
    const SweepTrace a = simulate_timeseries(m, bias, test, spec, 5);
    const SweepTrace c = simulate_timeseries(m, bias, test, spec, 5);
    const SweepTrace d = simulate_timeseries(m, bias, test, spec, 6);
    CHECK(a.dispersive == c.dispersive);
    CHECK(a.absorptive == c.absorptive);
    CHECK(a.dispersive != d.dispersive);
  }
  SUBCASE("undersampled test tone") {
    CHECK_ERROR_CODE(simulate_timeseries(m, bias, test, {15.0, 1.0, 0.0}, 1), ErrorCode::UndersampledTestTone);
  }
}
