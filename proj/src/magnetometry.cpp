#include "spinsense/magnetometry.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "spinsense/constants.hpp"
#include "spinsense/error.hpp"
#include "spinsense/iq_noise.hpp"
#include "spinsense/random.hpp"

namespace spinsense {

namespace {

bool strictly_monotone(const std::vector<double>& x) {
  bool inc = true, dec = true;
  for (std::size_t k = 1; k < x.size(); ++k) {
    inc = inc && x[k] > x[k - 1];
    dec = dec && x[k] < x[k - 1];
  }
  return inc || dec;
}

// Slope at u = 0 of the least-squares quadratic through (u, y).
double quadratic_slope(const double* u, const double* y, std::size_t n) {
  double s[5] = {0, 0, 0, 0, 0}, t[3] = {0, 0, 0};
  for (std::size_t k = 0; k < n; ++k) {
    double p = 1.0;
    for (int e = 0; e < 5; ++e) {
      s[e] += p;
      if (e < 3) t[e] += p * y[k];
      p *= u[k];
    }
  }
  // Normal equations [s0 s1 s2; s1 s2 s3; s2 s3 s4] c = t, solved for c1.
  const double a[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
  auto det3 = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  double b[3][3];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) b[r][c] = c == 1 ? t[r] : a[r][c];
  return det3(b) / det3(a);
}

struct FftwPlan {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit FftwPlan(std::size_t n) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~FftwPlan() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
};

}  // namespace

void SweepTrace::validate() const {
  if (axis.size() != absorptive.size() || axis.size() != dispersive.size())
    fail(ErrorCode::InvalidArgument, "sweep trace columns differ in length");
  if (!strictly_monotone(axis)) fail(ErrorCode::InvalidArgument, "sweep axis must be strictly monotone");
}

void SensitivityConfig::validate() const {
  if (!(resistance > 0.0)) fail(ErrorCode::InvalidArgument, "resistance must be positive");
  if (!(processing_factor > 0.0)) fail(ErrorCode::InvalidArgument, "processing factor must be positive");
  if (!(temperature >= 0.0)) fail(ErrorCode::NonPositiveTemperature, "temperature must be >= 0");
}

void TestFieldSpec::validate() const {
  if (!(amplitude_rms >= 0.0) || !(frequency >= 0.0))
    fail(ErrorCode::InvalidArgument, "test field amplitude and frequency must be >= 0");
}

SlopeResult dispersive_slope(const SweepTrace& trace, std::size_t window) {
  if (window < 3 || window % 2 == 0)
    fail(ErrorCode::InvalidArgument, "slope window must be odd and >= 3");
  const std::size_t n = trace.axis.size();
  if (n < std::max<std::size_t>(5, window))
    fail(ErrorCode::TooFewPoints, "dispersive_slope needs at least 5 points");
  trace.validate();

  SlopeResult res;
  res.slope.resize(n);
  std::vector<double> u(window), y(window);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start = std::min(i >= window / 2 ? i - window / 2 : 0, n - window);
    const double h = std::abs(trace.axis[start + window - 1] - trace.axis[start]);
    for (std::size_t k = 0; k < window; ++k) {
      u[k] = (trace.axis[start + k] - trace.axis[i]) / h;
      y[k] = trace.dispersive[start + k] - trace.dispersive[start];
    }
    res.slope[i] = quadratic_slope(u.data(), y.data(), window) / h;
    if (std::abs(res.slope[i]) > res.m_max) {
      res.m_max = std::abs(res.slope[i]);
      res.argmax = i;
    }
  }
  return res;
}

Spectrum amplitude_spectrum(const std::vector<double>& samples, double fs,
                            const SpectrumOptions& options) {
  const std::size_t n = samples.size();
  if (n < 16) fail(ErrorCode::TooFewSamples, "amplitude_spectrum needs at least 16 samples");
  if (!(fs > 0.0)) fail(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (!(options.overlap >= 0.0 && options.overlap < 1.0))
    fail(ErrorCode::InvalidArgument, "segment overlap must be in [0, 1)");
  const std::size_t len = options.segment_length == 0 ? n : std::min(options.segment_length, n);
  if (len < 16) fail(ErrorCode::TooFewSamples, "segments need at least 16 samples");
  const std::size_t step =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(len * (1.0 - options.overlap))));

  std::vector<double> w(len);
  double w2 = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    w[j] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(len)));
    w2 += w[j] * w[j];
  }

  const std::size_t bins = len / 2 + 1;
  std::vector<double> psd(bins, 0.0);
  FftwPlan fft(len);
  std::size_t segments = 0;
  for (std::size_t start = 0; start + len <= n; start += step) {
    for (std::size_t j = 0; j < len; ++j) fft.in[j] = samples[start + j] * w[j];
    fftw_execute(fft.plan);
    for (std::size_t k = 0; k < bins; ++k)
      psd[k] += fft.out[k][0] * fft.out[k][0] + fft.out[k][1] * fft.out[k][1];
    ++segments;
  }

  Spectrum s;
  s.bin_width = fs / static_cast<double>(len);
  s.freq_hz.resize(bins);
  s.asd.resize(bins);
  const double scale = 2.0 / (fs * w2 * static_cast<double>(segments));
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || (len % 2 == 0 && k == bins - 1);
    s.freq_hz[k] = s.bin_width * static_cast<double>(k);
    s.asd[k] = std::sqrt(psd[k] * scale * (edge ? 0.5 : 1.0));
  }
  return s;
}

double noise_floor(const Spectrum& spectrum, double f_lo, double f_hi,
                   const std::vector<double>& tone_freqs_hz, double trim) {
  if (!(trim >= 0.0 && trim < 0.5)) fail(ErrorCode::InvalidArgument, "trim must be in [0, 0.5)");
  std::vector<double> band;
  for (std::size_t k = 0; k < spectrum.freq_hz.size(); ++k) {
    const double f = spectrum.freq_hz[k];
    if (f < f_lo || f > f_hi) continue;
    const bool near_tone = std::any_of(tone_freqs_hz.begin(), tone_freqs_hz.end(), [&](double ft) {
      return std::abs(f - ft) <= 2.0 * spectrum.bin_width * (1.0 + 1e-9);
    });
    if (!near_tone) band.push_back(spectrum.asd[k] * spectrum.asd[k]);
  }
  if (band.empty()) fail(ErrorCode::EmptyRange, "no spectrum bins inside the noise band");
  std::sort(band.begin(), band.end());
  const std::size_t drop = static_cast<std::size_t>(trim * static_cast<double>(band.size()));
  double sum = 0.0;
  for (std::size_t k = drop; k < band.size() - drop; ++k) sum += band[k];
  return std::sqrt(sum / static_cast<double>(band.size() - 2 * drop));
}

double tone_rms(const Spectrum& spectrum, double f_tone_hz, double floor_asd, std::size_t half_width) {
  if (spectrum.freq_hz.empty()) fail(ErrorCode::EmptyRange, "empty spectrum");
  const auto k0 = static_cast<std::ptrdiff_t>(std::llround(f_tone_hz / spectrum.bin_width));
  const auto last = static_cast<std::ptrdiff_t>(spectrum.freq_hz.size()) - 1;
  if (k0 < 0 || k0 > last) fail(ErrorCode::IndexOutOfRange, "tone frequency outside the spectrum");
  const auto hw = static_cast<std::ptrdiff_t>(half_width);
  double power = 0.0;
  std::size_t count = 0;
  for (auto k = std::max<std::ptrdiff_t>(0, k0 - hw); k <= std::min(last, k0 + hw); ++k) {
    const double a = spectrum.asd[static_cast<std::size_t>(k)];
    power += a * a * spectrum.bin_width;
    ++count;
  }
  power -= floor_asd * floor_asd * spectrum.bin_width * static_cast<double>(count);
  return std::sqrt(std::max(0.0, power));
}

double sensitivity(double e_n, double v_m, double b_test) {
  if (!(v_m > 0.0) || !(b_test > 0.0))
    fail(ErrorCode::ZeroSignal, "signal voltage and test field must be positive");
  return e_n / (v_m / b_test);
}

double thermal_limit(const SensitivityConfig& cfg, double m_max) {
  cfg.validate();
  if (!(m_max > 0.0)) fail(ErrorCode::ZeroSlope, "slope must be positive");
  const double g = db_to_voltage_gain(cfg.gain_db);
  return g * std::sqrt(PhysicalConstants::k_B * cfg.temperature * cfg.resistance) /
         (cfg.processing_factor * m_max);
}

PhaseNoiseBudget phase_noise_budget(double e_total, double e_th, double phi_measured_dbc,
                                    const SensitivityConfig& cfg) {
  if (!(e_th >= 0.0) || !(e_total >= e_th))
    fail(ErrorCode::NegativeRadicand, "need e_total >= e_th >= 0");
  PhaseNoiseBudget out;
  out.e_p = std::sqrt((e_total - e_th) * (e_total + e_th));
  if (out.e_p == 0.0) {
    out.unbounded = true;
    out.phi_required_dbc = std::numeric_limits<double>::infinity();
    return out;
  }
  out.phi_required_dbc = phi_measured_dbc + 20.0 * std::log10(e_th / out.e_p) + cfg.margin_db;
  return out;
}

double noise_normalized_slope(double m, double power, double resistance) {
  if (!(power > 0.0) || !(resistance > 0.0))
    fail(ErrorCode::ZeroPower, "power and resistance must be positive");
  return m / std::sqrt(power * resistance);
}

GridOptimum optimize_grid(const std::vector<std::vector<double>>& eta) {
  if (eta.empty() || eta.front().empty()) fail(ErrorCode::EmptyTable, "optimize_grid: empty table");
  const std::size_t rows = eta.size(), cols = eta.front().size();
  for (const auto& r : eta)
    if (r.size() != cols) fail(ErrorCode::InvalidArgument, "optimize_grid: ragged table");
  GridOptimum g;
  g.per_row_min.assign(rows, std::numeric_limits<double>::infinity());
  g.per_row_argmin.assign(rows, 0);
  g.per_col_min.assign(cols, std::numeric_limits<double>::infinity());
  g.per_col_argmin.assign(cols, 0);
  g.min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = eta[i][j];
      if (v < g.per_row_min[i]) {
        g.per_row_min[i] = v;
        g.per_row_argmin[i] = j;
      }
      if (v < g.per_col_min[j]) {
        g.per_col_min[j] = v;
        g.per_col_argmin[j] = i;
      }
      if (v < g.min) {
        g.min = v;
        g.row = i;
        g.col = j;
      }
    }
  }
  return g;
}

double SensorModel::spin_frequency(double b) const {
  if (linearized) {
    const double gamma_par = spin.g_par * PhysicalConstants::mu_B / PhysicalConstants::hbar;
    return 2.0 * std::abs(spin.d) + std::copysign(1.0, spin.d) * gamma_par * b * std::cos(theta);
  }
  FieldVector f{std::abs(b), theta, phi};
  if (b < 0.0) f = {-b, std::numbers::pi - theta, phi + std::numbers::pi};
  return cavity_band_transition(spin, f);
}

cplx SensorModel::voltage(double b) const {
  EnsembleParams ens = ensemble;
  ens.omega_s = spin_frequency(b);
  const cplx g = reflection_with_nonidealities(cavity, ens, {omega_d, power}, nonideal);
  return std::sqrt(power * resistance) * db_to_voltage_gain(gain_db) * demodulate(g, demod_phase, 0.0);
}

double SensorModel::dispersive_derivative(double b, double h) const {
  return (voltage(b + h).imag() - voltage(b - h).imag()) / (2.0 * h);
}

SweepTrace simulate_field_sweep(const SensorModel& model, const std::vector<double>& b_values) {
  SweepTrace t;
  t.axis = b_values;
  for (double b : b_values) {
    const cplx v = model.voltage(b);
    t.absorptive.push_back(v.real());
    t.dispersive.push_back(v.imag());
  }
  t.validate();
  return t;
}

SweepTrace simulate_timeseries(const SensorModel& model, double bias, const TestFieldSpec& test,
                               const TimeseriesSpec& spec, std::uint64_t seed) {
  test.validate();
  if (!(spec.fs > 0.0) || !(spec.duration > 0.0))
    fail(ErrorCode::InvalidArgument, "sample rate and duration must be positive");
  if (!(spec.fs > 2.0 * rad_to_hz(test.frequency)))
    fail(ErrorCode::UndersampledTestTone, "sample rate must exceed twice the test-tone frequency");
  if (!(spec.noise_floor >= 0.0)) fail(ErrorCode::InvalidArgument, "noise floor must be >= 0");

  const auto n = static_cast<std::size_t>(std::llround(spec.fs * spec.duration));
  const double sigma = spec.noise_floor * std::sqrt(spec.fs / 2.0);
  auto rng_abs = random_stream(seed, "timeseries-absorptive");
  auto rng_disp = random_stream(seed, "timeseries-dispersive");
  std::normal_distribution<double> noise(0.0, 1.0);

  SweepTrace t;
  t.axis.resize(n);
  t.absorptive.resize(n);
  t.dispersive.resize(n);
  const double peak = std::sqrt(2.0) * test.amplitude_rms;
  for (std::size_t k = 0; k < n; ++k) {
    const double time = static_cast<double>(k) / spec.fs;
    const cplx v = model.voltage(bias + peak * std::sin(test.frequency * time));
    t.axis[k] = time;
    t.absorptive[k] = v.real() + (sigma > 0.0 ? sigma * noise(rng_abs) : 0.0);
    t.dispersive[k] = v.imag() + (sigma > 0.0 ? sigma * noise(rng_disp) : 0.0);
  }
  return t;
}

}  // namespace spinsense
