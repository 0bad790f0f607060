#include "spinsense/iq_noise.hpp"

#include <algorithm>
#include <cmath>

#include "spinsense/constants.hpp"
#include "spinsense/error.hpp"

namespace spinsense {

namespace {

bool same_grid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (std::abs(a[k] - b[k]) > 1e-9 * std::max(std::abs(a[k]), std::abs(b[k]))) return false;
  return true;
}

// Linear interpolation of x -> y on an increasing grid, clamped at the ends.
template <typename T>
T interp(const std::vector<double>& xs, const std::vector<T>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

std::vector<double> linear_density(const NoiseSpectrum& s) {
  if (s.unit != SpectrumUnit::DbcPerHz)
    fail(ErrorCode::UnitMismatch, "source noise spectra must be given in dBc/Hz");
  std::vector<double> out(s.density.size());
  std::transform(s.density.begin(), s.density.end(), out.begin(), dbc_to_linear);
  return out;
}

struct PositiveHalf {
  std::vector<double> offsets_hz;
  std::vector<cplx> preserving;
  std::vector<cplx> swapping;
  cplx preserving_at_zero;
};

PositiveHalf positive_half(const SampledGamma& g) {
  const GammaComponents c = decompose_gamma(g);
  PositiveHalf h;
  const std::size_t z = g.zero_index();
  h.preserving_at_zero = c.phase_preserving.values[z];
  for (std::size_t k = z + 1; k < g.offsets.size(); ++k) {
    h.offsets_hz.push_back(rad_to_hz(g.offsets[k]));
    h.preserving.push_back(c.phase_preserving.values[k]);
    h.swapping.push_back(c.phase_swapping.values[k]);
  }
  return h;
}

}  // namespace

std::string unit_name(SpectrumUnit unit) {
  return unit == SpectrumUnit::DbcPerHz ? "dBc_per_Hz" : "V2_per_Hz";
}

SpectrumUnit parse_unit(const std::string& name) {
  if (name == "dBc_per_Hz") return SpectrumUnit::DbcPerHz;
  if (name == "V2_per_Hz") return SpectrumUnit::V2PerHz;
  fail(ErrorCode::UnitMismatch, "unknown spectrum unit '" + name + "'");
}

void NoiseSpectrum::validate() const {
  if (offsets_hz.empty()) fail(ErrorCode::InvalidArgument, "noise spectrum is empty");
  if (offsets_hz.size() != density.size())
    fail(ErrorCode::InvalidArgument, "noise spectrum offsets and densities differ in length");
  for (std::size_t k = 0; k < offsets_hz.size(); ++k) {
    if (!(offsets_hz[k] > 0.0) || (k > 0 && !(offsets_hz[k] > offsets_hz[k - 1])))
      fail(ErrorCode::InvalidArgument, "noise spectrum offsets must be positive and increasing");
    if (!std::isfinite(density[k]) || (unit == SpectrumUnit::V2PerHz && density[k] < 0.0))
      fail(ErrorCode::InvalidArgument, "noise spectrum density is not valid");
  }
}

void SampledGamma::validate() const {
  const std::size_t n = offsets.size();
  if (n == 0 || n != values.size() || n % 2 == 0)
    fail(ErrorCode::AsymmetricGrid, "gamma grid must have an odd number of samples");
  const double scale = std::max(std::abs(offsets.front()), std::abs(offsets.back()));
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && !(offsets[k] > offsets[k - 1]))
      fail(ErrorCode::AsymmetricGrid, "gamma offsets must be strictly increasing");
    if (std::abs(offsets[k] + offsets[n - 1 - k]) > 1e-9 * scale)
      fail(ErrorCode::AsymmetricGrid, "gamma offsets are not symmetric about zero");
  }
  if (offsets[n / 2] != 0.0 && std::abs(offsets[n / 2]) > 1e-9 * scale)
    fail(ErrorCode::AsymmetricGrid, "gamma grid does not contain zero offset");
}

cplx demodulate(cplx reflected, double phi, double phi0) {
  return std::polar(1.0, phi0 - phi) * reflected;
}

GammaComponents decompose_gamma(const SampledGamma& g) {
  g.validate();
  const std::size_t n = g.offsets.size();
  GammaComponents out{g, g};
  for (std::size_t k = 0; k < n; ++k) {
    const cplx here = g.values[k];
    const cplx mirror = std::conj(g.values[n - 1 - k]);
    out.phase_preserving.values[k] = 0.5 * (here + mirror);
    out.phase_swapping.values[k] = 0.5 * (here - mirror);
  }
  return out;
}

double dbc_to_linear(double dbc_per_hz) { return 2.0 * std::pow(10.0, dbc_per_hz / 10.0); }

double linear_to_dbc(double linear) { return 10.0 * std::log10(linear / 2.0); }

NoiseSpectrum resample(const NoiseSpectrum& spectrum, const std::vector<double>& offsets_hz) {
  spectrum.validate();
  std::vector<double> logf(spectrum.offsets_hz.size());
  std::transform(spectrum.offsets_hz.begin(), spectrum.offsets_hz.end(), logf.begin(),
                 [](double f) { return std::log10(f); });
  const bool in_db = spectrum.unit == SpectrumUnit::DbcPerHz ||
                     std::all_of(spectrum.density.begin(), spectrum.density.end(),
                                 [](double v) { return v > 0.0; });
  std::vector<double> y = spectrum.density;
  if (spectrum.unit == SpectrumUnit::V2PerHz && in_db)
    for (auto& v : y) v = 10.0 * std::log10(v);

  NoiseSpectrum out{offsets_hz, std::vector<double>(offsets_hz.size()), spectrum.unit};
  for (std::size_t k = 0; k < offsets_hz.size(); ++k) {
    if (!(offsets_hz[k] > 0.0)) fail(ErrorCode::InvalidArgument, "resample offsets must be > 0");
    double v = interp(logf, y, std::log10(offsets_hz[k]));
    if (spectrum.unit == SpectrumUnit::V2PerHz && in_db) v = std::pow(10.0, v / 10.0);
    out.density[k] = v;
  }
  out.validate();
  return out;
}

SampledGamma sample_reflection(const CavityParams& cav, const EnsembleParams& ens,
                               const DriveParams& carrier,
                               const std::vector<double>& positive_offsets_hz) {
  std::vector<double> pos = positive_offsets_hz;
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  if (pos.empty() || !(pos.front() > 0.0))
    fail(ErrorCode::InvalidArgument, "sample_reflection needs positive offsets");
  SampledGamma g;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) g.offsets.push_back(-hz_to_rad(*it));
  g.offsets.push_back(0.0);
  for (double f : pos) g.offsets.push_back(hz_to_rad(f));
  for (double w : g.offsets) {
    DriveParams d = carrier;
    d.omega_d = carrier.omega_d + w;
    g.values.push_back(reflection(cav, ens, d));
  }
  return g;
}

NoiseSplit noise_contribution_split(const NoiseSpectrum& amp, const NoiseSpectrum& phase,
                                    const SampledGamma& g, const NoisePredictionOptions& options) {
  amp.validate();
  phase.validate();
  const PositiveHalf half = positive_half(g);
  if (half.offsets_hz.empty()) fail(ErrorCode::GridMismatch, "gamma grid has no positive offsets");
  const auto& f = phase.offsets_hz;

  std::vector<double> a2, p2 = linear_density(phase);
  if (options.resample) {
    a2 = linear_density(resample(amp, f));
    if (f.front() < half.offsets_hz.front() * (1 - 1e-9) ||
        f.back() > half.offsets_hz.back() * (1 + 1e-9))
      fail(ErrorCode::GridMismatch, "noise offsets extend beyond the sampled gamma grid");
  } else {
    if (!same_grid(amp.offsets_hz, f) || !same_grid(half.offsets_hz, f))
      fail(ErrorCode::GridMismatch, "noise and gamma grids differ and resampling is disabled");
    a2 = linear_density(amp);
  }

  NoiseSplit out{{f, std::vector<double>(f.size()), SpectrumUnit::V2PerHz},
                 {f, std::vector<double>(f.size()), SpectrumUnit::V2PerHz}};
  const double gp0 = std::norm(half.preserving_at_zero);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const cplx gp = options.resample ? interp(half.offsets_hz, half.preserving, f[k]) : half.preserving[k];
    const cplx gs = options.resample ? interp(half.offsets_hz, half.swapping, f[k]) : half.swapping[k];
    out.phase_term.density[k] = options.carrier_v2 * p2[k] * (std::norm(gp) + gp0);
    out.amplitude_term.density[k] = options.carrier_v2 * a2[k] * std::norm(gs);
  }
  return out;
}

NoiseSpectrum predict_noise_psd(const NoiseSpectrum& amp, const NoiseSpectrum& phase,
                                const SampledGamma& g, const NoisePredictionOptions& options) {
  if (!(options.p0 >= 0.0)) fail(ErrorCode::InvalidArgument, "p0 must be >= 0");
  NoiseSplit split = noise_contribution_split(amp, phase, g, options);
  NoiseSpectrum total = split.phase_term;
  for (std::size_t k = 0; k < total.density.size(); ++k)
    total.density[k] += split.amplitude_term.density[k] + options.p0;
  return total;
}

double estimate_flat_floor(const NoiseSpectrum& spectrum, double f_lo, double f_hi) {
  spectrum.validate();
  if (spectrum.unit != SpectrumUnit::V2PerHz)
    fail(ErrorCode::UnitMismatch, "flat-floor estimate needs a V^2/Hz spectrum");
  std::vector<double> band;
  for (std::size_t k = 0; k < spectrum.offsets_hz.size(); ++k)
    if (spectrum.offsets_hz[k] >= f_lo && spectrum.offsets_hz[k] <= f_hi)
      band.push_back(spectrum.density[k]);
  if (band.empty()) fail(ErrorCode::EmptyRange, "no spectrum points inside the flat band");
  std::sort(band.begin(), band.end());
  const std::size_t m = band.size();
  return m % 2 ? band[m / 2] : 0.5 * (band[m / 2 - 1] + band[m / 2]);
}

}  // namespace spinsense
