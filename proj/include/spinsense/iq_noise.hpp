#pragma once

// IQ demodulation, even/odd decomposition of a sampled reflection
// coefficient, and propagation of source AM/PM noise to the output PSD.

#include <complex>
#include <string>
#include <vector>

#include "spinsense/cavity_model.hpp"

namespace spinsense {

enum class SpectrumUnit { DbcPerHz, V2PerHz };

std::string unit_name(SpectrumUnit unit);
SpectrumUnit parse_unit(const std::string& name);

struct NoiseSpectrum {
  std::vector<double> offsets_hz;  // strictly increasing, > 0
  std::vector<double> density;
  SpectrumUnit unit = SpectrumUnit::DbcPerHz;

  void validate() const;
};

/// Reflection coefficient sampled at baseband offsets (rad/s) around the
/// carrier. The grid must be symmetric about 0 and contain 0.
struct SampledGamma {
  std::vector<double> offsets;
  std::vector<cplx> values;

  void validate() const;
  std::size_t zero_index() const { return offsets.size() / 2; }
};

/// w = exp(-i phi) * gamma * exp(i phi0).
cplx demodulate(cplx reflected, double phi, double phi0);

struct GammaComponents {
  SampledGamma phase_preserving;  // even real part, odd imaginary part
  SampledGamma phase_swapping;    // odd real part, even imaginary part
};

GammaComponents decompose_gamma(const SampledGamma& g);

/// Single-sideband dBc/Hz to the two-sided linear density |Phi|^2 (1/Hz).
double dbc_to_linear(double dbc_per_hz);
double linear_to_dbc(double linear);

/// Interpolate onto new offsets, linear in log-frequency and in dB. Values
/// beyond the ends are held constant.
NoiseSpectrum resample(const NoiseSpectrum& spectrum, const std::vector<double>& offsets_hz);

/// Reflection of the ideal model sampled at omega_d + offsets, with the
/// offsets mirrored to make the grid symmetric.
SampledGamma sample_reflection(const CavityParams& cav, const EnsembleParams& ens,
                               const DriveParams& carrier,
                               const std::vector<double>& positive_offsets_hz);

struct NoisePredictionOptions {
  double p0 = 0.0;          // V^2/Hz flat floor
  double carrier_v2 = 1.0;  // V^2 scale applied to the dimensionless terms
  bool resample = true;     // false: grids must already agree
};

struct NoiseSplit {
  NoiseSpectrum phase_term;      // |Phi Gp(w)|^2 + |Phi Gp(0)|^2
  NoiseSpectrum amplitude_term;  // |A Gs(w)|^2
};

/// Both terms are reported on the offsets of `phase` in V^2/Hz.
NoiseSplit noise_contribution_split(const NoiseSpectrum& amp, const NoiseSpectrum& phase,
                                    const SampledGamma& g,
                                    const NoisePredictionOptions& options = {});

NoiseSpectrum predict_noise_psd(const NoiseSpectrum& amp, const NoiseSpectrum& phase,
                                const SampledGamma& g, const NoisePredictionOptions& options = {});

/// Median of a V^2/Hz spectrum over [f_lo, f_hi].
double estimate_flat_floor(const NoiseSpectrum& spectrum, double f_lo, double f_hi);

}  // namespace spinsense
