#pragma once

// Avoided-crossing reflection maps: forward simulation on an
// (omega_s, omega_d) grid and bounded L1 fitting of the non-ideal model.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "spinsense/cavity_model.hpp"
#include "spinsense/kernels/reflection_kernel.hpp"

namespace spinsense {

struct GridSpec {
  std::vector<double> omega_s_values;  // rad/s, strictly increasing
  std::vector<double> omega_d_values;  // rad/s, strictly increasing
  double drive_power = 0.0;            // W

  void validate() const;
  double mean_drive() const;

  /// n_s x n_d grid centred on `center` with full spans in rad/s.
  static GridSpec centered(double center, double omega_s_span, std::size_t n_s,
                           double omega_d_span, std::size_t n_d, double drive_power);
};

/// Complex samples indexed [omega_s][omega_d], row-major.
struct ComplexGrid2D {
  GridSpec spec;
  std::vector<cplx> values;

  std::size_t rows() const { return spec.omega_s_values.size(); }
  std::size_t cols() const { return spec.omega_d_values.size(); }
  cplx& at(std::size_t i, std::size_t j) { return values[i * cols() + j]; }
  const cplx& at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }
  void validate() const;
};

/// Everything the forward model needs apart from the grid. The omega_s field
/// of `ensemble` is ignored (it is the grid's row axis) and
/// `nonideal.omega_d_mean` is always taken from the grid.
struct CrossingModel {
  CavityParams cavity;
  EnsembleParams ensemble;
  NonIdealityParams nonideal;
};

ComplexGrid2D evaluate_crossing(const CrossingModel& model, const GridSpec& spec,
                                const kernels::KernelTable& kernels = kernels::active_kernels());

double crossing_objective(const CrossingModel& model, const ComplexGrid2D& data,
                          const kernels::KernelTable& kernels = kernels::active_kernels());

/// Forward model plus independent Gaussian noise of standard deviation
/// `noise_sigma` on each of the real and imaginary parts.
ComplexGrid2D simulate_crossing(const CrossingModel& truth, const GridSpec& spec,
                                double noise_sigma, std::uint64_t seed);

enum class Normalization { BorderMedian, MaxAbs };

/// Divide by the median |value| of the outermost rows and columns (or by the
/// maximum |value|). Phase is preserved.
ComplexGrid2D normalize_grid(const ComplexGrid2D& grid,
                             Normalization mode = Normalization::BorderMedian);

/// Free parameters of the fit, in order.
enum class FitParam : std::size_t {
  KappaC0,
  KappaC1,
  KappaS,
  KappaTh,
  GEff,
  OffsetRe,
  OffsetIm,
  Amplitude,
  Slope,
  Phase,
  Delay,
  SpinOffset,
  DriveOffset,
};
inline constexpr std::size_t kFitParamCount = 13;

struct FitBounds {
  std::array<double, kFitParamCount> lower{};
  std::array<double, kFitParamCount> upper{};
};

/// Rates within a factor of 10 of the guess; auxiliary parameters within
/// windows scaled to the grid spans.
FitBounds default_bounds(const CrossingModel& guess, const GridSpec& spec);

std::array<double, kFitParamCount> pack_parameters(const CrossingModel& model);
CrossingModel unpack_parameters(const std::array<double, kFitParamCount>& p,
                                const CrossingModel& fixed);

struct FitOptions {
  double tolerance = 1e-10;
  std::size_t max_evaluations = 50000;
  std::size_t starts = 1;       // >1 adds seeded jittered starts
  std::uint64_t seed = 0;
  double jitter = 0.3;          // internal-coordinate std-dev for extra starts
  double initial_step = 0.1;
};

struct FitResult {
  CavityParams cavity;
  EnsembleParams ensemble;
  NonIdealityParams nonideal;
  double objective_value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::vector<double> objective_history;

  CrossingModel model() const { return {cavity, ensemble, nonideal}; }
};

/// Bounded Nelder-Mead on the L1 residual. Rates are searched in log space;
/// every parameter passes through a logistic map onto its bounds. The spin
/// count of `guess` is held fixed so only g_eff is identified; omega_c is
/// held fixed as well.
FitResult fit_crossing(const ComplexGrid2D& data, const CrossingModel& guess,
                       const std::optional<FitBounds>& bounds = std::nullopt,
                       const FitOptions& options = {});

struct RelaxationTimes {
  double t1;  // s
  double t2;  // s
};

RelaxationTimes relaxation_times(const EnsembleParams& ensemble);

/// Drive frequency of minimum |value| for each omega_s row, refined by a
/// parabola through the three samples around the discrete minimum.
std::vector<double> dip_frequencies(const ComplexGrid2D& grid);

}  // namespace spinsense
