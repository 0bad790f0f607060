#include "spinsense/crossing_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "spinsense/constants.hpp"
#include "spinsense/error.hpp"
#include "spinsense/nelder_mead.hpp"
#include "spinsense/random.hpp"

namespace spinsense {

namespace {

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.size() < 2)
    fail(ErrorCode::InvalidArgument, std::string(name) + " axis needs at least 2 points");
  for (std::size_t k = 1; k < axis.size(); ++k)
    if (!(axis[k] > axis[k - 1]))
      fail(ErrorCode::InvalidArgument, std::string(name) + " axis must be strictly increasing");
}

struct PreparedModel {
  kernels::ReflectionConstants constants;
  kernels::ReflectionColumns columns;
  double spin_offset = 0.0;
};

PreparedModel prepare(const CrossingModel& model, const GridSpec& spec) {
  const auto& cav = model.cavity;
  const auto& ens = model.ensemble;
  const auto& ni = model.nonideal;
  cav.validate();
  ens.validate();
  if (!(ens.kappa_s > 0.0)) fail(ErrorCode::ZeroSpinLinewidth, "kappa_s must be positive");
  if (spec.drive_power > 0.0 && !(ens.kappa_th > 0.0))
    fail(ErrorCode::ZeroKappaTh, "kappa_th must be positive when the cavity is driven");

  PreparedModel p;
  const double kc = cav.kappa_c();
  const double g2 = ens.g_s * ens.g_s;
  p.constants.omega_c = cav.omega_c;
  p.constants.half_kappa_c = 0.5 * kc;
  p.constants.kappa_c1 = cav.kappa_c1;
  p.constants.half_kappa_s = 0.5 * ens.kappa_s;
  p.constants.coupling_sq = g2 * ens.n_spins;
  p.constants.offset_re = ni.o_r;
  p.constants.offset_im = ni.o_i;
  p.spin_offset = ni.omega_s_off;

  const double mean_d = spec.mean_drive();
  const std::size_t n = spec.omega_d_values.size();
  auto& c = p.columns;
  c.drive.resize(n);
  c.saturation.resize(n);
  c.scale_re.resize(n);
  c.scale_im.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double wd = spec.omega_d_values[j] - ni.omega_d_off;
    if (!(wd > 0.0)) fail(ErrorCode::InvalidArgument, "shifted drive frequency must be positive");
    const double n_cav = spec.drive_power / (PhysicalConstants::hbar * wd * kc);
    c.drive[j] = wd;
    c.saturation[j] = n_cav > 0.0 ? g2 * n_cav * ens.kappa_s / (2.0 * ens.kappa_th) : 0.0;
    const double span = spec.omega_d_values[j] - mean_d;
    const cplx scale = std::polar(1.0, ni.psi + span * ni.tau) * (1.0 + ni.a + ni.b * span);
    c.scale_re[j] = scale.real();
    c.scale_im[j] = scale.imag();
  }
  return p;
}

struct SplitData {
  std::vector<double> re, im;
};

SplitData split(const ComplexGrid2D& data) {
  SplitData s;
  s.re.reserve(data.values.size());
  s.im.reserve(data.values.size());
  for (const auto& z : data.values) {
    s.re.push_back(z.real());
    s.im.push_back(z.imag());
  }
  return s;
}

double objective_split(const CrossingModel& model, const GridSpec& spec, const SplitData& data,
                       const kernels::KernelTable& kernels) {
  const PreparedModel p = prepare(model, spec);
  const std::size_t nd = spec.omega_d_values.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < spec.omega_s_values.size(); ++i) {
    sum += kernels.l1_row(p.constants, p.columns, spec.omega_s_values[i] - p.spin_offset,
                          data.re.data() + i * nd, data.im.data() + i * nd);
  }
  return sum;
}

constexpr std::size_t kLogParams = 5;  // KappaC0..GEff

bool is_log(std::size_t k) { return k < kLogParams; }

double to_internal(double v, double lo, double hi, bool log_space) {
  const double t = log_space ? (std::log(v) - std::log(lo)) / (std::log(hi) - std::log(lo))
                             : (v - lo) / (hi - lo);
  return std::log(t / (1.0 - t));
}

double from_internal(double u, double lo, double hi, bool log_space) {
  const double t = 1.0 / (1.0 + std::exp(-u));
  return log_space ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                   : lo + t * (hi - lo);
}

}  // namespace

void GridSpec::validate() const {
  check_axis(omega_s_values, "omega_s");
  check_axis(omega_d_values, "omega_d");
  if (!(drive_power >= 0.0)) fail(ErrorCode::InvalidArgument, "drive power must be >= 0");
}

double GridSpec::mean_drive() const {
  return std::accumulate(omega_d_values.begin(), omega_d_values.end(), 0.0) /
         static_cast<double>(omega_d_values.size());
}

GridSpec GridSpec::centered(double center, double omega_s_span, std::size_t n_s,
                            double omega_d_span, std::size_t n_d, double drive_power) {
  auto axis = [center](double span, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k)
      v[k] = center - 0.5 * span + span * static_cast<double>(k) / static_cast<double>(n - 1);
    return v;
  };
  if (n_s < 2 || n_d < 2) fail(ErrorCode::InvalidArgument, "grid needs at least 2x2 points");
  GridSpec g{axis(omega_s_span, n_s), axis(omega_d_span, n_d), drive_power};
  g.validate();
  return g;
}

void ComplexGrid2D::validate() const {
  spec.validate();
  if (values.size() != rows() * cols())
    fail(ErrorCode::InvalidArgument, "grid values do not match the grid dimensions");
}

ComplexGrid2D evaluate_crossing(const CrossingModel& model, const GridSpec& spec,
                                const kernels::KernelTable& kernels) {
  spec.validate();
  const PreparedModel p = prepare(model, spec);
  ComplexGrid2D out{spec, std::vector<cplx>(spec.omega_s_values.size() * spec.omega_d_values.size())};
  const std::size_t nd = spec.omega_d_values.size();
  std::vector<double> re(nd), im(nd);
  for (std::size_t i = 0; i < spec.omega_s_values.size(); ++i) {
    kernels.evaluate_row(p.constants, p.columns, spec.omega_s_values[i] - p.spin_offset, re.data(),
                         im.data());
    for (std::size_t j = 0; j < nd; ++j) out.at(i, j) = cplx(re[j], im[j]);
  }
  return out;
}

double crossing_objective(const CrossingModel& model, const ComplexGrid2D& data,
                          const kernels::KernelTable& kernels) {
  data.validate();
  return objective_split(model, data.spec, split(data), kernels);
}

ComplexGrid2D simulate_crossing(const CrossingModel& truth, const GridSpec& spec,
                                double noise_sigma, std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "noise_sigma must be >= 0");
  ComplexGrid2D grid = evaluate_crossing(truth, spec, *kernels::kernels_for(kernels::Backend::Scalar));
  if (noise_sigma > 0.0) {
    auto rng = random_stream(seed, "crossing-noise");
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (auto& z : grid.values) {
      const double re = noise(rng);
      const double im = noise(rng);
      z += cplx(re, im);
    }
  }
  return grid;
}

ComplexGrid2D normalize_grid(const ComplexGrid2D& grid, Normalization mode) {
  grid.validate();
  double scale = 0.0;
  if (mode == Normalization::MaxAbs) {
    for (const auto& z : grid.values) scale = std::max(scale, std::abs(z));
  } else {
    std::vector<double> border;
    const std::size_t r = grid.rows(), c = grid.cols();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        if (i == 0 || j == 0 || i + 1 == r || j + 1 == c) border.push_back(std::abs(grid.at(i, j)));
    std::sort(border.begin(), border.end());
    const std::size_t m = border.size();
    scale = m % 2 == 1 ? border[m / 2] : 0.5 * (border[m / 2 - 1] + border[m / 2]);
  }
  if (!(scale > 0.0)) fail(ErrorCode::AllZeroBorder, "normalize_grid: normalisation scale is zero");
  ComplexGrid2D out = grid;
  for (auto& z : out.values) z /= scale;
  return out;
}

std::array<double, kFitParamCount> pack_parameters(const CrossingModel& m) {
  return {m.cavity.kappa_c0,   m.cavity.kappa_c1,   m.ensemble.kappa_s,
          m.ensemble.kappa_th, m.ensemble.g_eff(),  m.nonideal.o_r,
          m.nonideal.o_i,      m.nonideal.a,        m.nonideal.b,
          m.nonideal.psi,      m.nonideal.tau,      m.nonideal.omega_s_off,
          m.nonideal.omega_d_off};
}

CrossingModel unpack_parameters(const std::array<double, kFitParamCount>& p,
                                const CrossingModel& fixed) {
  CrossingModel m = fixed;
  m.cavity.kappa_c0 = p[0];
  m.cavity.kappa_c1 = p[1];
  m.ensemble.kappa_s = p[2];
  m.ensemble.kappa_th = p[3];
  m.ensemble.g_s = fixed.ensemble.n_spins > 0.0 ? p[4] / std::sqrt(fixed.ensemble.n_spins) : 0.0;
  m.nonideal.o_r = p[5];
  m.nonideal.o_i = p[6];
  m.nonideal.a = p[7];
  m.nonideal.b = p[8];
  m.nonideal.psi = p[9];
  m.nonideal.tau = p[10];
  m.nonideal.omega_s_off = p[11];
  m.nonideal.omega_d_off = p[12];
  return m;
}

FitBounds default_bounds(const CrossingModel& guess, const GridSpec& spec) {
  spec.validate();
  const auto g = pack_parameters(guess);
  const double s_span = spec.omega_s_values.back() - spec.omega_s_values.front();
  const double d_half = 0.5 * (spec.omega_d_values.back() - spec.omega_d_values.front());
  const double pi = std::numbers::pi;
  FitBounds b;
  for (std::size_t k = 0; k < kLogParams; ++k) {
    b.lower[k] = g[k] / 10.0;
    b.upper[k] = g[k] * 10.0;
  }
  const std::array<double, kFitParamCount> half_width{
      0, 0, 0, 0, 0, 0.5, 0.5, 0.5, 0.5 / d_half, pi, pi / d_half, 0.25 * s_span, 0.5 * d_half};
  for (std::size_t k = kLogParams; k < kFitParamCount; ++k) {
    b.lower[k] = g[k] - half_width[k];
    b.upper[k] = g[k] + half_width[k];
  }
  return b;
}

FitResult fit_crossing(const ComplexGrid2D& data, const CrossingModel& guess,
                       const std::optional<FitBounds>& bounds_in, const FitOptions& options) {
  data.validate();
  if (!(guess.ensemble.n_spins > 0.0))
    fail(ErrorCode::InvalidArgument, "fit_crossing: the fixed spin count must be positive");

  const FitBounds bounds = bounds_in ? *bounds_in : default_bounds(guess, data.spec);
  const auto g = pack_parameters(guess);
  for (std::size_t k = 0; k < kFitParamCount; ++k) {
    const bool ok = std::isfinite(bounds.lower[k]) && std::isfinite(bounds.upper[k]) &&
                    bounds.lower[k] < bounds.upper[k] && (!is_log(k) || bounds.lower[k] > 0.0);
    if (!ok)
      fail(ErrorCode::InvalidBounds, "fit_crossing: invalid bounds for parameter " + std::to_string(k));
    if (!(g[k] > bounds.lower[k] && g[k] < bounds.upper[k]))
      fail(ErrorCode::InvalidBounds,
           "fit_crossing: initial guess outside bounds for parameter " + std::to_string(k));
  }

  CrossingModel fixed = guess;
  fixed.nonideal.omega_d_mean = data.spec.mean_drive();
  const SplitData split_data = split(data);
  const auto& kern = kernels::active_kernels();

  auto decode = [&](const std::vector<double>& u) {
    std::array<double, kFitParamCount> p{};
    for (std::size_t k = 0; k < kFitParamCount; ++k)
      p[k] = from_internal(u[k], bounds.lower[k], bounds.upper[k], is_log(k));
    return unpack_parameters(p, fixed);
  };
  const Objective objective = [&](const std::vector<double>& u) {
    return objective_split(decode(u), data.spec, split_data, kern);
  };

  std::vector<double> u0(kFitParamCount);
  for (std::size_t k = 0; k < kFitParamCount; ++k)
    u0[k] = to_internal(g[k], bounds.lower[k], bounds.upper[k], is_log(k));

  NelderMeadOptions nm;
  nm.f_tolerance = options.tolerance;
  nm.x_tolerance = options.tolerance;
  nm.initial_step = options.initial_step;

  FitResult result;
  std::optional<NelderMeadResult> best;
  std::size_t remaining = options.max_evaluations;
  const std::size_t starts = std::max<std::size_t>(1, options.starts);
  for (std::size_t s = 0; s < starts && remaining > 0; ++s) {
    std::vector<double> x0 = u0;
    if (s > 0) {
      auto rng = random_stream(options.seed, "fit-start-" + std::to_string(s));
      std::normal_distribution<double> jitter(0.0, options.jitter);
      for (auto& v : x0) v += jitter(rng);
    }
    nm.max_evaluations = remaining / (starts - s);
    NelderMeadResult r = nelder_mead(objective, x0, nm);
    remaining -= std::min(remaining, r.evaluations);
    result.iterations += r.iterations;
    result.evaluations += r.evaluations;
    for (double v : r.best_history) {
      const double prev = result.objective_history.empty() ? v : result.objective_history.back();
      result.objective_history.push_back(std::min(prev, v));
    }
    if (!best || r.value < best->value) best = std::move(r);
  }

  const CrossingModel fitted = decode(best->x);
  result.cavity = fitted.cavity;
  result.ensemble = fitted.ensemble;
  result.nonideal = fitted.nonideal;
  result.objective_value = best->value;
  result.converged = best->converged;
  return result;
}

RelaxationTimes relaxation_times(const EnsembleParams& ensemble) {
  if (!(ensemble.kappa_s > 0.0) || !(ensemble.kappa_th > 0.0))
    fail(ErrorCode::ZeroRate, "relaxation_times: kappa_s and kappa_th must be positive");
  return {1.0 / ensemble.kappa_th, 2.0 / ensemble.kappa_s};
}

std::vector<double> dip_frequencies(const ComplexGrid2D& grid) {
  grid.validate();
  const auto& wd = grid.spec.omega_d_values;
  std::vector<double> out;
  out.reserve(grid.rows());
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    std::size_t jmin = 0;
    for (std::size_t j = 1; j < grid.cols(); ++j)
      if (std::norm(grid.at(i, j)) < std::norm(grid.at(i, jmin))) jmin = j;
    double w = wd[jmin];
    if (jmin > 0 && jmin + 1 < grid.cols()) {
      const double y0 = std::norm(grid.at(i, jmin - 1));
      const double y1 = std::norm(grid.at(i, jmin));
      const double y2 = std::norm(grid.at(i, jmin + 1));
      const double h = wd[jmin + 1] - wd[jmin];
      const double curv = y0 - 2.0 * y1 + y2;
      if (curv > 0.0) w += 0.5 * h * (y0 - y2) / curv;
    }
    out.push_back(w);
  }
  return out;
}

}  // namespace spinsense
