#pragma once

// Inner loops for evaluating the non-ideal reflection model on a rectangular
// (omega_s, omega_d) grid. Every backend implements the same closed form:
//
//   delta = w_d' - w_s'
//   Pi    = G (k_s/2 - i delta) / (k_s^2/4 + delta^2 + sat_j)
//   Gamma = -1 + k_c1 / (k_c/2 + i (w_d' - w_c) + Pi)
//   out   = offset + scale_j * Gamma
//
// where primes denote shifted frequencies, G = g_s^2 N and sat_j is the
// saturation term of column j. The scalar backend is the reference; SIMD
// backends must agree with it to rounding.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace spinsense::kernels {

struct ReflectionConstants {
  double omega_c = 0.0;
  double half_kappa_c = 0.0;
  double kappa_c1 = 0.0;
  double half_kappa_s = 0.0;
  double coupling_sq = 0.0;  // g_s^2 N
  double offset_re = 0.0;
  double offset_im = 0.0;
};

/// Per-drive-column precomputed terms, structure-of-arrays.
struct ReflectionColumns {
  std::vector<double> drive;       // shifted omega_d
  std::vector<double> saturation;  // g_s^2 n_cav kappa_s / (2 kappa_th)
  std::vector<double> scale_re;
  std::vector<double> scale_im;

  std::size_t size() const { return drive.size(); }
};

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  Backend backend;
  std::string_view name;
  void (*evaluate_row)(const ReflectionConstants&, const ReflectionColumns&, double omega_s,
                       double* out_re, double* out_im);
  double (*l1_row)(const ReflectionConstants&, const ReflectionColumns&, double omega_s,
                   const double* data_re, const double* data_im);
};

/// Backend compiled in and supported by the running CPU, or nullptr.
const KernelTable* kernels_for(Backend backend);

/// Best available backend. Setting SPINSENSE_KERNEL=scalar forces the
/// reference path.
const KernelTable& active_kernels();

std::vector<Backend> available_backends();

namespace detail {
void evaluate_row_scalar(const ReflectionConstants&, const ReflectionColumns&, double,
                         double*, double*);
double l1_row_scalar(const ReflectionConstants&, const ReflectionColumns&, double, const double*,
                     const double*);
#if defined(SPINSENSE_HAVE_AVX2_KERNEL)
void evaluate_row_avx2(const ReflectionConstants&, const ReflectionColumns&, double, double*,
                       double*);
double l1_row_avx2(const ReflectionConstants&, const ReflectionColumns&, double, const double*,
                   const double*);
#endif
}  // namespace detail

}  // namespace spinsense::kernels
