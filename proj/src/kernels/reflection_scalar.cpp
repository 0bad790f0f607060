#include <cmath>

#include "spinsense/kernels/reflection_kernel.hpp"

namespace spinsense::kernels::detail {

namespace {

inline void point(const ReflectionConstants& k, const ReflectionColumns& cols, std::size_t j,
                  double omega_s, double& re, double& im) {
  const double wd = cols.drive[j];
  const double delta = wd - omega_s;
  const double q = k.half_kappa_s * k.half_kappa_s + delta * delta + cols.saturation[j];
  const double pi_re = k.coupling_sq * k.half_kappa_s / q;
  const double pi_im = -k.coupling_sq * delta / q;
  const double a = k.half_kappa_c + pi_re;
  const double b = (wd - k.omega_c) + pi_im;
  const double m = a * a + b * b;
  const double g_re = -1.0 + k.kappa_c1 * a / m;
  const double g_im = -k.kappa_c1 * b / m;
  re = k.offset_re + cols.scale_re[j] * g_re - cols.scale_im[j] * g_im;
  im = k.offset_im + cols.scale_re[j] * g_im + cols.scale_im[j] * g_re;
}

}  // namespace

void evaluate_row_scalar(const ReflectionConstants& k, const ReflectionColumns& cols,
                         double omega_s, double* out_re, double* out_im) {
  for (std::size_t j = 0; j < cols.size(); ++j) point(k, cols, j, omega_s, out_re[j], out_im[j]);
}

double l1_row_scalar(const ReflectionConstants& k, const ReflectionColumns& cols, double omega_s,
                     const double* data_re, const double* data_im) {
  double sum = 0.0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    double re, im;
    point(k, cols, j, omega_s, re, im);
    sum += std::abs(re - data_re[j]) + std::abs(im - data_im[j]);
  }
  return sum;
}

}  // namespace spinsense::kernels::detail
