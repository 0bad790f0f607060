// Compiled with -mavx2 -mfma. Only called after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "spinsense/kernels/reflection_kernel.hpp"

namespace spinsense::kernels::detail {

namespace {

struct Lanes {
  __m256d re, im;
};

inline Lanes point4(const ReflectionConstants& k, const ReflectionColumns& cols, std::size_t j,
                    __m256d omega_s) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d hks = _mm256_set1_pd(k.half_kappa_s);
  const __m256d g2n = _mm256_set1_pd(k.coupling_sq);

  const __m256d wd = _mm256_loadu_pd(cols.drive.data() + j);
  const __m256d sat = _mm256_loadu_pd(cols.saturation.data() + j);
  const __m256d delta = _mm256_sub_pd(wd, omega_s);
  const __m256d q = _mm256_add_pd(_mm256_fmadd_pd(delta, delta, _mm256_mul_pd(hks, hks)), sat);
  const __m256d inv_q = _mm256_div_pd(one, q);
  const __m256d pi_re = _mm256_mul_pd(_mm256_mul_pd(g2n, hks), inv_q);
  const __m256d pi_im = _mm256_mul_pd(_mm256_mul_pd(g2n, delta), inv_q);  // negated below

  const __m256d a = _mm256_add_pd(_mm256_set1_pd(k.half_kappa_c), pi_re);
  const __m256d b = _mm256_sub_pd(_mm256_sub_pd(wd, _mm256_set1_pd(k.omega_c)), pi_im);
  const __m256d m = _mm256_fmadd_pd(a, a, _mm256_mul_pd(b, b));
  const __m256d c1_over_m = _mm256_div_pd(_mm256_set1_pd(k.kappa_c1), m);
  const __m256d g_re = _mm256_fmsub_pd(c1_over_m, a, one);
  const __m256d g_im = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(c1_over_m, b));

  const __m256d s_re = _mm256_loadu_pd(cols.scale_re.data() + j);
  const __m256d s_im = _mm256_loadu_pd(cols.scale_im.data() + j);
  const __m256d re = _mm256_add_pd(_mm256_set1_pd(k.offset_re),
                                   _mm256_fmsub_pd(s_re, g_re, _mm256_mul_pd(s_im, g_im)));
  const __m256d im = _mm256_add_pd(_mm256_set1_pd(k.offset_im),
                                   _mm256_fmadd_pd(s_re, g_im, _mm256_mul_pd(s_im, g_re)));
  return {re, im};
}

inline double tail_point(const ReflectionConstants& k, const ReflectionColumns& cols,
                         std::size_t j, double omega_s, double& im_out) {
  const double wd = cols.drive[j];
  const double delta = wd - omega_s;
  const double q = k.half_kappa_s * k.half_kappa_s + delta * delta + cols.saturation[j];
  const double a = k.half_kappa_c + k.coupling_sq * k.half_kappa_s / q;
  const double b = (wd - k.omega_c) - k.coupling_sq * delta / q;
  const double m = a * a + b * b;
  const double g_re = -1.0 + k.kappa_c1 * a / m;
  const double g_im = -k.kappa_c1 * b / m;
  im_out = k.offset_im + cols.scale_re[j] * g_im + cols.scale_im[j] * g_re;
  return k.offset_re + cols.scale_re[j] * g_re - cols.scale_im[j] * g_im;
}

}  // namespace

void evaluate_row_avx2(const ReflectionConstants& k, const ReflectionColumns& cols,
                       double omega_s, double* out_re, double* out_im) {
  const std::size_t n = cols.size();
  const __m256d ws = _mm256_set1_pd(omega_s);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const Lanes v = point4(k, cols, j, ws);
    _mm256_storeu_pd(out_re + j, v.re);
    _mm256_storeu_pd(out_im + j, v.im);
  }
  for (; j < n; ++j) out_re[j] = tail_point(k, cols, j, omega_s, out_im[j]);
}

double l1_row_avx2(const ReflectionConstants& k, const ReflectionColumns& cols, double omega_s,
                   const double* data_re, const double* data_im) {
  const std::size_t n = cols.size();
  const __m256d ws = _mm256_set1_pd(omega_s);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const Lanes v = point4(k, cols, j, ws);
    const __m256d dr = _mm256_sub_pd(v.re, _mm256_loadu_pd(data_re + j));
    const __m256d di = _mm256_sub_pd(v.im, _mm256_loadu_pd(data_im + j));
    acc = _mm256_add_pd(acc, _mm256_and_pd(dr, abs_mask));
    acc = _mm256_add_pd(acc, _mm256_and_pd(di, abs_mask));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; j < n; ++j) {
    double im;
    const double re = tail_point(k, cols, j, omega_s, im);
    sum += std::abs(re - data_re[j]) + std::abs(im - data_im[j]);
  }
  return sum;
}

}  // namespace spinsense::kernels::detail
