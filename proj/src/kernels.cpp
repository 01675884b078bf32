#include "vmfaoa/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace vmfaoa::kernels {

namespace detail {

void vmf_logw_accum_scalar(const double* px, const double* py,
                           const double* pz, std::size_t n, double sx,
                           double sy, double sz, double ux, double uy,
                           double uz, double kappa, double* logw) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = px[i] - sx;
    const double dy = py[i] - sy;
    const double dz = pz[i] - sz;
    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    logw[i] += kappa * (ux * dx + uy * dy + uz * dz) / r;
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double sum_squares_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double max_value_scalar(const double* a, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

}  // namespace detail

bool avx2_available() {
#if defined(VMFAOA_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Level detect_level() {
  if (const char* env = std::getenv("VMFAOA_KERNEL_LEVEL")) {
    if (std::strcmp(env, "scalar") == 0) return Level::scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_available()) return Level::avx2;
  }
  return avx2_available() ? Level::avx2 : Level::scalar;
}

Level g_level = detect_level();

}  // namespace

Level active_level() { return g_level; }

void set_level(Level level) {
  g_level = (level == Level::avx2 && !avx2_available()) ? Level::scalar : level;
}

const char* level_name(Level level) {
  return level == Level::avx2 ? "avx2" : "scalar";
}

void vmf_logw_accum(const double* px, const double* py, const double* pz,
                    std::size_t n, double sx, double sy, double sz, double ux,
                    double uy, double uz, double kappa, double* logw) {
#if defined(VMFAOA_HAVE_AVX2)
  if (g_level == Level::avx2) {
    detail::vmf_logw_accum_avx2(px, py, pz, n, sx, sy, sz, ux, uy, uz, kappa,
                                logw);
    return;
  }
#endif
  detail::vmf_logw_accum_scalar(px, py, pz, n, sx, sy, sz, ux, uy, uz, kappa,
                                logw);
}

double dot(const double* a, const double* b, std::size_t n) {
#if defined(VMFAOA_HAVE_AVX2)
  if (g_level == Level::avx2) return detail::dot_avx2(a, b, n);
#endif
  return detail::dot_scalar(a, b, n);
}

double sum(const double* a, std::size_t n) {
#if defined(VMFAOA_HAVE_AVX2)
  if (g_level == Level::avx2) return detail::sum_avx2(a, n);
#endif
  return detail::sum_scalar(a, n);
}

double sum_squares(const double* a, std::size_t n) {
#if defined(VMFAOA_HAVE_AVX2)
  if (g_level == Level::avx2) return detail::sum_squares_avx2(a, n);
#endif
  return detail::sum_squares_scalar(a, n);
}

double max_value(const double* a, std::size_t n) {
#if defined(VMFAOA_HAVE_AVX2)
  if (g_level == Level::avx2) return detail::max_value_avx2(a, n);
#endif
  return detail::max_value_scalar(a, n);
}

}  // namespace vmfaoa::kernels
