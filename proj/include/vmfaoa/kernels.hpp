#pragma once

#include <cstddef>

namespace vmfaoa::kernels {

// Implementation level for the hot particle loops. Resolved once at
// startup: the VMFAOA_KERNEL_LEVEL env var ("scalar" or "avx2") wins,
// otherwise CPU detection picks the widest supported level. All levels
// are equivalence-tested against the scalar reference.
enum class Level { scalar, avx2 };

Level active_level();
void set_level(Level level);  // override, mainly for tests
const char* level_name(Level level);
bool avx2_available();

// logw[i] += kappa * u.dot(p_i - s) / |p_i - s| over particle positions
// stored as separate x/y/z columns. Zero-length offsets yield NaN, which
// the particle filter surfaces as a degenerate-weights error.
void vmf_logw_accum(const double* px, const double* py, const double* pz,
                    std::size_t n, double sx, double sy, double sz, double ux,
                    double uy, double uz, double kappa, double* logw);

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_squares(const double* a, std::size_t n);
double max_value(const double* a, std::size_t n);

namespace detail {

void vmf_logw_accum_scalar(const double* px, const double* py,
                           const double* pz, std::size_t n, double sx,
                           double sy, double sz, double ux, double uy,
                           double uz, double kappa, double* logw);
double dot_scalar(const double* a, const double* b, std::size_t n);
double sum_scalar(const double* a, std::size_t n);
double sum_squares_scalar(const double* a, std::size_t n);
double max_value_scalar(const double* a, std::size_t n);

#if defined(VMFAOA_HAVE_AVX2)
void vmf_logw_accum_avx2(const double* px, const double* py, const double* pz,
                         std::size_t n, double sx, double sy, double sz,
                         double ux, double uy, double uz, double kappa,
                         double* logw);
double dot_avx2(const double* a, const double* b, std::size_t n);
double sum_avx2(const double* a, std::size_t n);
double sum_squares_avx2(const double* a, std::size_t n);
double max_value_avx2(const double* a, std::size_t n);
#endif

}  // namespace detail

}  // namespace vmfaoa::kernels
