#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace moran::kernels {

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2 variant selected at runtime. Both paths perform the same operations in
// the same order (mul then add, no FMA contraction), so scale_offset /
// scale_anchor_offset / cell_keys are bit-identical across backends;
// moran_mixed_sum uses a vector exp and agrees to ~1e-13 relative.

enum class Backend { Auto, Scalar, Avx2 };

// Returns the backend actually in use after resolution.
Backend active_backend();

// Force a backend (tests use this to compare paths). Requesting Avx2 on a
// machine without it throws.
void set_backend(Backend b);

std::string backend_name(Backend b);
bool avx2_available();

// out[i] = s * x[i] + t  (one axis of an affine map over a point batch)
void scale_offset(const double* x, std::size_t n, double s, double t,
                  double* out);

// out[i] = s[i] * c + t[i]  (per-sample accumulated maps applied to a fixed
// anchor coordinate)
void scale_anchor_offset(const double* s, const double* t, std::size_t n,
                         double c, double* out);

// Sum over layers of log(sum_j mult[j] * exp(s * lr[j])) for the layer's
// slice lr[offsets[i]..offsets[i+1]); mult carries group multiplicities.
// Each slice is reduced with its max subtracted, so arguments to exp are
// <= 0 and the result is immune to underflow of the raw powers.
double moran_mixed_sum(double s, const double* lr, const double* mult,
                       const std::size_t* offsets, std::size_t num_layers);

// keys[i] = floor((x[i] - origin) * inv_delta) as int64 (one axis of a grid
// occupancy key). The multiply-by-reciprocal form is the defined semantics.
void cell_keys(const double* x, std::size_t n, double origin, double inv_delta,
               std::int64_t* keys);

// Scalar reference entry points, callable directly by equivalence tests.
namespace scalar {
void scale_offset(const double* x, std::size_t n, double s, double t,
                  double* out);
void scale_anchor_offset(const double* s, const double* t, std::size_t n,
                         double c, double* out);
double moran_mixed_sum(double s, const double* lr, const double* mult,
                       const std::size_t* offsets, std::size_t num_layers);
void cell_keys(const double* x, std::size_t n, double origin, double inv_delta,
               std::int64_t* keys);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void scale_offset(const double* x, std::size_t n, double s, double t,
                  double* out);
void scale_anchor_offset(const double* s, const double* t, std::size_t n,
                         double c, double* out);
double moran_mixed_sum(double s, const double* lr, const double* mult,
                       const std::size_t* offsets, std::size_t num_layers);
void cell_keys(const double* x, std::size_t n, double origin, double inv_delta,
               std::int64_t* keys);
}  // namespace avx2
#endif

}  // namespace moran::kernels
