#include <cmath>

#include "moranifs/common.hpp"
#include "moranifs/kernels.hpp"

// Reference kernels. Kept free of FMA contraction (see CMake flags on this
// target) so the AVX2 path, which uses separate mul/add, matches bitwise.

namespace moran::kernels::scalar {

void scale_offset(const double* x, std::size_t n, double s, double t,
                  double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s * x[i] + t;
}

void scale_anchor_offset(const double* s, const double* t, std::size_t n,
                         double c, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s[i] * c + t[i];
}

double moran_mixed_sum(double s, const double* lr, const double* mult,
                       const std::size_t* offsets, std::size_t num_layers) {
  KahanSum acc;
  for (std::size_t i = 0; i < num_layers; ++i) {
    const std::size_t begin = offsets[i];
    const std::size_t end = offsets[i + 1];
    double m = -HUGE_VAL;
    for (std::size_t j = begin; j < end; ++j) {
      double v = s * lr[j];
      if (v > m) m = v;
    }
    double inner = 0.0;
    for (std::size_t j = begin; j < end; ++j) {
      inner += mult[j] * std::exp(s * lr[j] - m);
    }
    acc.add(m + std::log(inner));
  }
  return acc.value();
}

void cell_keys(const double* x, std::size_t n, double origin, double inv_delta,
               std::int64_t* keys) {
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = static_cast<std::int64_t>(std::floor((x[i] - origin) * inv_delta));
  }
}

}  // namespace moran::kernels::scalar
