#include "moranifs/kernels.hpp"

#include <atomic>
#include <cstdlib>

#include "moranifs/common.hpp"

namespace moran::kernels {

namespace {

std::atomic<Backend> g_backend{Backend::Auto};

Backend resolve(Backend b) {
  if (b == Backend::Auto) {
    return avx2_available() ? Backend::Avx2 : Backend::Scalar;
  }
  return b;
}

}  // namespace

bool avx2_available() {
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

Backend active_backend() { return resolve(g_backend.load()); }

void set_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2_available()) {
    throw Error("AVX2 backend requested but not supported by this CPU");
  }
  g_backend.store(b);
}

std::string backend_name(Backend b) {
  switch (resolve(b)) {
    case Backend::Avx2:
      return "avx2";
    default:
      return "scalar";
  }
}

#if defined(__x86_64__) || defined(_M_X64)
#define MORAN_DISPATCH(fn, ...)                \
  if (active_backend() == Backend::Avx2) {    \
    return avx2::fn(__VA_ARGS__);             \
  }                                           \
  return scalar::fn(__VA_ARGS__)
#else
#define MORAN_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void scale_offset(const double* x, std::size_t n, double s, double t,
                  double* out) {
  MORAN_DISPATCH(scale_offset, x, n, s, t, out);
}

void scale_anchor_offset(const double* s, const double* t, std::size_t n,
                         double c, double* out) {
  MORAN_DISPATCH(scale_anchor_offset, s, t, n, c, out);
}

double moran_mixed_sum(double s, const double* lr, const double* mult,
                       const std::size_t* offsets, std::size_t num_layers) {
  MORAN_DISPATCH(moran_mixed_sum, s, lr, mult, offsets, num_layers);
}

void cell_keys(const double* x, std::size_t n, double origin, double inv_delta,
               std::int64_t* keys) {
  MORAN_DISPATCH(cell_keys, x, n, origin, inv_delta, keys);
}

#undef MORAN_DISPATCH

}  // namespace moran::kernels
