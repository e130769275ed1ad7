#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace moran {

// Ambient dimensions are 1, 2 or 3; vectors and boxes are fixed-capacity
// with the active dimension carried by the owning system.
inline constexpr int kMaxDim = 3;

using Vec = std::array<double, kMaxDim>;

inline Vec vec0() { return {0.0, 0.0, 0.0}; }

inline Vec vec1(double x) { return {x, 0.0, 0.0}; }
inline Vec vec2(double x, double y) { return {x, y, 0.0}; }
inline Vec vec3(double x, double y, double z) { return {x, y, z}; }

// Axis-aligned box. Degenerate (lo == hi on an axis) is allowed for point
// boxes; callers that need open boxes interpret the bounds as exclusive.
struct Box {
  Vec lo{};
  Vec hi{};

  double width(int axis) const { return hi[axis] - lo[axis]; }

  Vec center(int dim) const {
    Vec c = vec0();
    for (int a = 0; a < dim; ++a) c[a] = 0.5 * (lo[a] + hi[a]);
    return c;
  }

  // Euclidean diameter of the box.
  double diameter(int dim) const {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += width(a) * width(a);
    return std::sqrt(s);
  }

  double volume(int dim) const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= width(a);
    return v;
  }

  bool contains(const Box& inner, int dim, double slack = 0.0) const {
    for (int a = 0; a < dim; ++a) {
      if (inner.lo[a] < lo[a] - slack) return false;
      if (inner.hi[a] > hi[a] + slack) return false;
    }
    return true;
  }

  bool contains_point(const Vec& p, int dim, double slack = 0.0) const {
    for (int a = 0; a < dim; ++a) {
      if (p[a] < lo[a] - slack || p[a] > hi[a] + slack) return false;
    }
    return true;
  }

  // Closed-box intersection: touching faces count as intersecting.
  bool intersects_closed(const Box& o, int dim) const {
    for (int a = 0; a < dim; ++a) {
      if (hi[a] < o.lo[a] || o.hi[a] < lo[a]) return false;
    }
    return true;
  }

  // Open-box disjointness: shared faces are allowed.
  bool disjoint_open(const Box& o, int dim) const {
    for (int a = 0; a < dim; ++a) {
      if (hi[a] <= o.lo[a] || o.hi[a] <= lo[a]) return true;
    }
    return false;
  }
};

// ---------------------------------------------------------------------------
// Error types. The CLI maps these onto structured diagnostics.

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// Composing a rotated similarity with an anisotropic diagonal map would leave
// the supported affine forms.
struct UnsupportedComposition : Error {
  using Error::Error;
};

// Geometry outside axis-aligned boxes (e.g. rotated open-set images).
struct UnsupportedGeometry : Error {
  using Error::Error;
};

// Cutset/cover enumeration hit its word budget; carries the count reached.
struct LimitExceeded : Error {
  std::uint64_t count_reached;
  LimitExceeded(const std::string& msg, std::uint64_t count)
      : Error(msg), count_reached(count) {}
};

// Malformed declaration files; `pointer` is a JSON pointer to the bad field.
struct ValidationError : Error {
  std::string pointer;
  ValidationError(const std::string& msg, std::string ptr)
      : Error(msg), pointer(std::move(ptr)) {}
};

// ---------------------------------------------------------------------------
// Compensated (Kahan) summation. Long products of contraction ratios live in
// log space, so the dimension code sums 1e5+ log terms; this keeps the
// residual near the double rounding floor.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

// Two-double accumulator for prefix sums that later cancel against each other
// (error ~ eps^2 per step instead of eps).
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  void add(double x) {
    double s = hi + x;
    double bb = s - hi;
    double err = (hi - (s - bb)) + (x - bb);
    hi = s;
    lo += err;
  }
  double value() const { return hi + lo; }
};

inline double sqr(double x) { return x * x; }

}  // namespace moran
