#pragma once

#include <array>
#include <optional>

#include "moranifs/common.hpp"

namespace moran {

enum class MapKind { Similarity, DiagonalAffine };

// Row-major d x d matrix padded to 3x3 (identity outside the active block).
using Mat = std::array<double, 9>;

Mat mat_identity();
Mat mat_mul(const Mat& a, const Mat& b, int dim);
Mat mat_transpose(const Mat& m, int dim);
Vec mat_apply(const Mat& m, const Vec& v, int dim);
bool mat_is_identity(const Mat& m, int dim, double tol = 1e-15);
Mat mat_rotation2d(double angle);

// One contraction map. A similarity acts as x -> r*O*(x + a); a
// diagonal-affine map acts as x -> D*(x + a) with D = diag(d_1..d_dim).
struct ContractionMap {
  MapKind kind = MapKind::Similarity;
  int dim = 1;
  double ratio = 0.5;      // similarity only
  Mat orthogonal = mat_identity();
  Vec diag = {0.5, 0.5, 0.5};  // diagonal-affine only
  Vec translation = vec0();    // the a above
  bool has_rotation = false;   // orthogonal part differs from identity

  static ContractionMap similarity(int dim, double ratio, Vec translation,
                                   const Mat& orthogonal = mat_identity());
  static ContractionMap similarity2d_angle(double ratio, Vec translation,
                                           double angle);
  static ContractionMap diagonal(int dim, Vec diag, Vec translation);

  Vec apply(const Vec& x) const;

  // Per-axis linear factor; for a similarity this is the ratio on every axis
  // (valid for composition bookkeeping only when the orthogonal part is
  // identity).
  double axis_factor(int axis) const {
    return kind == MapKind::Similarity ? ratio : diag[axis];
  }

  // Largest/smallest expansion of distances under the map (exact for both
  // supported kinds; orthogonal parts preserve norms).
  double max_factor() const;
  double min_factor() const;
  double log_rmax() const { return std::log(max_factor()); }
  double log_rmin() const { return std::log(min_factor()); }

  // Linear-plus-offset form x -> L x + t; offset() returns t.
  Vec offset() const;

  // Exact image of an axis-aligned box. Throws UnsupportedGeometry when the
  // orthogonal part is not a signed permutation of the axes.
  Box image_box(const Box& b) const;

  // True when image_box is exact (identity/signed-permutation orthogonal).
  bool axis_aligned() const;

  void validate() const;  // invariants; throws Error on violation
};

// Composition a∘b restricted to the closed families: similarity chains stay
// similarities; chains of diagonal maps and isotropic (identity-orthogonal)
// similarities stay diagonal. Anything else throws UnsupportedComposition.
ContractionMap compose_maps(const ContractionMap& a, const ContractionMap& b);

ContractionMap identity_map(int dim);

// Parameter equality after deterministic composition, with relative
// tolerance; used for deduplicating composed map families.
bool maps_equal(const ContractionMap& a, const ContractionMap& b,
                double rel_tol = 1e-12);

}  // namespace moran
