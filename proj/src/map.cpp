#include "moranifs/map.hpp"

#include <algorithm>
#include <cmath>

namespace moran {

Mat mat_identity() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

Mat mat_mul(const Mat& a, const Mat& b, int dim) {
  Mat r = mat_identity();
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += a[i * 3 + k] * b[k * 3 + j];
      r[i * 3 + j] = s;
    }
  }
  return r;
}

Mat mat_transpose(const Mat& m, int dim) {
  Mat r = mat_identity();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r[i * 3 + j] = m[j * 3 + i];
  return r;
}

Vec mat_apply(const Mat& m, const Vec& v, int dim) {
  Vec r = vec0();
  for (int i = 0; i < dim; ++i) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += m[i * 3 + k] * v[k];
    r[i] = s;
  }
  return r;
}

bool mat_is_identity(const Mat& m, int dim, double tol) {
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      double want = i == j ? 1.0 : 0.0;
      if (std::abs(m[i * 3 + j] - want) > tol) return false;
    }
  }
  return true;
}

Mat mat_rotation2d(double angle) {
  Mat m = mat_identity();
  double c = std::cos(angle), s = std::sin(angle);
  m[0] = c;
  m[1] = -s;
  m[3] = s;
  m[4] = c;
  return m;
}

ContractionMap ContractionMap::similarity(int dim, double ratio,
                                          Vec translation,
                                          const Mat& orthogonal) {
  ContractionMap m;
  m.kind = MapKind::Similarity;
  m.dim = dim;
  m.ratio = ratio;
  m.orthogonal = orthogonal;
  m.translation = translation;
  m.has_rotation = !mat_is_identity(orthogonal, dim);
  m.validate();
  return m;
}

ContractionMap ContractionMap::similarity2d_angle(double ratio,
                                                  Vec translation,
                                                  double angle) {
  return similarity(2, ratio, translation,
                    angle == 0.0 ? mat_identity() : mat_rotation2d(angle));
}

ContractionMap ContractionMap::diagonal(int dim, Vec diag, Vec translation) {
  ContractionMap m;
  m.kind = MapKind::DiagonalAffine;
  m.dim = dim;
  m.diag = diag;
  m.translation = translation;
  m.validate();
  return m;
}

Vec ContractionMap::apply(const Vec& x) const {
  Vec r = vec0();
  if (kind == MapKind::Similarity) {
    Vec shifted = vec0();
    for (int a = 0; a < dim; ++a) shifted[a] = x[a] + translation[a];
    if (has_rotation) {
      Vec rot = mat_apply(orthogonal, shifted, dim);
      for (int a = 0; a < dim; ++a) r[a] = ratio * rot[a];
    } else {
      for (int a = 0; a < dim; ++a) r[a] = ratio * shifted[a];
    }
  } else {
    for (int a = 0; a < dim; ++a) r[a] = diag[a] * (x[a] + translation[a]);
  }
  return r;
}

double ContractionMap::max_factor() const {
  if (kind == MapKind::Similarity) return ratio;
  double m = diag[0];
  for (int a = 1; a < dim; ++a) m = std::max(m, diag[a]);
  return m;
}

double ContractionMap::min_factor() const {
  if (kind == MapKind::Similarity) return ratio;
  double m = diag[0];
  for (int a = 1; a < dim; ++a) m = std::min(m, diag[a]);
  return m;
}

Vec ContractionMap::offset() const { return apply(vec0()); }

bool ContractionMap::axis_aligned() const {
  if (kind == MapKind::DiagonalAffine || !has_rotation) return true;
  // Signed permutation: one +-1 per row and column, zeros elsewhere.
  for (int i = 0; i < dim; ++i) {
    int nonzero = 0;
    for (int j = 0; j < dim; ++j) {
      double v = orthogonal[i * 3 + j];
      if (std::abs(v) > 1e-12) {
        ++nonzero;
        if (std::abs(std::abs(v) - 1.0) > 1e-12) return false;
      }
    }
    if (nonzero != 1) return false;
  }
  return true;
}

Box ContractionMap::image_box(const Box& b) const {
  if (!axis_aligned()) {
    throw UnsupportedGeometry(
        "image of an axis-aligned box under a non-axis-aligned rotation is "
        "not a box");
  }
  Box out;
  if (kind == MapKind::DiagonalAffine || !has_rotation) {
    for (int a = 0; a < dim; ++a) {
      double f = axis_factor(a);
      out.lo[a] = f * (b.lo[a] + translation[a]);
      out.hi[a] = f * (b.hi[a] + translation[a]);
    }
    return out;
  }
  // Signed permutation: map the two extreme corners and sort per axis.
  Vec c0 = apply(b.lo);
  Vec c1 = apply(b.hi);
  for (int a = 0; a < dim; ++a) {
    out.lo[a] = std::min(c0[a], c1[a]);
    out.hi[a] = std::max(c0[a], c1[a]);
  }
  return out;
}

void ContractionMap::validate() const {
  if (dim < 1 || dim > kMaxDim) throw Error("map dimension must be 1, 2 or 3");
  if (kind == MapKind::Similarity) {
    if (!(ratio > 0.0 && ratio < 1.0))
      throw Error("similarity ratio must lie in (0,1)");
    // O * O^T = I within 1e-12.
    Mat prod = mat_mul(orthogonal, mat_transpose(orthogonal, dim), dim);
    if (!mat_is_identity(prod, dim, 1e-12))
      throw Error("orthogonal part fails O*O^T = I within 1e-12");
  } else {
    for (int a = 0; a < dim; ++a) {
      if (!(diag[a] > 0.0 && diag[a] < 1.0))
        throw Error("diagonal factors must lie in (0,1)");
    }
  }
  if (!std::isfinite(log_rmax()) || !std::isfinite(log_rmin()))
    throw Error("log contraction bounds must be finite");
}

ContractionMap identity_map(int dim) {
  // Only used as the composition seed; represented as a degenerate
  // "similarity" with ratio 1 that skips validation.
  ContractionMap m;
  m.kind = MapKind::Similarity;
  m.dim = dim;
  m.ratio = 1.0;
  m.translation = vec0();
  return m;
}

ContractionMap compose_maps(const ContractionMap& a, const ContractionMap& b) {
  if (a.dim != b.dim) throw DimensionMismatch("composing maps of unequal dimension");
  const int dim = a.dim;

  const bool a_sim = a.kind == MapKind::Similarity;
  const bool b_sim = b.kind == MapKind::Similarity;

  // t = La * tb + ta with per-kind linear parts.
  auto apply_linear = [dim](const ContractionMap& m, const Vec& v) {
    Vec r = vec0();
    if (m.kind == MapKind::Similarity) {
      if (m.has_rotation) {
        Vec rot = mat_apply(m.orthogonal, v, m.dim);
        for (int i = 0; i < m.dim; ++i) r[i] = m.ratio * rot[i];
      } else {
        for (int i = 0; i < m.dim; ++i) r[i] = m.ratio * v[i];
      }
    } else {
      for (int i = 0; i < m.dim; ++i) r[i] = m.diag[i] * v[i];
    }
    (void)dim;
    return r;
  };

  Vec tb = b.offset();
  Vec ta = a.offset();
  Vec t = apply_linear(a, tb);
  for (int i = 0; i < dim; ++i) t[i] += ta[i];

  if (a_sim && b_sim) {
    ContractionMap out;
    out.kind = MapKind::Similarity;
    out.dim = dim;
    out.ratio = a.ratio * b.ratio;
    out.orthogonal = mat_mul(a.orthogonal, b.orthogonal, dim);
    out.has_rotation = !mat_is_identity(out.orthogonal, dim);
    // a = L^{-1} t = (1/r) O^T t
    Vec alpha = out.has_rotation || a.has_rotation || b.has_rotation
                    ? mat_apply(mat_transpose(out.orthogonal, dim), t, dim)
                    : t;
    for (int i = 0; i < dim; ++i) alpha[i] /= out.ratio;
    out.translation = alpha;
    return out;
  }

  // Any diagonal factor in the chain: both parts must be axis-diagonal
  // (identity orthogonal); otherwise the result leaves the supported forms.
  if ((a_sim && a.has_rotation) || (b_sim && b.has_rotation)) {
    throw UnsupportedComposition(
        "composition of a rotation with a diagonal-affine map is not "
        "diagonal");
  }
  ContractionMap out;
  out.kind = MapKind::DiagonalAffine;
  out.dim = dim;
  for (int i = 0; i < dim; ++i) {
    out.diag[i] = a.axis_factor(i) * b.axis_factor(i);
    out.translation[i] = t[i] / out.diag[i];
  }
  return out;
}

bool maps_equal(const ContractionMap& a, const ContractionMap& b,
                double rel_tol) {
  if (a.dim != b.dim) return false;
  auto close = [rel_tol](double x, double y) {
    double scale = std::max({std::abs(x), std::abs(y), 1.0});
    return std::abs(x - y) <= rel_tol * scale;
  };
  // Compare in linear+offset form so a similarity and an isotropic diagonal
  // map with the same action compare equal.
  Vec ta = a.offset(), tb = b.offset();
  for (int i = 0; i < a.dim; ++i) {
    if (!close(ta[i], tb[i])) return false;
    if (!close(a.axis_factor(i), b.axis_factor(i))) return false;
  }
  bool rot_a = a.kind == MapKind::Similarity && a.has_rotation;
  bool rot_b = b.kind == MapKind::Similarity && b.has_rotation;
  if (rot_a || rot_b) {
    const Mat& ma = a.orthogonal;
    const Mat& mb = b.orthogonal;
    for (int i = 0; i < a.dim; ++i)
      for (int j = 0; j < a.dim; ++j)
        if (!close(ma[i * 3 + j], mb[i * 3 + j])) return false;
  }
  return true;
}

}  // namespace moran
