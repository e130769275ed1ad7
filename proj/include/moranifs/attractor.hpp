#pragma once

#include <cstdint>
#include <vector>

#include "moranifs/system.hpp"
#include "moranifs/words.hpp"

namespace moran {

enum class CloudProvenance { DeterministicCover, MeasureSample };

// Point set stored axis-major (SoA) for the batch kernels; row-major access
// goes through point()/to_rows().
struct PointCloud {
  int dim = 1;
  double scale = 0.0;  // cover: Hausdorff bound b; samples: depth scale eps
  CloudProvenance provenance = CloudProvenance::DeterministicCover;
  std::array<std::vector<double>, kMaxDim> axes;

  std::size_t size() const { return axes[0].size(); }
  Vec point(std::size_t i) const {
    Vec p = vec0();
    for (int a = 0; a < dim; ++a) p[a] = axes[a][i];
    return p;
  }
  std::vector<double> to_rows() const;
};

// One representative per cutset word: { phi_{1,J}(anchor) : J in I_b }.
// The result is b|X|-dense in K_1 and lies within b|X| of it.
PointCloud cover(const LayerSystem& sys, double b, const Vec& anchor,
                 std::uint64_t limit);

// Draws `count` independent words at the depth where the cumulative max
// contraction falls below eps, one fresh word per sample (the classical
// incremental chaos game is invalid here: composition is outer-first).
// Reproducible from `seed` regardless of thread count.
PointCloud sample_measure(const LayerSystem& sys, const WeightSequence& w,
                          std::uint64_t count, double eps, std::uint64_t seed,
                          const Vec& anchor);

// Symmetric Hausdorff distance between two clouds (exact pairwise; meant for
// the modest cloud sizes the finite-scale attractor checks use).
double hausdorff_distance(const PointCloud& a, const PointCloud& b);

}  // namespace moran
