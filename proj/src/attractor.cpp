#include "moranifs/attractor.hpp"

#include <algorithm>
#include <cmath>

#include "moranifs/kernels.hpp"
#include "moranifs/parallel.hpp"
#include "moranifs/rng.hpp"

namespace moran {

std::vector<double> PointCloud::to_rows() const {
  std::vector<double> rows(size() * static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < size(); ++i)
    for (int a = 0; a < dim; ++a)
      rows[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(a)] =
          axes[a][i];
  return rows;
}

PointCloud cover(const LayerSystem& sys, double b, const Vec& anchor,
                 std::uint64_t limit) {
  if (!(b > 0.0 && b < 1.0)) throw Error("cover scale b must lie in (0,1)");
  if (!sys.ambient().contains_point(anchor, sys.dim(), 1e-12))
    throw Error("cover anchor must lie in the ambient box");
  PointCloud pc;
  pc.dim = sys.dim();
  pc.scale = b;
  pc.provenance = CloudProvenance::DeterministicCover;
  cutset_visit(sys, std::log(b), limit, [&](const CutsetEntry& e) {
    Vec p = e.composed->apply(anchor);
    for (int a = 0; a < pc.dim; ++a) pc.axes[a].push_back(p[a]);
  });
  return pc;
}

PointCloud sample_measure(const LayerSystem& sys, const WeightSequence& w,
                          std::uint64_t count, double eps, std::uint64_t seed,
                          const Vec& anchor) {
  if (count < 1) throw Error("sample count must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw Error("eps must lie in (0,1)");
  AmbientCheck chk = sys.check_ambient();
  if (!chk.containment_ok)
    throw Error("system fails ambient containment; sampling refused");

  const int dim = sys.dim();
  const std::uint64_t depth = sys.depth_for_scale(std::log(eps));

  // Per-layer tables: digit sampler plus per-axis linear factor and offset
  // for every map. Layers with huge map counts sample through their ratio
  // groups and materialize single maps per draw.
  struct LayerTable {
    std::uint64_t count = 0;
    bool materialized = false;
    std::vector<double> lin;  // [map][axis]
    std::vector<double> off;
    bool uniform_draw = false;
    std::vector<double> cum;  // cumulative probabilities when materialized
    // (cumulative mass, group) pairs for group-wise draws on huge layers
    std::vector<std::pair<double, RatioGroup>> group_cum;
  };
  std::vector<LayerTable> tables(depth);
  for (std::uint64_t n = 1; n <= depth; ++n) {
    LayerSummary s = sys.layer_summary(n);
    LayerTable& t = tables[n - 1];
    t.count = s.map_count;
    t.materialized = s.map_count <= 4096;
    if (t.materialized) {
      t.lin.resize(s.map_count * static_cast<std::size_t>(dim));
      t.off.resize(s.map_count * static_cast<std::size_t>(dim));
      for (std::uint64_t j = 1; j <= s.map_count; ++j) {
        ContractionMap m = sys.map_at(n, static_cast<std::uint32_t>(j));
        if (m.kind == MapKind::Similarity && m.has_rotation)
          throw Error("sampling with rotated maps is not supported");
        Vec off = m.offset();
        for (int a = 0; a < dim; ++a) {
          t.lin[(j - 1) * dim + a] = m.axis_factor(a);
          t.off[(j - 1) * dim + a] = off[a];
        }
      }
    }
    if (w.kind() == WeightKind::Uniform) {
      t.uniform_draw = true;
    } else if (t.materialized) {
      std::vector<double> p = w.probs(sys, n);
      t.cum.resize(p.size());
      double acc = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) {
        acc += p[j];
        t.cum[j] = acc;
      }
      t.cum.back() = 1.0;
    } else if (w.kind() == WeightKind::RatioPower && s.all_similarity) {
      double z = 0.0;
      for (const auto& g : s.ratio_groups)
        z += static_cast<double>(g.count) * std::exp(w.power() * g.log_ratio);
      double acc = 0.0;
      for (const auto& g : s.ratio_groups) {
        acc += static_cast<double>(g.count) *
               std::exp(w.power() * g.log_ratio) / z;
        t.group_cum.emplace_back(acc, g);
      }
      t.group_cum.back().first = 1.0;
    } else {
      throw Error("weights not materializable for layer " + std::to_string(n));
    }
  }

  auto draw_digit = [](const LayerTable& t, double u) -> std::uint32_t {
    if (t.uniform_draw) {
      std::uint64_t j =
          static_cast<std::uint64_t>(u * static_cast<double>(t.count));
      if (j >= t.count) j = t.count - 1;
      return static_cast<std::uint32_t>(j + 1);
    }
    if (!t.cum.empty()) {
      std::size_t j = static_cast<std::size_t>(
          std::lower_bound(t.cum.begin(), t.cum.end(), u) - t.cum.begin());
      if (j >= t.cum.size()) j = t.cum.size() - 1;
      return static_cast<std::uint32_t>(j + 1);
    }
    double prev = 0.0;
    for (const auto& [mass, g] : t.group_cum) {
      if (u <= mass || &mass == &t.group_cum.back().first) {
        // Group hit; spread uniformly over its members.
        double span = mass - prev;
        double frac = span > 0.0 ? (u - prev) / span : 0.0;
        std::uint64_t i =
            static_cast<std::uint64_t>(frac * static_cast<double>(g.count));
        if (i >= g.count) i = g.count - 1;
        return static_cast<std::uint32_t>(g.first + i);
      }
      prev = mass;
    }
    return 1;
  };

  PointCloud pc;
  pc.dim = dim;
  pc.scale = eps;
  pc.provenance = CloudProvenance::MeasureSample;
  for (int a = 0; a < dim; ++a) pc.axes[a].assign(count, 0.0);

  // Per-sample accumulated affine map (outer-first): after layer i,
  // S <- S * L_i and T <- T + S_prev * t_i, then the point is S*anchor + T.
  std::array<std::vector<double>, kMaxDim> acc_lin;
  std::array<std::vector<double>, kMaxDim> acc_off;
  for (int a = 0; a < dim; ++a) {
    acc_lin[a].assign(count, 1.0);
    acc_off[a].assign(count, 0.0);
  }

  parallel_for(count, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::uint64_t n = 1; n <= depth; ++n) {
        const LayerTable& t = tables[n - 1];
        double u = rng::uniform(seed, i, n);
        std::uint32_t j = draw_digit(t, u);
        const double* lin;
        const double* off;
        double tmp_lin[kMaxDim], tmp_off[kMaxDim];
        if (t.materialized) {
          lin = &t.lin[(j - 1) * static_cast<std::size_t>(dim)];
          off = &t.off[(j - 1) * static_cast<std::size_t>(dim)];
        } else {
          ContractionMap m = sys.map_at(n, j);
          Vec o = m.offset();
          for (int a = 0; a < dim; ++a) {
            tmp_lin[a] = m.axis_factor(a);
            tmp_off[a] = o[a];
          }
          lin = tmp_lin;
          off = tmp_off;
        }
        for (int a = 0; a < dim; ++a) {
          acc_off[a][i] = acc_off[a][i] + acc_lin[a][i] * off[a];
          acc_lin[a][i] = acc_lin[a][i] * lin[a];
        }
      }
    }
  });

  for (int a = 0; a < dim; ++a) {
    kernels::scale_anchor_offset(acc_lin[a].data(), acc_off[a].data(), count,
                                 anchor[a], pc.axes[a].data());
  }
  return pc;
}

double hausdorff_distance(const PointCloud& a, const PointCloud& b) {
  if (a.dim != b.dim) throw DimensionMismatch("cloud dimensions differ");
  auto directed = [&](const PointCloud& from, const PointCloud& to) {
    double worst = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      Vec p = from.point(i);
      double best = HUGE_VAL;
      for (std::size_t j = 0; j < to.size(); ++j) {
        Vec q = to.point(j);
        double d = 0.0;
        for (int ax = 0; ax < from.dim; ++ax) d += sqr(p[ax] - q[ax]);
        if (d < best) best = d;
      }
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace moran
