#include "moranifs/separation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "moranifs/rng.hpp"

namespace moran {

namespace {

// --------------------------------------------------------------------------
// Broad phase: uniform-cell hash over axis-aligned boxes. Hash collisions
// between distinct cells only add candidates; the exact box test filters.
class BoxGrid {
 public:
  BoxGrid(const std::vector<Box>& boxes, int dim) : boxes_(boxes), dim_(dim) {
    h_ = 1e-300;
    for (const Box& b : boxes) {
      for (int a = 0; a < dim_; ++a) h_ = std::max(h_, b.width(a));
    }
    inv_h_ = 1.0 / h_;
    for (std::uint32_t i = 0; i < boxes.size(); ++i) {
      visit_cells(boxes[i], [&](std::uint64_t key) {
        buckets_[key].push_back(i);
      });
    }
  }

  template <typename F>
  void candidates(const Box& b, F&& f) const {
    visit_cells(b, [&](std::uint64_t key) {
      auto it = buckets_.find(key);
      if (it == buckets_.end()) return;
      for (std::uint32_t id : it->second) f(id);
    });
  }

 private:
  template <typename F>
  void visit_cells(const Box& b, F&& f) const {
    std::int64_t lo[kMaxDim] = {0, 0, 0}, hi[kMaxDim] = {0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      lo[a] = static_cast<std::int64_t>(std::floor(b.lo[a] * inv_h_));
      hi[a] = static_cast<std::int64_t>(std::floor(b.hi[a] * inv_h_));
    }
    for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
      for (std::int64_t y = lo[1]; y <= hi[1]; ++y) {
        for (std::int64_t z = lo[2]; z <= hi[2]; ++z) {
          std::uint64_t key = rng::splitmix64(static_cast<std::uint64_t>(x)) ^
                              rng::splitmix64(static_cast<std::uint64_t>(y) ^
                                              0x5851F42D4C957F2DULL) ^
                              rng::splitmix64(static_cast<std::uint64_t>(z) ^
                                              0x14057B7EF767814FULL);
          f(key);
        }
      }
    }
  }

  const std::vector<Box>& boxes_;
  int dim_;
  double h_, inv_h_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

// Assign tolerance-deduplicated map ids; equal maps sort adjacent.
std::vector<std::uint32_t> assign_map_ids(
    const std::vector<ContractionMap>& maps, std::uint32_t* num_ids) {
  std::vector<std::uint32_t> order(maps.size());
  for (std::uint32_t i = 0; i < maps.size(); ++i) order[i] = i;
  const int dim = maps.empty() ? 1 : maps[0].dim;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t ia, std::uint32_t ib) {
                     Vec ta = maps[ia].offset(), tb = maps[ib].offset();
                     for (int i = 0; i < dim; ++i)
                       if (ta[i] != tb[i]) return ta[i] < tb[i];
                     for (int i = 0; i < dim; ++i) {
                       double fa = maps[ia].axis_factor(i);
                       double fb = maps[ib].axis_factor(i);
                       if (fa != fb) return fa < fb;
                     }
                     return false;
                   });
  std::vector<std::uint32_t> ids(maps.size(), 0);
  std::uint32_t next = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && !maps_equal(maps[order[k - 1]], maps[order[k]])) ++next;
    ids[order[k]] = next;
  }
  *num_ids = order.empty() ? 0 : next + 1;
  return ids;
}

SepVerdict verdict_from_growth(const std::vector<double>& v, double* sup,
                               std::string* note) {
  *sup = 0.0;
  for (double x : v) *sup = std::max(*sup, x);
  if (v.size() < 3) {
    *note = "too few grid points";
    return SepVerdict::Inconclusive;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] * (1.0 - 1e-12)) monotone = false;
  if (monotone && v.back() > 1e3) {
    *note = "monotone growth beyond 1e3";
    return SepVerdict::Fails;
  }
  // Plateau test: the trailing half adds nothing over the leading half.
  double first_half = 0.0, second_half = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i < v.size() / 2)
      first_half = std::max(first_half, v[i]);
    else
      second_half = std::max(second_half, v[i]);
  }
  if (second_half <= first_half * 1.05 + 1e-12) {
    *note = "plateaued";
    return SepVerdict::Holds;
  }
  *note = "still growing at the end of the grid";
  return SepVerdict::Inconclusive;
}

// Merged 1D open-interval union (merge on strict overlap only: touching open
// intervals do not cover their shared endpoint).
std::vector<Box> merge_open_1d(std::vector<Box> boxes) {
  std::sort(boxes.begin(), boxes.end(),
            [](const Box& a, const Box& b) { return a.lo[0] < b.lo[0]; });
  std::vector<Box> out;
  for (const Box& b : boxes) {
    if (!out.empty() && b.lo[0] < out.back().hi[0]) {
      out.back().hi[0] = std::max(out.back().hi[0], b.hi[0]);
    } else {
      out.push_back(b);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

BoxSequence BoxSequence::constant(std::vector<Box> boxes) {
  BoxSequence s;
  s.kind_ = Kind::Constant;
  s.constant_ = std::move(boxes);
  return s;
}

BoxSequence BoxSequence::explicit_periodic(
    std::vector<std::vector<Box>> prefix, std::vector<std::vector<Box>> cycle) {
  if (cycle.empty()) throw Error("box sequence cycle must be nonempty");
  BoxSequence s;
  s.kind_ = Kind::ExplicitPeriodic;
  s.prefix_ = std::move(prefix);
  s.cycle_ = std::move(cycle);
  return s;
}

BoxSequence BoxSequence::family_default() { return BoxSequence(); }

std::vector<Box> BoxSequence::boxes(const LayerSystem& sys,
                                    std::uint64_t n) const {
  switch (kind_) {
    case Kind::Constant:
      return constant_;
    case Kind::ExplicitPeriodic: {
      if (n <= prefix_.size()) return prefix_[n - 1];
      return cycle_[(n - prefix_.size() - 1) % cycle_.size()];
    }
    default: {
      if (auto b = sys.separation_box(n)) return {*b};
      return {sys.ambient()};
    }
  }
}

std::string verdict_name(SepVerdict v) {
  switch (v) {
    case SepVerdict::Holds:
      return "holds-up-to-depth";
    case SepVerdict::Fails:
      return "fails-at";
    default:
      return "inconclusive";
  }
}

// ---------------------------------------------------------------------------

MoscResult check_mosc(const LayerSystem& sys, const BoxSequence& V,
                      std::uint64_t nmax) {
  if (nmax < 1) throw Error("check_mosc: nmax must be >= 1");
  MoscResult res;
  res.checked_depth = nmax;
  const int dim = sys.dim();

  auto union_volume = [&](const std::vector<Box>& u) {
    if (dim == 1) {
      double vol = 0.0;
      for (const Box& b : merge_open_1d(u)) vol += b.width(0);
      return vol;
    }
    // Members must be pairwise disjoint for the sum to be the union measure.
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = i + 1; j < u.size(); ++j)
        if (!u[i].disjoint_open(u[j], dim))
          throw UnsupportedGeometry(
              "overlapping union members in dimension > 1");
    double vol = 0.0;
    for (const Box& b : u) vol += b.volume(dim);
    return vol;
  };

  auto contained_in_union = [&](const Box& img, const std::vector<Box>& u,
                                double slack) {
    if (dim == 1) {
      for (const Box& m : merge_open_1d(u))
        if (m.contains(img, 1, slack)) return true;
      return false;
    }
    for (const Box& m : u)
      if (m.contains(img, dim, slack)) return true;
    return false;
  };

  const double slack = 1e-12;
  for (std::uint64_t n = 1; n <= nmax; ++n) {
    std::vector<Box> vn = V.boxes(sys, n);
    std::vector<Box> vn1 = V.boxes(sys, n + 1);
    if (vn.empty() || vn1.empty())
      throw Error("empty open-set candidate at layer " + std::to_string(n));
    res.measures.push_back(union_volume(vn));

    Layer layer = sys.layer(n);
    // Images of V_{n+1} under every map, tagged by map index.
    std::vector<Box> images;
    std::vector<std::uint32_t> owner;
    for (std::uint32_t j = 0; j < layer.maps.size(); ++j) {
      for (const Box& member : vn1) {
        Box img = layer.maps[j].image_box(member);  // throws on rotation
        images.push_back(img);
        owner.push_back(j);
        if (!contained_in_union(img, vn, slack)) {
          res.verdict = SepVerdict::Fails;
          SepWitness w;
          w.layer = n;
          w.map_i = j + 1;
          w.note = "image not contained in V_n";
          res.witness = w;
        }
      }
      if (res.witness) break;
    }
    if (res.witness) break;

    // Pairwise open disjointness across different maps (sweep on axis 0).
    std::vector<std::uint32_t> order(images.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return images[a].lo[0] < images[b].lo[0];
    });
    std::vector<std::uint32_t> active;
    for (std::uint32_t oi : order) {
      const Box& bi = images[oi];
      std::vector<std::uint32_t> next;
      for (std::uint32_t aj : active) {
        const Box& bj = images[aj];
        if (bj.hi[0] <= bi.lo[0]) continue;  // expired on the sweep axis
        next.push_back(aj);
        if (owner[aj] == owner[oi]) continue;
        if (!bi.disjoint_open(bj, dim)) {
          res.verdict = SepVerdict::Fails;
          SepWitness w;
          w.layer = n;
          w.map_i = owner[aj] + 1;
          w.map_j = owner[oi] + 1;
          w.note = "open images overlap";
          res.witness = w;
          break;
        }
      }
      if (res.witness) break;
      next.push_back(oi);
      active.swap(next);
    }
    if (res.witness) break;
  }

  if (!res.witness) res.verdict = SepVerdict::Holds;
  res.inf_measure = HUGE_VAL;
  double max_measure = 0.0;
  for (double m : res.measures) {
    res.inf_measure = std::min(res.inf_measure, m);
    max_measure = std::max(max_measure, m);
  }
  if (res.measures.empty()) res.inf_measure = 0.0;
  res.measure_bounded_away =
      max_measure > 0.0 && res.inf_measure >= 0.1 * max_measure;
  return res;
}

// ---------------------------------------------------------------------------

MsscResult check_mssc(const LayerSystem& sys, std::uint64_t nmax, double eps,
                      std::uint64_t limit) {
  MsscResult res;
  res.checked_depth = nmax;
  const int dim = sys.dim();
  const Box X = sys.ambient();

  for (std::uint64_t n = 1; n <= nmax; ++n) {
    // All words of length n with their composed maps.
    std::vector<std::vector<std::uint32_t>> words;
    std::vector<ContractionMap> composed;
    {
      std::vector<std::uint32_t> digits;
      std::vector<ContractionMap> stack;
      std::function<void()> rec = [&]() {
        std::uint64_t depth = digits.size();
        if (depth == n) {
          words.push_back(digits);
          composed.push_back(stack.back());
          if (words.size() > limit)
            throw LimitExceeded("word space exceeds limit", words.size());
          return;
        }
        LayerSummary s = sys.layer_summary(depth + 1);
        for (std::uint32_t j = 1; j <= s.map_count; ++j) {
          ContractionMap m = sys.map_at(depth + 1, j);
          stack.push_back(stack.empty() ? m
                                        : compose_maps(stack[stack.size() - 1],
                                                       m));
          digits.push_back(j);
          rec();
          digits.pop_back();
          stack.pop_back();
        }
      };
      rec();
    }

    std::vector<Box> word_boxes;
    word_boxes.reserve(words.size());
    for (const auto& c : composed) word_boxes.push_back(c.image_box(X));

    // Candidate pairs from the coarse boxes (closed intersection).
    BoxGrid grid(word_boxes, dim);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cands;
    std::vector<std::uint32_t> stamp(words.size(), UINT32_MAX);
    for (std::uint32_t i = 0; i < word_boxes.size(); ++i) {
      grid.candidates(word_boxes[i], [&](std::uint32_t j) {
        if (j <= i || stamp[j] == i) return;
        stamp[j] = i;
        if (word_boxes[i].intersects_closed(word_boxes[j], dim))
          cands.emplace_back(i, j);
      });
    }
    if (cands.empty()) continue;

    // Refined covers: cutset boxes of the shifted system at scale eps,
    // pushed through each word's composed map.
    std::vector<Box> refined;
    try {
      LayerSystem shifted = sys.shift(n);
      cutset_visit(shifted, std::log(eps), limit, [&](const CutsetEntry& e) {
        refined.push_back(e.composed->image_box(X));
      });
    } catch (const LimitExceeded&) {
      res.verdict = SepVerdict::Inconclusive;
      return res;
    }

    for (auto [i, j] : cands) {
      std::vector<Box> bi, bj;
      bi.reserve(refined.size());
      bj.reserve(refined.size());
      for (const Box& w : refined) bi.push_back(composed[i].image_box(w));
      for (const Box& w : refined) bj.push_back(composed[j].image_box(w));
      BoxGrid gj(bj, dim);
      bool hit = false;
      for (const Box& a : bi) {
        gj.candidates(a, [&](std::uint32_t id) {
          if (!hit && a.intersects_closed(bj[id], dim)) hit = true;
        });
        if (hit) break;
      }
      if (hit) {
        res.verdict = SepVerdict::Fails;
        SepWitness w;
        w.layer = n;
        w.word_i = words[i];
        w.word_j = words[j];
        w.note = "refined covers still intersect at scale eps";
        res.witness = w;
        return res;
      }
    }
  }
  res.verdict = SepVerdict::Holds;
  return res;
}

// ---------------------------------------------------------------------------

GammaSamples gamma2_mwhp(const LayerSystem& sys,
                         const std::vector<double>& log_b_grid,
                         std::uint64_t limit) {
  GammaSamples out;
  for (double lb : log_b_grid) {
    double max_logR = -HUGE_VAL, min_logr = HUGE_VAL;
    cutset_visit(sys, lb, limit, [&](const CutsetEntry& e) {
      max_logR = std::max(max_logR, e.logR);
      min_logr = std::min(min_logr, e.logr);
    });
    out.log_b.push_back(lb);
    out.value.push_back(std::exp(max_logR - min_logr));
  }
  out.verdict = verdict_from_growth(out.value, &out.sup_value, &out.note);
  return out;
}

namespace {
double max_cum(const double cum[kMaxDim][kMaxDim], int dim) {
  double m = 0.0;
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) m = std::max(m, cum[a][b]);
  return m;
}
}  // namespace

GammaSamples gamma3_mbdp(const LayerSystem& sys, std::uint64_t depth) {
  GammaSamples out;
  const int dim = sys.dim();
  // cum[a][b] accumulates max_j log(f_a/f_b) per layer; exchanging the max
  // and the product over layers is exact because digits choose factors
  // independently per layer.
  double cum[kMaxDim][kMaxDim] = {{0}};
  for (std::uint64_t n = 1; n <= depth; ++n) {
    LayerSummary s = sys.layer_summary(n);
    if (s.all_similarity) {
      // R_J = r_J for similarity chains: no contribution.
      out.log_b.push_back(static_cast<double>(n));
      out.value.push_back(std::exp(max_cum(cum, dim)));
      continue;
    }
    if (s.map_count > (1u << 20))
      throw Error("gamma3: layer too large to scan");
    double best[kMaxDim][kMaxDim];
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) best[a][b] = -HUGE_VAL;
    for (std::uint32_t j = 1; j <= s.map_count; ++j) {
      ContractionMap m = sys.map_at(n, j);
      for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
          double v = std::log(m.axis_factor(a)) - std::log(m.axis_factor(b));
          best[a][b] = std::max(best[a][b], v);
        }
      }
    }
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) cum[a][b] += best[a][b];
    out.log_b.push_back(static_cast<double>(n));
    out.value.push_back(std::exp(max_cum(cum, dim)));
  }
  out.verdict = verdict_from_growth(out.value, &out.sup_value, &out.note);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct CutsetBoxes {
  std::vector<Box> boxes;            // one or more per word
  std::vector<std::uint32_t> word;   // box -> word id
  std::vector<std::uint32_t> word_first_box;
  std::vector<std::uint32_t> word_box_count;
  std::vector<ContractionMap> composed;
  std::vector<std::size_t> word_len;
};

CutsetBoxes collect_cutset_boxes(const LayerSystem& sys, double log_b,
                                 std::uint64_t limit, const BoxSequence* U) {
  CutsetBoxes cb;
  const Box X = sys.ambient();
  cutset_visit(sys, log_b, limit, [&](const CutsetEntry& e) {
    std::uint32_t wid = static_cast<std::uint32_t>(cb.composed.size());
    cb.composed.push_back(*e.composed);
    cb.word_len.push_back(e.digits.size());
    cb.word_first_box.push_back(static_cast<std::uint32_t>(cb.boxes.size()));
    std::uint32_t cnt = 0;
    if (U) {
      for (const Box& member : U->boxes(sys, e.digits.size() + 1)) {
        cb.boxes.push_back(e.composed->image_box(member));
        cb.word.push_back(wid);
        ++cnt;
      }
    } else {
      cb.boxes.push_back(e.composed->image_box(X));
      cb.word.push_back(wid);
      ++cnt;
    }
    cb.word_box_count.push_back(cnt);
  });
  return cb;
}

}  // namespace

GammaSamples gamma4_neighbors(const LayerSystem& sys,
                              const std::vector<double>& log_b_grid,
                              std::uint64_t limit, bool dedup,
                              const BoxSequence* U) {
  GammaSamples out;
  const int dim = sys.dim();
  for (double lb : log_b_grid) {
    CutsetBoxes cb = collect_cutset_boxes(sys, lb, limit, U);
    const std::uint32_t W = static_cast<std::uint32_t>(cb.composed.size());
    std::uint32_t num_ids = 0;
    std::vector<std::uint32_t> map_id;
    if (dedup) map_id = assign_map_ids(cb.composed, &num_ids);

    BoxGrid grid(cb.boxes, dim);
    std::vector<std::uint32_t> word_stamp(W, UINT32_MAX);
    std::vector<std::uint32_t> id_stamp(dedup ? num_ids : 0, UINT32_MAX);

    // X-images are compact (closed test, touching counts); U-images are open
    // boxes (touching faces do not intersect).
    const bool open_sets = U != nullptr;
    std::uint64_t best = 0;
    for (std::uint32_t i = 0; i < W; ++i) {
      std::uint64_t count = 0;
      auto consider = [&](std::uint32_t j) {
        if (word_stamp[j] == i) return;
        // Union-vs-union intersection check.
        bool hit = false;
        for (std::uint32_t a = 0; a < cb.word_box_count[i] && !hit; ++a) {
          const Box& bi = cb.boxes[cb.word_first_box[i] + a];
          for (std::uint32_t b = 0; b < cb.word_box_count[j] && !hit; ++b) {
            const Box& bj = cb.boxes[cb.word_first_box[j] + b];
            if (open_sets ? !bi.disjoint_open(bj, dim)
                          : bi.intersects_closed(bj, dim))
              hit = true;
          }
        }
        word_stamp[j] = i;
        if (!hit) return;
        if (dedup) {
          std::uint32_t id = map_id[j];
          if (id_stamp[id] != i) {
            id_stamp[id] = i;
            ++count;
          }
        } else {
          ++count;
        }
      };
      for (std::uint32_t a = 0; a < cb.word_box_count[i]; ++a) {
        grid.candidates(cb.boxes[cb.word_first_box[i] + a],
                        [&](std::uint32_t bid) { consider(cb.word[bid]); });
      }
      best = std::max(best, count);
    }
    out.log_b.push_back(lb);
    out.value.push_back(static_cast<double>(best));
  }
  out.verdict = verdict_from_growth(out.value, &out.sup_value, &out.note);
  return out;
}

MwscResult check_mwsc(const LayerSystem& sys, const BoxSequence& U,
                      const std::vector<double>& log_b_grid,
                      std::uint64_t limit) {
  MwscResult res;
  res.gamma1 = gamma4_neighbors(sys, log_b_grid, limit, true, &U);
  const int dim = sys.dim();
  res.inf_measure = HUGE_VAL;
  for (std::uint64_t n = 1; n <= 64; ++n) {
    double vol = 0.0;
    for (const Box& b : U.boxes(sys, n)) vol += b.volume(dim);
    res.u_measures.push_back(vol);
    res.inf_measure = std::min(res.inf_measure, vol);
  }
  if (res.gamma1.verdict == SepVerdict::Fails) {
    res.verdict = SepVerdict::Fails;  // unbounded for this U
  } else if (res.gamma1.verdict == SepVerdict::Holds &&
             res.inf_measure > 0.0) {
    res.verdict = SepVerdict::Holds;
  } else {
    res.verdict = SepVerdict::Inconclusive;
  }
  return res;
}

// ---------------------------------------------------------------------------

double default_near_identity_theta(const LayerSystem& sys) {
  return 0.01 * sys.ambient().diameter(sys.dim());
}

namespace {

// sup over ambient corners of |phi_i^{-1} phi_j(x) - x| for unrotated
// compositions; affine in x, so the corner sup is exact. Both detector paths
// call this, keeping their counts identical.
double pair_gap(const ContractionMap& ci, const ContractionMap& cj,
                const Box& X, int dim) {
  double gap = 0.0;
  const int corners = 1 << dim;
  Vec ti = ci.offset();
  for (int c = 0; c < corners; ++c) {
    Vec p = vec0();
    for (int a = 0; a < dim; ++a) p[a] = (c >> a) & 1 ? X.hi[a] : X.lo[a];
    Vec q = cj.apply(p);
    double d2 = 0.0;
    for (int a = 0; a < dim; ++a) {
      double back = (q[a] - ti[a]) / ci.axis_factor(a);
      d2 += sqr(back - p[a]);
    }
    gap = std::max(gap, std::sqrt(d2));
  }
  return gap;
}

}  // namespace

GammaSamples near_identity_gap(const LayerSystem& sys,
                               const std::vector<double>& log_b_grid,
                               std::uint64_t limit, double theta) {
  GammaSamples out;
  const int dim = sys.dim();
  const Box X = sys.ambient();

  for (double lb : log_b_grid) {
    // Fast path: 1D with every composed map an unrotated similarity of one
    // shared ratio (all maps in every traversed layer share it). Sorting by
    // offset puts intersecting pairs in a sliding window; per-pair gaps use
    // the same arithmetic as the generic scan.
    bool fast = dim == 1;
    std::vector<ContractionMap> composed;
    cutset_visit(sys, lb, limit, [&](const CutsetEntry& e) {
      const ContractionMap& c = *e.composed;
      if (fast && !(c.kind == MapKind::Similarity && !c.has_rotation &&
                    (composed.empty() || c.ratio == composed[0].ratio))) {
        fast = false;
      }
      if (c.kind == MapKind::Similarity && c.has_rotation)
        throw UnsupportedGeometry(
            "near-identity detector needs unrotated compositions");
      composed.push_back(c);
    });

    std::uint64_t count = 0;
    std::uint64_t intersecting = 0;
    double min_gap = HUGE_VAL;
    if (fast && !composed.empty()) {
      // Equal composed ratios: gap(I,J) = |t_J - t_I| / ratio and images
      // intersect iff |t_J - t_I| <= ratio * |X| per axis. Sorting offsets
      // turns both counts into sliding windows, O(W log W) total; pairs are
      // counted by index arithmetic, never enumerated (they can run to 1e10
      // on heavily overlapping systems).
      const double ratio = composed[0].ratio;
      std::vector<double> offs(composed.size());
      for (std::size_t i = 0; i < composed.size(); ++i)
        offs[i] = composed[i].offset()[0];
      std::sort(offs.begin(), offs.end());
      const double width = X.width(0) * ratio;  // image width
      const double qualify = std::min(theta * ratio, width);
      std::size_t lo_q = 0, lo_w = 0;
      for (std::size_t i = 1; i < offs.size(); ++i) {
        while (offs[i] - offs[lo_q] > qualify) ++lo_q;
        count += i - lo_q;
        while (offs[i] - offs[lo_w] > width) ++lo_w;
        intersecting += i - lo_w;
        double dt = offs[i] - offs[i - 1];
        if (dt <= width) min_gap = std::min(min_gap, dt / ratio);
      }
    } else if (!composed.empty()) {
      std::vector<Box> boxes;
      boxes.reserve(composed.size());
      for (const auto& c : composed) boxes.push_back(c.image_box(X));
      BoxGrid grid(boxes, dim);
      std::vector<std::uint32_t> stamp(boxes.size(), UINT32_MAX);
      for (std::uint32_t i = 0; i < boxes.size(); ++i) {
        grid.candidates(boxes[i], [&](std::uint32_t j) {
          if (j <= i || stamp[j] == i) return;
          stamp[j] = i;
          if (!boxes[i].intersects_closed(boxes[j], dim)) return;
          ++intersecting;
          double gap = pair_gap(composed[i], composed[j], X, dim);
          min_gap = std::min(min_gap, gap);
          if (gap <= theta) ++count;
        });
      }
    }
    out.log_b.push_back(lb);
    out.pair_count.push_back(count);
    out.intersecting_count.push_back(intersecting);
    out.min_gap.push_back(min_gap);
    out.value.push_back(static_cast<double>(count));
  }
  out.verdict = verdict_from_growth(out.value, &out.sup_value, &out.note);
  return out;
}

std::uint64_t gamma4_bruteforce(const LayerSystem& sys, double log_b,
                                std::uint64_t limit, bool dedup) {
  const int dim = sys.dim();
  const Box X = sys.ambient();
  std::vector<Box> boxes;
  std::vector<ContractionMap> composed;
  cutset_visit(sys, log_b, limit, [&](const CutsetEntry& e) {
    boxes.push_back(e.composed->image_box(X));
    composed.push_back(*e.composed);
  });
  std::uint32_t num_ids = 0;
  std::vector<std::uint32_t> ids;
  if (dedup) ids = assign_map_ids(composed, &num_ids);
  std::uint64_t best = 0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    std::uint64_t count = 0;
    std::vector<bool> seen(dedup ? num_ids : 0, false);
    for (std::size_t j = 0; j < boxes.size(); ++j) {
      if (!boxes[i].intersects_closed(boxes[j], dim)) continue;
      if (dedup) {
        if (!seen[ids[j]]) {
          seen[ids[j]] = true;
          ++count;
        }
      } else {
        ++count;
      }
    }
    best = std::max(best, count);
  }
  return best;
}

}  // namespace moran
