#include "moranifs/words.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace moran {

namespace {

// Per-axis log factors of one map (similarity: the ratio on every axis).
void axis_logs(const ContractionMap& m, int dim, double* out) {
  for (int a = 0; a < dim; ++a) out[a] = std::log(m.axis_factor(a));
}

double reduce_max(const double* v, int dim) {
  double m = v[0];
  for (int a = 1; a < dim; ++a) m = std::max(m, v[a]);
  return m;
}

double reduce_min(const double* v, int dim) {
  double m = v[0];
  for (int a = 1; a < dim; ++a) m = std::min(m, v[a]);
  return m;
}

}  // namespace

Word make_word(const LayerSystem& sys, std::uint64_t start,
               std::vector<std::uint32_t> digits) {
  const int dim = sys.dim();
  Word w;
  w.start = start;
  double axes[kMaxDim] = {0, 0, 0};
  for (std::size_t i = 0; i < digits.size(); ++i) {
    std::uint64_t n = start + i;
    LayerSummary s = sys.layer_summary(n);
    if (digits[i] < 1 || digits[i] > s.map_count)
      throw Error("word digit out of range at layer " + std::to_string(n));
    ContractionMap m = sys.map_at(n, digits[i]);
    double al[kMaxDim];
    axis_logs(m, dim, al);
    for (int a = 0; a < dim; ++a) axes[a] += al[a];
  }
  w.digits = std::move(digits);
  w.logR = w.digits.empty() ? 0.0 : reduce_max(axes, dim);
  w.logr = w.digits.empty() ? 0.0 : reduce_min(axes, dim);
  return w;
}

ContractionMap compose(const LayerSystem& sys, const Word& w) {
  ContractionMap acc = identity_map(sys.dim());
  for (std::size_t i = 0; i < w.digits.size(); ++i) {
    acc = compose_maps(acc, sys.map_at(w.start + i, w.digits[i]));
  }
  return acc;
}

double cylinder_log_weight(const LayerSystem& sys, const WeightSequence& w,
                           const Word& word) {
  KahanSum acc;
  for (std::size_t i = 0; i < word.digits.size(); ++i) {
    acc.add(w.log_prob(sys, word.start + i, word.digits[i]));
  }
  return acc.value();
}

void cutset_visit(const LayerSystem& sys, double log_b, std::uint64_t limit,
                  const std::function<void(const CutsetEntry&)>& visit) {
  if (!(log_b < 0.0))
    throw Error("cutset scale b must lie in (0,1)");
  if (limit < 1) throw Error("cutset limit must be >= 1");

  const int dim = sys.dim();
  std::uint64_t emitted = 0;

  // Explicit DFS stack: per depth the digit cursor, the composed map, and
  // per-axis log factor sums. Composition is maintained incrementally, one
  // compose per tree node.
  struct Frame {
    std::uint32_t digit;        // current symbol at this depth (1-based)
    std::uint64_t map_count;    // N of this layer
    ContractionMap composed;    // composition up to and including this digit
    double axes[kMaxDim];
  };

  std::vector<Frame> stack;
  std::vector<std::uint32_t> digits;
  // Per-depth layer summaries; per-map axis logs come from the summary's
  // ratio groups for similarity layers so that bound accumulation matches
  // the closed-form counting path add for add (exact tie behavior at
  // natural scales).
  std::vector<LayerSummary> layer_cache;

  auto summary_at = [&](std::uint64_t depth) -> const LayerSummary& {
    while (layer_cache.size() <= depth)
      layer_cache.push_back(sys.layer_summary(layer_cache.size() + 1));
    return layer_cache[depth];
  };

  auto push = [&](std::uint32_t digit) {
    std::uint64_t depth = stack.size();  // 0-based layer offset
    const LayerSummary& sm = summary_at(depth);
    Frame f;
    f.digit = digit;
    f.map_count = sm.map_count;
    ContractionMap m = sys.map_at(depth + 1, digit);
    const ContractionMap* parent =
        stack.empty() ? nullptr : &stack.back().composed;
    f.composed = parent ? compose_maps(*parent, m) : m;
    double al[kMaxDim];
    if (sm.all_similarity) {
      double lr = sm.ratio_groups[0].log_ratio;
      for (const auto& g : sm.ratio_groups) {
        if (digit >= g.first && digit < g.first + g.count) {
          lr = g.log_ratio;
          break;
        }
      }
      for (int a = 0; a < dim; ++a) al[a] = lr;
    } else {
      axis_logs(m, dim, al);
    }
    for (int a = 0; a < dim; ++a)
      f.axes[a] = (parent ? stack.back().axes[a] : 0.0) + al[a];
    stack.push_back(std::move(f));
    digits.push_back(digit);
  };

  push(1);
  while (!stack.empty()) {
    Frame& top = stack.back();
    double logR = reduce_max(top.axes, dim);
    if (logR <= log_b) {
      if (++emitted > limit) {
        throw LimitExceeded("cutset enumeration exceeded limit", emitted - 1);
      }
      CutsetEntry e{std::span<const std::uint32_t>(digits.data(),
                                                   digits.size()),
                    logR, reduce_min(top.axes, dim), &top.composed};
      visit(e);
      // Advance: next sibling, or pop until one exists.
      while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.digit < f.map_count) {
          std::uint32_t next = f.digit + 1;
          stack.pop_back();
          digits.pop_back();
          push(next);
          break;
        }
        stack.pop_back();
        digits.pop_back();
      }
    } else {
      push(1);  // descend
    }
  }
}

Cutset cutset(const LayerSystem& sys, double b, std::uint64_t limit) {
  Cutset cs;
  cs.b = b;
  cs.log_b = std::log(b);
  std::vector<ContractionMap> maps;
  cutset_visit(sys, cs.log_b, limit, [&](const CutsetEntry& e) {
    Word w;
    w.start = 1;
    w.digits.assign(e.digits.begin(), e.digits.end());
    w.logR = e.logR;
    w.logr = e.logr;
    cs.words.push_back(std::move(w));
    maps.push_back(*e.composed);
  });
  cs.maps = dedup_maps(std::move(maps));
  return cs;
}

std::vector<ContractionMap> dedup_maps(std::vector<ContractionMap> maps,
                                       double rel_tol) {
  if (maps.empty()) return maps;
  const int dim = maps[0].dim;
  std::vector<std::size_t> order(maps.size());
  std::iota(order.begin(), order.end(), 0);
  auto key_less = [&](std::size_t ia, std::size_t ib) {
    const ContractionMap& a = maps[ia];
    const ContractionMap& b = maps[ib];
    Vec ta = a.offset(), tb = b.offset();
    for (int i = 0; i < dim; ++i) {
      if (ta[i] != tb[i]) return ta[i] < tb[i];
    }
    for (int i = 0; i < dim; ++i) {
      double fa = a.axis_factor(i), fb = b.axis_factor(i);
      if (fa != fb) return fa < fb;
    }
    return false;
  };
  std::stable_sort(order.begin(), order.end(), key_less);
  std::vector<ContractionMap> out;
  out.reserve(maps.size());
  for (std::size_t idx : order) {
    if (!out.empty() && maps_equal(out.back(), maps[idx], rel_tol)) continue;
    out.push_back(maps[idx]);
  }
  return out;
}

CutsetCount cutset_count(const LayerSystem& sys, double log_b,
                         std::uint64_t limit) {
  if (!(log_b < 0.0)) throw Error("cutset scale b must lie in (0,1)");
  CutsetCount res;

  // Uniform-contraction path: every length-m word shares logR, so the cutset
  // is the full product space at the first depth whose cumulative bound
  // drops to log_b.
  {
    double cum = 0.0;  // plain adds: must tie-match the enumeration path
    KahanSum log_count;
    std::uint64_t prod = 1;
    bool prod_exact = true;
    bool uniform = true;
    for (std::uint64_t m = 1; m <= 2000000; ++m) {
      LayerSummary s = sys.layer_summary(m);
      if (!s.uniform_log_ratio) {
        uniform = false;
        break;
      }
      cum += *s.uniform_log_ratio;
      log_count.add(std::log(static_cast<double>(s.map_count)));
      if (prod_exact && prod > UINT64_MAX / s.map_count) {
        prod_exact = false;
      } else if (prod_exact) {
        prod *= s.map_count;
      }
      if (cum <= log_b) {
        res.log_words = log_count.value();
        res.closed_form = true;
        res.depth_min = res.depth_max = m;
        res.exact_count = prod_exact;
        if (prod_exact) res.words = prod;
        break;
      }
    }
    if (uniform && res.closed_form) {
      // Map dedup still needs enumeration; do it when affordable.
      if (res.exact_count && res.words <= limit) {
        std::vector<ContractionMap> maps;
        maps.reserve(res.words);
        cutset_visit(sys, log_b, limit,
                     [&](const CutsetEntry& e) { maps.push_back(*e.composed); });
        res.maps = dedup_maps(std::move(maps)).size();
      }
      return res;
    }
    if (uniform && !res.closed_form)
      throw Error("cutset depth exceeds 2e6 layers");
  }

  // General path: enumerate.
  std::uint64_t words = 0;
  std::uint64_t dmin = UINT64_MAX, dmax = 0;
  std::vector<ContractionMap> maps;
  cutset_visit(sys, log_b, limit, [&](const CutsetEntry& e) {
    ++words;
    dmin = std::min<std::uint64_t>(dmin, e.digits.size());
    dmax = std::max<std::uint64_t>(dmax, e.digits.size());
    maps.push_back(*e.composed);
  });
  res.words = words;
  res.exact_count = true;
  res.log_words = std::log(static_cast<double>(words));
  res.depth_min = dmin;
  res.depth_max = dmax;
  res.maps = dedup_maps(std::move(maps)).size();
  return res;
}

}  // namespace moran
