#include "moranifs/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "moranifs/kernels.hpp"
#include "moranifs/words.hpp"

namespace moran {

namespace {

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += sqr(x[i] - mx);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

MoranEvaluator::MoranEvaluator(const LayerSystem& sys, std::uint64_t kmax)
    : kmax_(kmax) {
  a_hi_.resize(kmax + 1, 0.0);
  a_lo_.resize(kmax + 1, 0.0);
  b_hi_.resize(kmax + 1, 0.0);
  b_lo_.resize(kmax + 1, 0.0);
  mixed_before_.resize(kmax + 1, 0);
  offsets_.push_back(0);
  DoubleDouble a, b;
  for (std::uint64_t n = 1; n <= kmax; ++n) {
    LayerSummary s = sys.layer_summary(n);
    if (!s.all_similarity)
      throw Error("Moran equation needs similarity layers; layer " +
                  std::to_string(n) + " is not");
    if (s.uniform_log_ratio) {
      a.add(std::log(static_cast<double>(s.map_count)));
      b.add(*s.uniform_log_ratio);
      mixed_before_[n] = mixed_before_[n - 1];
    } else {
      for (const auto& g : s.ratio_groups) {
        lr_.push_back(g.log_ratio);
        mult_.push_back(static_cast<double>(g.count));
      }
      offsets_.push_back(lr_.size());
      mixed_before_[n] = mixed_before_[n - 1] + 1;
    }
    a_hi_[n] = a.hi;
    a_lo_[n] = a.lo;
    b_hi_[n] = b.hi;
    b_lo_[n] = b.lo;
  }
}

bool MoranEvaluator::linear_prefix(std::uint64_t k) const {
  return mixed_before_[k] == 0;
}

double MoranEvaluator::linear_root(std::uint64_t k) const {
  double a = a_hi_[k] + a_lo_[k];
  double b = b_hi_[k] + b_lo_[k];
  return -a / b;
}

double MoranEvaluator::eval(std::uint64_t k, double s) const {
  double lin = (a_hi_[k] + s * b_hi_[k]) + (a_lo_[k] + s * b_lo_[k]);
  std::uint32_t mixed = mixed_before_[k];
  if (mixed == 0) return lin;
  double ml = kernels::moran_mixed_sum(s, lr_.data(), mult_.data(),
                                       offsets_.data(), mixed);
  return lin + ml;
}

double MoranEvaluator::derivative(std::uint64_t k, double s) const {
  double d = b_hi_[k] + b_lo_[k];
  for (std::uint32_t i = 0; i < mixed_before_[k]; ++i) {
    double num = 0.0, den = 0.0, m = -HUGE_VAL;
    for (std::size_t j = offsets_[i]; j < offsets_[i + 1]; ++j)
      m = std::max(m, s * lr_[j]);
    for (std::size_t j = offsets_[i]; j < offsets_[i + 1]; ++j) {
      double e = mult_[j] * std::exp(s * lr_[j] - m);
      num += e * lr_[j];
      den += e;
    }
    d += num / den;
  }
  return d;
}

double MoranEvaluator::log_n_sum(std::uint64_t k) const {
  return eval(k, 0.0);
}

double solve_sk(const MoranEvaluator& ev, std::uint64_t k, int ambient_dim) {
  if (k < 1 || k > ev.kmax()) throw Error("solve_sk: k out of range");
  constexpr double kResidualTol = 1e-10;
  constexpr double kWidthTol = 1e-12;

  if (ev.linear_prefix(k)) {
    double s = ev.linear_root(k);
    if (std::abs(ev.eval(k, s)) <= kResidualTol) return s;
    // fall through to the bracketed solve from a tight start
  }

  // Bracket: F(0) = sum log N > 0 and F decreases strictly; extend the upper
  // end past the ambient dimension if the root lies above it.
  double lo = 0.0;
  double flo = ev.eval(k, lo);
  double hi = static_cast<double>(ambient_dim);
  double fhi = ev.eval(k, hi);
  while (fhi > 0.0 && hi < 64.0) {
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = ev.eval(k, hi);
  }
  if (fhi > 0.0) throw Error("Moran equation root exceeds bracket cap");
  if (fhi == 0.0) return hi;
  if (flo == 0.0) return lo;

  double best = lo, fbest = flo;
  for (int iter = 0; iter < 200; ++iter) {
    // Secant proposal clipped into the bracket, bisection fallback.
    double mid;
    double span = hi - lo;
    double denom = fhi - flo;
    if (denom != 0.0) {
      mid = lo - flo * span / denom;
      double margin = 0.01 * span;
      if (!(mid > lo + margin && mid < hi - margin)) mid = lo + 0.5 * span;
    } else {
      mid = lo + 0.5 * span;
    }
    double fmid = ev.eval(k, mid);
    if (std::abs(fmid) < std::abs(fbest)) {
      best = mid;
      fbest = fmid;
    }
    if (fmid > 0.0) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
      fhi = fmid;
    }
    if (std::abs(fbest) <= kResidualTol && hi - lo <= kWidthTol) break;
    if (hi - lo <= 4e-16 * std::max(1.0, hi)) break;
  }
  return best;
}

double solve_sk(const LayerSystem& sys, std::uint64_t k) {
  MoranEvaluator ev(sys, k);
  return solve_sk(ev, k, sys.dim());
}

DimHEstimate hausdorff_dim(const LayerSystem& sys, std::uint64_t kmax) {
  if (kmax < 1) throw Error("hausdorff_dim: kmax must be >= 1");
  MoranEvaluator ev(sys, kmax);

  // Sample set: dense head, geometric tail, plus the provider's natural
  // depths (block boundaries and the like).
  std::set<std::uint64_t> ks;
  for (std::uint64_t k = 1; k <= std::min<std::uint64_t>(kmax, 256); ++k)
    ks.insert(k);
  double g = 256.0;
  while (g < static_cast<double>(kmax)) {
    g *= 1.03;
    std::uint64_t gi = static_cast<std::uint64_t>(g);
    if (gi <= kmax) ks.insert(gi);
  }
  ks.insert(kmax);
  for (std::uint64_t k : sys.suggested_depths(kmax)) ks.insert(k);

  DimHEstimate out;
  out.s_seq.reserve(ks.size());
  const int d = sys.dim();
  for (std::uint64_t k : ks) {
    double s = solve_sk(ev, k, d);
    if (s > static_cast<double>(d) + 1e-9) out.root_exceeds_dim = true;
    out.s_seq.push_back({k, s});
  }

  // Windowed lim inf: min over samples in the trailing half (by k value).
  double wlo = static_cast<double>(kmax) / 2.0;
  out.window_lo_k = wlo;
  double mn = HUGE_VAL;
  std::vector<double> xs, ys;
  for (const auto& [k, s] : out.s_seq) {
    if (static_cast<double>(k) >= wlo) {
      mn = std::min(mn, s);
      xs.push_back(std::log(static_cast<double>(k)));
      ys.push_back(s);
    }
  }
  out.dimH_est = mn;
  out.trend_slope = ls_slope(xs, ys);
  return out;
}

std::vector<double> natural_log_b_grid(const LayerSystem& sys,
                                       std::uint64_t max_depth) {
  std::vector<std::uint64_t> depths = sys.suggested_depths(max_depth);
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
  std::vector<double> grid;
  grid.reserve(depths.size());
  // Plain sequential accumulation: cutset enumeration and counting use the
  // same add sequence, so ties at natural scales resolve identically.
  double cum = 0.0;
  std::uint64_t at = 0;
  for (std::uint64_t m : depths) {
    while (at < m) {
      ++at;
      cum += sys.layer_summary(at).log_c2;
    }
    grid.push_back(cum);
  }
  return grid;
}

BoxDimEstimate box_dim_formula(const LayerSystem& sys,
                               const std::vector<double>& log_b_grid,
                               std::uint64_t limit) {
  for (std::size_t i = 0; i + 1 < log_b_grid.size(); ++i) {
    if (!(log_b_grid[i + 1] < log_b_grid[i]))
      throw Error("box-dimension grid must be strictly decreasing");
  }
  BoxDimEstimate out;
  for (double lb : log_b_grid) {
    if (!(lb < 0.0)) throw Error("box-dimension grid values must be < 1");
    BoxDimSample smp;
    smp.neg_log_b = -lb;
    try {
      CutsetCount c = cutset_count(sys, lb, limit);
      // Dedup reduces to the word count on the closed-form path; when the
      // cutset was small enough to enumerate we verified it.
      double log_maps = c.log_words;
      if (c.exact_count && c.maps > 0) {
        log_maps = std::log(static_cast<double>(c.maps));
        smp.dedup_verified = true;
      }
      smp.log_count = log_maps;
      smp.closed_form = c.closed_form;
      smp.ratio = smp.log_count / smp.neg_log_b;
    } catch (const LimitExceeded&) {
      out.complete = false;
      break;
    }
    out.samples.push_back(smp);
  }
  out.completed_points = out.samples.size();
  if (!out.samples.empty()) {
    std::size_t start = out.samples.size() / 2;
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (std::size_t i = start; i < out.samples.size(); ++i) {
      lo = std::min(lo, out.samples[i].ratio);
      hi = std::max(hi, out.samples[i].ratio);
    }
    out.lower = lo;
    out.upper = hi;
  }
  return out;
}

BoxCountResult box_count_empirical(const PointCloud& cloud,
                                   const std::vector<double>& deltas) {
  BoxCountResult out;
  std::vector<double> xs, ys;
  std::vector<std::int64_t> keys[kMaxDim];
  for (double delta : deltas) {
    BoxCountEntry e;
    e.delta = delta;
    if (!(delta > 0.0)) {
      e.reason = "delta must be positive";
      out.entries.push_back(e);
      continue;
    }
    if (delta < 2.0 * cloud.scale) {
      e.reason = "delta finer than twice the cloud scale";
      out.entries.push_back(e);
      continue;
    }
    const std::size_t n = cloud.size();
    for (int a = 0; a < cloud.dim; ++a) {
      keys[a].resize(n);
      kernels::cell_keys(cloud.axes[a].data(), n, 0.0, 1.0 / delta,
                         keys[a].data());
    }
    std::vector<std::array<std::int64_t, kMaxDim>> cells(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::array<std::int64_t, kMaxDim> c{0, 0, 0};
      for (int a = 0; a < cloud.dim; ++a) c[a] = keys[a][i];
      cells[i] = c;
    }
    std::sort(cells.begin(), cells.end());
    e.count = static_cast<std::uint64_t>(
        std::unique(cells.begin(), cells.end()) - cells.begin());
    e.accepted = true;
    out.entries.push_back(e);
    xs.push_back(-std::log(delta));
    ys.push_back(std::log(static_cast<double>(e.count)));
  }
  out.slope = ls_slope(xs, ys);
  return out;
}

std::string measure_class_name(MeasureClass c) {
  switch (c) {
    case MeasureClass::Zero:
      return "Zero";
    case MeasureClass::PositiveFinite:
      return "PositiveFinite";
    case MeasureClass::Infinite:
      return "Infinite";
    default:
      return "Inconclusive";
  }
}

MeasureClassResult measure_class(const LayerSystem& sys, double s,
                                 const MeasureClassConfig& cfg) {
  MeasureClassResult out;
  out.s = s;
  const std::uint64_t nmax = std::max<std::uint64_t>(cfg.nmax, 16);

  // log Pi_n for n <= nmax; witness subsampled geometrically.
  std::vector<double> full(nmax + 1, 0.0);
  KahanSum acc;
  for (std::uint64_t n = 1; n <= nmax; ++n) {
    LayerSummary sm = sys.layer_summary(n);
    if (!sm.all_similarity)
      throw Error("measure_class needs similarity layers");
    double term;
    if (sm.uniform_log_ratio) {
      term = std::log(static_cast<double>(sm.map_count)) +
             s * (*sm.uniform_log_ratio);
    } else {
      double m = -HUGE_VAL;
      for (const auto& g : sm.ratio_groups) m = std::max(m, s * g.log_ratio);
      double inner = 0.0;
      for (const auto& g : sm.ratio_groups)
        inner += static_cast<double>(g.count) * std::exp(s * g.log_ratio - m);
      term = m + std::log(inner);
    }
    acc.add(term);
    full[n] = acc.value();
  }
  std::uint64_t step = 1;
  for (std::uint64_t n = 1; n <= nmax; n += step) {
    out.witness.emplace_back(n, full[n]);
    if (out.witness.size() > 128) step = std::max<std::uint64_t>(step * 2, 1);
  }
  if (out.witness.back().first != nmax) out.witness.emplace_back(nmax, full[nmax]);
  out.final_value = full[nmax];

  // Joint trailing-window fit L ~ alpha*n + beta*ln n + c. The two-regressor
  // form separates a slow polylog drift from a tiny linear one (a lone ln-n
  // fit reads any linear bias as divergence).
  {
    double sx = 0, sz = 0, sy = 0, sxx = 0, szz = 0, sxz = 0, sxy = 0, szy = 0;
    double m = 0;
    for (std::uint64_t n = nmax / 2; n <= nmax; ++n) {
      double x = static_cast<double>(n);
      double z = std::log(x);
      double yv = full[n];
      sx += x;
      sz += z;
      sy += yv;
      m += 1.0;
    }
    double mx = sx / m, mz = sz / m, my = sy / m;
    for (std::uint64_t n = nmax / 2; n <= nmax; ++n) {
      double x = static_cast<double>(n) - mx;
      double z = std::log(static_cast<double>(n)) - mz;
      double yv = full[n] - my;
      sxx += x * x;
      szz += z * z;
      sxz += x * z;
      sxy += x * yv;
      szy += z * yv;
    }
    double det = sxx * szz - sxz * sxz;
    if (std::abs(det) > 1e-12 * sxx * szz || det != 0.0) {
      out.slope_n = (sxy * szz - szy * sxz) / det;
      out.slope_log_n = (szy * sxx - sxy * sxz) / det;
    }
  }

  double range_lo = HUGE_VAL, range_hi = -HUGE_VAL;
  for (std::uint64_t n = 1; n <= nmax; ++n) {
    range_lo = std::min(range_lo, full[n]);
    range_hi = std::max(range_hi, full[n]);
  }

  if (out.slope_n > cfg.slope_tol) {
    out.verdict = MeasureClass::Infinite;
  } else if (out.slope_n < -cfg.slope_tol) {
    out.verdict = MeasureClass::Zero;
  } else if (out.slope_log_n > cfg.log_slope_tol) {
    out.verdict = MeasureClass::Infinite;
  } else if (out.slope_log_n < -cfg.log_slope_tol) {
    out.verdict = MeasureClass::Zero;
  } else if (range_hi - range_lo < cfg.band_log) {
    out.verdict = MeasureClass::PositiveFinite;
  } else {
    out.verdict = MeasureClass::Inconclusive;
  }
  return out;
}

DimensionDiagnostics dimension_diagnostics(const LayerSystem& sys,
                                           std::uint64_t depth) {
  DimensionDiagnostics d;
  d.checked_depth = depth;
  double min_lr = 0.0;
  std::vector<double> tail_lr;
  KahanSum cum_log_r;
  double prev_cum = 0.0;
  for (std::uint64_t n = 1; n <= depth; ++n) {
    LayerSummary s = sys.layer_summary(n);
    double layer_min = s.log_c1;
    min_lr = std::min(min_lr, layer_min);
    if (n + 32 >= depth) tail_lr.push_back(layer_min);
    if (!s.uniform_log_ratio) d.equal_ratio_per_layer = false;
    if (s.uniform_log_ratio) {
      if (n > 1 && prev_cum < 0.0)
        d.contra_ra_last = *s.uniform_log_ratio / prev_cum;
      cum_log_r.add(*s.uniform_log_ratio);
      prev_cum = cum_log_r.value();
    }
  }
  d.r0_observed = std::exp(min_lr);
  d.r0_positive_observed = min_lr > -700.0;
  // Geometric decline of the per-layer minimum marks r0 = 0 behavior.
  if (tail_lr.size() >= 8) {
    double first = tail_lr.front(), last = tail_lr.back();
    if (last < first - 4.0) d.r0_suspected_zero = true;
  }
  if (d.equal_ratio_per_layer)
    d.contra_ra_observed = std::abs(d.contra_ra_last) < 0.05;
  return d;
}

}  // namespace moran
