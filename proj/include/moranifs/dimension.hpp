#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moranifs/attractor.hpp"
#include "moranifs/system.hpp"

namespace moran {

// Evaluator for F_k(s) = sum_{i<=k} log(sum_j r_{i,j}^s). Layers with one
// shared ratio contribute log N_i + s log r_i and fold into compensated
// prefix sums, so F_k is O(#mixed layers in 1..k) per call; mixed layers go
// through the grouped logsumexp kernel.
class MoranEvaluator {
 public:
  MoranEvaluator(const LayerSystem& sys, std::uint64_t kmax);

  std::uint64_t kmax() const { return kmax_; }

  double eval(std::uint64_t k, double s) const;
  double derivative(std::uint64_t k, double s) const;
  double log_n_sum(std::uint64_t k) const;  // F_k(0)

  // True when layers 1..k have no mixed layer (F_k linear in s).
  bool linear_prefix(std::uint64_t k) const;
  // Root of the linear form; only valid when linear_prefix(k).
  double linear_root(std::uint64_t k) const;

 private:
  std::uint64_t kmax_;
  std::vector<double> a_hi_, a_lo_;  // prefix of log N over uniform layers
  std::vector<double> b_hi_, b_lo_;  // prefix of log r over uniform layers
  std::vector<std::uint32_t> mixed_before_;  // #mixed layers among 1..k
  std::vector<double> lr_;                   // flattened group log-ratios
  std::vector<double> mult_;                 // group multiplicities
  std::vector<std::size_t> offsets_;         // per mixed layer into lr_
};

// Root of F_k to |F_k(s_k)| <= 1e-10, reported to 1e-12 (bracketing with
// secant steps and bisection safeguards). Throws when layers 1..k are not
// all-similarity.
double solve_sk(const LayerSystem& sys, std::uint64_t k);
double solve_sk(const MoranEvaluator& ev, std::uint64_t k, int ambient_dim);

struct SkSample {
  std::uint64_t k;
  double s;
};

struct DimHEstimate {
  std::vector<SkSample> s_seq;
  double dimH_est = 0.0;        // min over the trailing window
  double window_lo_k = 0.0;     // window start (k >= kmax/2)
  double trend_slope = 0.0;     // LS slope of s_k against ln k in the window
  bool root_exceeds_dim = false;
};

// s_k for k = 1..kmax with geometric subsampling past 256, plus the
// provider's suggested depths (block boundaries, period multiples).
DimHEstimate hausdorff_dim(const LayerSystem& sys, std::uint64_t kmax);

struct BoxDimSample {
  double neg_log_b = 0.0;
  double log_count = 0.0;  // ln #A_b
  double ratio = 0.0;      // log_count / neg_log_b
  bool closed_form = false;
  bool dedup_verified = false;
};

struct BoxDimEstimate {
  std::vector<BoxDimSample> samples;
  double lower = 0.0;  // windowed inf over the last half
  double upper = 0.0;  // windowed sup
  bool complete = true;          // false when the limit cut the grid short
  std::size_t completed_points = 0;
};

// ln #A_b / (-ln b) on a strictly decreasing log-b grid.
BoxDimEstimate box_dim_formula(const LayerSystem& sys,
                               const std::vector<double>& log_b_grid,
                               std::uint64_t limit);

// Natural-scale grid: log b_m = sum_{i<=m} log c_{2,i} at the provider's
// suggested depths up to max_depth.
std::vector<double> natural_log_b_grid(const LayerSystem& sys,
                                       std::uint64_t max_depth);

struct BoxCountEntry {
  double delta = 0.0;
  std::uint64_t count = 0;
  bool accepted = false;
  std::string reason;  // set when refused
};

struct BoxCountResult {
  std::vector<BoxCountEntry> entries;
  double slope = 0.0;  // LS slope of ln N against -ln delta (accepted only)
};

// Occupied cells of the origin-anchored grid of side delta, per delta.
// Deltas finer than 2 * cloud.scale are refused (the grid must be coarser
// than the cloud's accuracy).
BoxCountResult box_count_empirical(const PointCloud& cloud,
                                   const std::vector<double>& deltas);

enum class MeasureClass { Zero, PositiveFinite, Infinite, Inconclusive };

std::string measure_class_name(MeasureClass c);

struct MeasureClassConfig {
  std::uint64_t nmax = 4096;
  double slope_tol = 1e-3;      // per-step trend threshold (vs n)
  double log_slope_tol = 0.05;  // threshold for the trend vs ln n
  double band_log = 13.815510557964274;  // ln(1e6)
};

struct MeasureClassResult {
  MeasureClass verdict = MeasureClass::Inconclusive;
  double s = 0.0;
  std::vector<std::pair<std::uint64_t, double>> witness;  // (n, log Pi_n)
  double slope_n = 0.0;
  double slope_log_n = 0.0;
  double final_value = 0.0;
};

// Classifies the trend of log Pi_n = sum_{i<=n} log(sum_j r_{i,j}^s)
// (Hausdorff-measure trichotomy under its hypotheses; the caller stamps
// those separately).
MeasureClassResult measure_class(const LayerSystem& sys, double s,
                                 const MeasureClassConfig& cfg = {});

struct DimensionDiagnostics {
  bool r0_positive_observed = true;   // inf r_{n,j} over checked depth
  double r0_observed = 0.0;           // exp of the observed min log ratio
  bool r0_suspected_zero = false;     // keeps decreasing geometrically
  bool equal_ratio_per_layer = true;  // r_{n,j} = r_n up to checked depth
  double contra_ra_last = 0.0;  // ln r_n / ln(r_1..r_{n-1}) at the last n
  bool contra_ra_observed = false;  // trending to 0 over the checked range
  std::uint64_t checked_depth = 0;
};

DimensionDiagnostics dimension_diagnostics(const LayerSystem& sys,
                                           std::uint64_t depth = 256);

// Full report for the CLI `dim` subcommand.
struct DimensionReport {
  DimHEstimate hausdorff;
  std::optional<BoxDimEstimate> box;
  std::optional<MeasureClassResult> measure;
  DimensionDiagnostics diagnostics;
};

}  // namespace moran
