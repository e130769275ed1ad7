#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "moranifs/common.hpp"
#include "moranifs/map.hpp"

namespace moran {

// Contiguous run of same-ratio similarity maps inside one layer; lets the
// dimension machinery handle layers with millions of maps (N_n = n^2+3 and
// friends) without materializing them.
struct RatioGroup {
  double log_ratio = 0.0;
  std::uint64_t count = 0;
  std::uint64_t first = 1;  // 1-based index of the group's first map
};

// Layer bounds live in log space: deep families have ratios like 2^(-2^n)
// that underflow doubles long before the math stops making sense.
struct LayerSummary {
  std::uint64_t map_count = 0;
  double log_c1 = 0.0;  // log of the min contraction factor over the layer
  double log_c2 = 0.0;  // log of the max contraction factor
  bool all_similarity = false;
  // Set when every map contracts isotropically by the same factor
  // (the r_{n,j} = r_n case).
  std::optional<double> uniform_log_ratio;
  std::vector<RatioGroup> ratio_groups;  // similarity layers only
};

// Materialized layer n with its ordered map list.
struct Layer {
  std::uint64_t index = 1;
  std::vector<ContractionMap> maps;
  double c1 = 0.0;
  double c2 = 0.0;

  void validate() const;
};

Layer make_layer(std::uint64_t index, std::vector<ContractionMap> maps);
LayerSummary summarize_maps(const std::vector<ContractionMap>& maps);

// Provider interface: a rule producing layer n for arbitrary n.
class SystemBackend {
 public:
  virtual ~SystemBackend() = default;
  virtual int dim() const = 0;
  virtual Box ambient() const = 0;
  virtual LayerSummary summary(std::uint64_t n) const = 0;
  virtual ContractionMap map(std::uint64_t n, std::uint32_t j) const = 0;
  virtual std::string describe() const = 0;
  // Open-set candidate V_n shipped with some built-in families.
  virtual std::optional<Box> separation_box(std::uint64_t) const {
    return std::nullopt;
  }
  // Depths at which natural-scale sampling should evaluate (block boundaries
  // for block-structured providers, period multiples for periodic ones).
  virtual std::vector<std::uint64_t> suggested_depths(
      std::uint64_t max_depth) const;
};

// Generic dense-head + geometric-tail depth ramp.
std::vector<std::uint64_t> default_suggested_depths(std::uint64_t max_depth);

struct AmbientCheck {
  bool containment_ok = true;
  std::uint64_t failed_layer = 0;
  std::uint32_t failed_map = 0;
  double epsilon_c = 0.0;  // (-sum log c2)/depth at the checked depth
  std::uint64_t checked_depth = 0;
};

// The whole layered system: immutable, cheap to copy, shareable across
// threads. `shift(k)` views the same backend starting at layer k+1.
class LayerSystem {
 public:
  LayerSystem() = default;
  explicit LayerSystem(std::shared_ptr<const SystemBackend> backend,
                       std::uint64_t shift_offset = 0);

  int dim() const;
  const Box& ambient() const;
  LayerSummary layer_summary(std::uint64_t n) const;
  ContractionMap map_at(std::uint64_t n, std::uint32_t j) const;  // j 1-based
  Layer layer(std::uint64_t n) const;
  LayerSystem shift(std::uint64_t k) const;
  std::uint64_t shift_offset() const { return shift_; }
  std::optional<Box> separation_box(std::uint64_t n) const;
  std::vector<std::uint64_t> suggested_depths(std::uint64_t max_depth) const;
  std::string describe() const;

  // Invariant checks from the system definition: image containment within
  // slack, and the finite-depth proxy for prod c_2 -> 0.
  AmbientCheck check_ambient(std::uint64_t depth = 64,
                             double slack = 1e-12) const;

  // Depth m at which cumulative max-contraction first drops below eps.
  std::uint64_t depth_for_scale(double log_eps) const;

  bool valid() const { return backend_ != nullptr; }

 private:
  std::shared_ptr<const SystemBackend> backend_;
  std::uint64_t shift_ = 0;
  Box ambient_{};
};

// ---------------------------------------------------------------------------
// Probability weights per layer.

enum class WeightKind { Uniform, ExplicitPeriodic, RatioPower };

class WeightSequence {
 public:
  WeightSequence() = default;

  static WeightSequence uniform();
  static WeightSequence ratio_power(double s);
  static WeightSequence explicit_periodic(
      std::vector<std::vector<double>> prefix,
      std::vector<std::vector<double>> cycle);

  WeightKind kind() const { return kind_; }
  double power() const { return s_; }

  // Full probability vector for layer n (small layers).
  std::vector<double> probs(const LayerSystem& sys, std::uint64_t n) const;

  // log p_{n,j} for one symbol.
  double log_prob(const LayerSystem& sys, std::uint64_t n,
                  std::uint32_t j) const;

  // Draw a 1-based symbol of layer n from a uniform variate; works off the
  // layer summary so huge layers never materialize.
  std::uint32_t draw(const LayerSystem& sys, std::uint64_t n, double u) const;

  WeightSequence shift(std::uint64_t k) const;

 private:
  WeightKind kind_ = WeightKind::Uniform;
  double s_ = 0.0;
  std::shared_ptr<const std::vector<std::vector<double>>> prefix_;
  std::shared_ptr<const std::vector<std::vector<double>>> cycle_;
  std::uint64_t shift_ = 0;

  const std::vector<double>* explicit_row(std::uint64_t n) const;
};

// Explicit provider with a periodic tail.
LayerSystem make_explicit_periodic(int dim, Box ambient,
                                   std::vector<Layer> prefix,
                                   std::vector<Layer> cycle);

}  // namespace moran
