#include "moranifs/system.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace moran {

void Layer::validate() const {
  if (maps.size() < 2) throw Error("a layer needs at least 2 maps");
  if (!(c1 > 0.0 && c1 <= c2 && c2 < 1.0))
    throw Error("layer contraction bounds must satisfy 0 < c1 <= c2 < 1");
  for (const auto& m : maps) m.validate();
}

Layer make_layer(std::uint64_t index, std::vector<ContractionMap> maps) {
  Layer l;
  l.index = index;
  l.maps = std::move(maps);
  if (l.maps.empty()) throw Error("a layer needs at least 2 maps");
  l.c1 = l.maps[0].min_factor();
  l.c2 = l.maps[0].max_factor();
  for (const auto& m : l.maps) {
    l.c1 = std::min(l.c1, m.min_factor());
    l.c2 = std::max(l.c2, m.max_factor());
  }
  l.validate();
  return l;
}

LayerSummary summarize_maps(const std::vector<ContractionMap>& maps) {
  LayerSummary s;
  s.map_count = maps.size();
  double c1 = maps[0].min_factor();
  double c2 = maps[0].max_factor();
  s.all_similarity = true;
  bool uniform = true;
  for (const auto& m : maps) {
    c1 = std::min(c1, m.min_factor());
    c2 = std::max(c2, m.max_factor());
    if (m.kind != MapKind::Similarity) s.all_similarity = false;
    if (m.max_factor() != maps[0].max_factor() ||
        m.min_factor() != m.max_factor()) {
      uniform = false;
    }
  }
  s.log_c1 = std::log(c1);
  s.log_c2 = std::log(c2);
  if (uniform) s.uniform_log_ratio = std::log(maps[0].max_factor());
  if (s.all_similarity) {
    // Contiguous runs of equal ratios.
    std::uint64_t i = 0;
    while (i < maps.size()) {
      std::uint64_t j = i;
      while (j < maps.size() && maps[j].ratio == maps[i].ratio) ++j;
      s.ratio_groups.push_back(
          {std::log(maps[i].ratio), j - i, i + 1});
      i = j;
    }
  }
  return s;
}

std::vector<std::uint64_t> default_suggested_depths(std::uint64_t max_depth) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t m = 1; m <= std::min<std::uint64_t>(max_depth, 32); ++m)
    out.push_back(m);
  double m = 32.0;
  while (true) {
    m *= 1.25;
    std::uint64_t mi = static_cast<std::uint64_t>(m);
    if (mi > max_depth) break;
    if (out.empty() || mi != out.back()) out.push_back(mi);
  }
  if (out.back() != max_depth) out.push_back(max_depth);
  return out;
}

std::vector<std::uint64_t> SystemBackend::suggested_depths(
    std::uint64_t max_depth) const {
  return default_suggested_depths(max_depth);
}

LayerSystem::LayerSystem(std::shared_ptr<const SystemBackend> backend,
                         std::uint64_t shift_offset)
    : backend_(std::move(backend)), shift_(shift_offset) {
  ambient_ = backend_->ambient();
}

int LayerSystem::dim() const { return backend_->dim(); }

const Box& LayerSystem::ambient() const { return ambient_; }

LayerSummary LayerSystem::layer_summary(std::uint64_t n) const {
  return backend_->summary(n + shift_);
}

ContractionMap LayerSystem::map_at(std::uint64_t n, std::uint32_t j) const {
  return backend_->map(n + shift_, j);
}

Layer LayerSystem::layer(std::uint64_t n) const {
  LayerSummary s = backend_->summary(n + shift_);
  if (s.map_count > (1u << 24)) {
    throw Error("layer too large to materialize; use layer_summary");
  }
  std::vector<ContractionMap> maps;
  maps.reserve(s.map_count);
  for (std::uint32_t j = 1; j <= s.map_count; ++j)
    maps.push_back(backend_->map(n + shift_, j));
  Layer l = make_layer(n, std::move(maps));
  return l;
}

LayerSystem LayerSystem::shift(std::uint64_t k) const {
  return LayerSystem(backend_, shift_ + k);
}

std::optional<Box> LayerSystem::separation_box(std::uint64_t n) const {
  return backend_->separation_box(n + shift_);
}

std::vector<std::uint64_t> LayerSystem::suggested_depths(
    std::uint64_t max_depth) const {
  if (shift_ == 0) return backend_->suggested_depths(max_depth);
  // Shifted views fall back to the generic ramp.
  return default_suggested_depths(max_depth);
}

std::string LayerSystem::describe() const {
  std::string d = backend_->describe();
  if (shift_ > 0) d += " (shifted by " + std::to_string(shift_) + ")";
  return d;
}

AmbientCheck LayerSystem::check_ambient(std::uint64_t depth,
                                        double slack) const {
  AmbientCheck res;
  res.checked_depth = depth;
  const Box& X = ambient_;
  double scale = 0.0;
  for (int a = 0; a < dim(); ++a)
    scale = std::max(scale, std::abs(X.lo[a]) + std::abs(X.hi[a]));
  scale = std::max(scale, 1.0);
  KahanSum logc2;
  for (std::uint64_t n = 1; n <= depth; ++n) {
    LayerSummary s = layer_summary(n);
    logc2.add(s.log_c2);
    // Containment: corners of X map inside X. Cheap and exact for the
    // supported affine forms; cap per-layer work on huge layers.
    std::uint64_t check_count = std::min<std::uint64_t>(s.map_count, 64);
    for (std::uint64_t j = 1; j <= check_count; ++j) {
      ContractionMap m = map_at(n, static_cast<std::uint32_t>(j));
      const int d = dim();
      const int corners = 1 << d;
      for (int c = 0; c < corners; ++c) {
        Vec p = vec0();
        for (int a = 0; a < d; ++a) p[a] = (c >> a) & 1 ? X.hi[a] : X.lo[a];
        Vec q = m.apply(p);
        if (!X.contains_point(q, d, slack * scale)) {
          res.containment_ok = false;
          res.failed_layer = n;
          res.failed_map = static_cast<std::uint32_t>(j);
          res.epsilon_c = -logc2.value() / static_cast<double>(n);
          return res;
        }
      }
    }
  }
  res.epsilon_c = -logc2.value() / static_cast<double>(depth);
  return res;
}

std::uint64_t LayerSystem::depth_for_scale(double log_eps) const {
  KahanSum acc;
  std::uint64_t n = 0;
  while (true) {
    ++n;
    acc.add(layer_summary(n).log_c2);
    if (acc.value() <= log_eps) return n;
    if (n > 1000000) {
      throw Error("scale depth exceeds 1e6 layers; contraction too weak");
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

class ExplicitBackend final : public SystemBackend {
 public:
  ExplicitBackend(int dim, Box ambient, std::vector<Layer> prefix,
                  std::vector<Layer> cycle)
      : dim_(dim),
        ambient_(ambient),
        prefix_(std::move(prefix)),
        cycle_(std::move(cycle)) {
    if (cycle_.empty()) throw Error("explicit provider needs a nonempty cycle");
    for (const auto& l : prefix_) cache_summary(l);
    for (const auto& l : cycle_) cache_summary(l);
  }

  int dim() const override { return dim_; }
  Box ambient() const override { return ambient_; }

  LayerSummary summary(std::uint64_t n) const override {
    return summaries_[slot(n)];
  }

  ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
    const Layer& l = layer_ref(n);
    if (j < 1 || j > l.maps.size())
      throw Error("symbol out of range for layer " + std::to_string(n));
    return l.maps[j - 1];
  }

  std::string describe() const override {
    return "explicit(" + std::to_string(prefix_.size()) + "+cycle " +
           std::to_string(cycle_.size()) + ")";
  }

  std::vector<std::uint64_t> suggested_depths(
      std::uint64_t max_depth) const override {
    // Period boundaries give the exact recurrent subsequence.
    std::vector<std::uint64_t> out;
    const std::uint64_t p = prefix_.size();
    const std::uint64_t c = cycle_.size();
    for (std::uint64_t m = 1; m <= std::min<std::uint64_t>(max_depth, 16); ++m)
      out.push_back(m);
    std::uint64_t m = p + c;
    while (m <= max_depth && out.size() < 4096) {
      if (m > out.back()) out.push_back(m);
      m += c;
      if (out.size() > 64 && c < max_depth / 128) m += c * (out.size() / 32);
    }
    if (out.back() != max_depth) out.push_back(max_depth);
    return out;
  }

 private:
  std::size_t slot(std::uint64_t n) const {
    if (n <= prefix_.size()) return n - 1;
    return prefix_.size() +
           static_cast<std::size_t>((n - prefix_.size() - 1) % cycle_.size());
  }
  const Layer& layer_ref(std::uint64_t n) const {
    std::size_t s = slot(n);
    return s < prefix_.size() ? prefix_[s] : cycle_[s - prefix_.size()];
  }
  void cache_summary(const Layer& l) {
    summaries_.push_back(summarize_maps(l.maps));
  }

  int dim_;
  Box ambient_;
  std::vector<Layer> prefix_;
  std::vector<Layer> cycle_;
  std::vector<LayerSummary> summaries_;
};

}  // namespace

LayerSystem make_explicit_periodic(int dim, Box ambient,
                                   std::vector<Layer> prefix,
                                   std::vector<Layer> cycle) {
  for (auto& l : prefix) l.validate();
  for (auto& l : cycle) l.validate();
  return LayerSystem(std::make_shared<ExplicitBackend>(
      dim, ambient, std::move(prefix), std::move(cycle)));
}

// ---------------------------------------------------------------------------
// Weights

WeightSequence WeightSequence::uniform() { return WeightSequence(); }

WeightSequence WeightSequence::ratio_power(double s) {
  WeightSequence w;
  w.kind_ = WeightKind::RatioPower;
  w.s_ = s;
  return w;
}

WeightSequence WeightSequence::explicit_periodic(
    std::vector<std::vector<double>> prefix,
    std::vector<std::vector<double>> cycle) {
  if (cycle.empty()) throw Error("weight cycle must be nonempty");
  auto check = [](const std::vector<double>& row) {
    double sum = 0.0;
    for (double p : row) {
      if (!(p > 0.0)) throw Error("weights must be strictly positive");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw Error("weight vector must sum to 1 within 1e-12");
  };
  for (const auto& r : prefix) check(r);
  for (const auto& r : cycle) check(r);
  WeightSequence w;
  w.kind_ = WeightKind::ExplicitPeriodic;
  w.prefix_ = std::make_shared<const std::vector<std::vector<double>>>(
      std::move(prefix));
  w.cycle_ = std::make_shared<const std::vector<std::vector<double>>>(
      std::move(cycle));
  return w;
}

WeightSequence WeightSequence::shift(std::uint64_t k) const {
  WeightSequence w = *this;
  w.shift_ += k;
  return w;
}

const std::vector<double>* WeightSequence::explicit_row(
    std::uint64_t n) const {
  std::uint64_t idx = n + shift_;
  if (idx <= prefix_->size()) return &(*prefix_)[idx - 1];
  return &(*cycle_)[(idx - prefix_->size() - 1) % cycle_->size()];
}

std::vector<double> WeightSequence::probs(const LayerSystem& sys,
                                          std::uint64_t n) const {
  LayerSummary s = sys.layer_summary(n);
  std::vector<double> p;
  switch (kind_) {
    case WeightKind::Uniform:
      p.assign(s.map_count, 1.0 / static_cast<double>(s.map_count));
      break;
    case WeightKind::ExplicitPeriodic: {
      const auto* row = explicit_row(n);
      if (row->size() != s.map_count)
        throw Error("weight vector length mismatch at layer " +
                    std::to_string(n));
      p = *row;
      break;
    }
    case WeightKind::RatioPower: {
      if (!s.all_similarity)
        throw Error("ratio-power weights need similarity layers");
      p.reserve(s.map_count);
      double z = 0.0;
      for (const auto& g : s.ratio_groups)
        z += static_cast<double>(g.count) * std::exp(s_ * g.log_ratio);
      for (const auto& g : s.ratio_groups) {
        double w = std::exp(s_ * g.log_ratio) / z;
        for (std::uint64_t i = 0; i < g.count; ++i) p.push_back(w);
      }
      break;
    }
  }
  return p;
}

double WeightSequence::log_prob(const LayerSystem& sys, std::uint64_t n,
                                std::uint32_t j) const {
  LayerSummary s = sys.layer_summary(n);
  if (j < 1 || j > s.map_count)
    throw Error("symbol out of range for layer " + std::to_string(n));
  switch (kind_) {
    case WeightKind::Uniform:
      return -std::log(static_cast<double>(s.map_count));
    case WeightKind::ExplicitPeriodic: {
      const auto* row = explicit_row(n);
      if (row->size() != s.map_count)
        throw Error("weight vector length mismatch at layer " +
                    std::to_string(n));
      return std::log((*row)[j - 1]);
    }
    case WeightKind::RatioPower: {
      if (!s.all_similarity)
        throw Error("ratio-power weights need similarity layers");
      double z = 0.0;
      double lr = 0.0;
      for (const auto& g : s.ratio_groups) {
        z += static_cast<double>(g.count) * std::exp(s_ * g.log_ratio);
        if (j >= g.first && j < g.first + g.count) lr = g.log_ratio;
      }
      return s_ * lr - std::log(z);
    }
  }
  throw Error("unreachable weight kind");
}

std::uint32_t WeightSequence::draw(const LayerSystem& sys, std::uint64_t n,
                                   double u) const {
  LayerSummary s = sys.layer_summary(n);
  const std::uint64_t N = s.map_count;
  switch (kind_) {
    case WeightKind::Uniform: {
      std::uint64_t j = static_cast<std::uint64_t>(u * static_cast<double>(N));
      if (j >= N) j = N - 1;
      return static_cast<std::uint32_t>(j + 1);
    }
    case WeightKind::ExplicitPeriodic: {
      const auto* row = explicit_row(n);
      double acc = 0.0;
      for (std::size_t j = 0; j < row->size(); ++j) {
        acc += (*row)[j];
        if (u < acc) return static_cast<std::uint32_t>(j + 1);
      }
      return static_cast<std::uint32_t>(row->size());
    }
    case WeightKind::RatioPower: {
      if (!s.all_similarity)
        throw Error("ratio-power weights need similarity layers");
      double z = 0.0;
      for (const auto& g : s.ratio_groups)
        z += static_cast<double>(g.count) * std::exp(s_ * g.log_ratio);
      double target = u * z;
      double acc = 0.0;
      for (const auto& g : s.ratio_groups) {
        double w = std::exp(s_ * g.log_ratio);
        double block = static_cast<double>(g.count) * w;
        if (target < acc + block) {
          std::uint64_t i = static_cast<std::uint64_t>((target - acc) / w);
          if (i >= g.count) i = g.count - 1;
          return static_cast<std::uint32_t>(g.first + i);
        }
        acc += block;
      }
      const auto& last = s.ratio_groups.back();
      return static_cast<std::uint32_t>(last.first + last.count - 1);
    }
  }
  throw Error("unreachable weight kind");
}

}  // namespace moran
