#include "moranifs/families.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace moran {

namespace {

constexpr double kLn2 = 0.6931471805599453094;

// Smallest log-ratio a ContractionMap can still represent as a double.
constexpr double kMinRepresentableLog = -700.0;

LayerSummary uniform_similarity_summary(std::uint64_t count,
                                        double log_ratio) {
  LayerSummary s;
  s.map_count = count;
  s.log_c1 = log_ratio;
  s.log_c2 = log_ratio;
  s.all_similarity = true;
  s.uniform_log_ratio = log_ratio;
  s.ratio_groups.push_back({log_ratio, count, 1});
  return s;
}

void check_symbol(std::uint64_t n, std::uint32_t j, std::uint64_t count) {
  if (j < 1 || j > count)
    throw Error("symbol " + std::to_string(j) + " out of range for layer " +
                std::to_string(n));
}

double require_representable(double log_ratio, std::uint64_t n) {
  if (log_ratio < kMinRepresentableLog)
    throw Error("layer " + std::to_string(n) +
                " ratio underflows doubles; use log-space summaries");
  return std::exp(log_ratio);
}

Box box1(double lo, double hi) {
  Box b;
  b.lo = vec1(lo);
  b.hi = vec1(hi);
  return b;
}

Box box2(double lx, double ly, double hx, double hy) {
  Box b;
  b.lo = vec2(lx, ly);
  b.hi = vec2(hx, hy);
  return b;
}

// ---------------------------------------------------------------------------

class ConstantFamily final : public SystemBackend {
 public:
  ConstantFamily(double r, std::uint64_t count, std::vector<double> alphas)
      : r_(r), alphas_(std::move(alphas)) {
    if (!(r > 0.0 && r < 1.0)) throw Error("constant family: r not in (0,1)");
    if (count < 2) throw Error("constant family: N must be >= 2");
    if (alphas_.empty()) {
      // Evenly spread so that the images justify the unit interval.
      double span = (1.0 / r - 1.0) / static_cast<double>(count - 1);
      for (std::uint64_t j = 0; j < count; ++j)
        alphas_.push_back(static_cast<double>(j) * span);
    }
    if (alphas_.size() != count)
      throw Error("constant family: translations length differs from N");
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (double a : alphas_) {
      double fix = r_ * a / (1.0 - r_);  // fixed point of x -> r(x+a)
      lo = std::min(lo, fix);
      hi = std::max(hi, fix);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    ambient_ = box1(lo, hi);
  }

  int dim() const override { return 1; }
  Box ambient() const override { return ambient_; }

  LayerSummary summary(std::uint64_t) const override {
    LayerSummary s;
    s.map_count = alphas_.size();
    s.log_c1 = s.log_c2 = std::log(r_);
    s.all_similarity = true;
    s.uniform_log_ratio = std::log(r_);
    s.ratio_groups.push_back({std::log(r_), alphas_.size(), 1});
    return s;
  }

  ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
    check_symbol(n, j, alphas_.size());
    return ContractionMap::similarity(1, r_, vec1(alphas_[j - 1]));
  }

  std::optional<Box> separation_box(std::uint64_t) const override {
    return ambient_;
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "constant(r=" << r_ << ", N=" << alphas_.size() << ")";
    return os.str();
  }

 private:
  double r_;
  std::vector<double> alphas_;
  Box ambient_;
};

// 2D pair: an anisotropic diagonal map and a similarity.
class Ex51Family final : public SystemBackend {
 public:
  int dim() const override { return 2; }
  Box ambient() const override { return box2(0, 0, 1, 1); }

  LayerSummary summary(std::uint64_t) const override {
    LayerSummary s;
    s.map_count = 2;
    s.log_c1 = std::log(0.4);
    s.log_c2 = std::log(0.5);
    s.all_similarity = false;
    return s;
  }

  ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
    check_symbol(n, j, 2);
    if (j == 1) return ContractionMap::diagonal(2, vec2(0.5, 0.4), vec2(0, 0));
    return ContractionMap::similarity(2, 0.5, vec2(1, 1));
  }

  std::optional<Box> separation_box(std::uint64_t) const override {
    return box2(0, 0, 1, 1);
  }

  std::string describe() const override { return "ex51"; }
};

// Overlapping pair phi_{n,0} = x/2, phi_{n,1} = (x + rho^n/n)/2, or the
// separated psi twin with r_1 = rho/2, r_n = (n-1)rho/(2n).
class Ex53Family final : public SystemBackend {
 public:
  Ex53Family(double rho, bool psi_form) : rho_(rho), psi_(psi_form) {
    if (!(rho > 0.0 && rho <= 1.0))
      throw Error("ex53 family: rho not in (0,1]");
    double s = -std::log1p(-rho_ / 2.0);  // sum of rho^k/(2^k k)
    ambient_ = psi_ ? box1(0.0, 1.0) : box1(0.0, std::max(rho_, s));
  }

  int dim() const override { return 1; }
  Box ambient() const override { return ambient_; }

  LayerSummary summary(std::uint64_t n) const override {
    return uniform_similarity_summary(2, log_ratio(n));
  }

  ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
    check_symbol(n, j, 2);
    double r = require_representable(log_ratio(n), n);
    double alpha = 0.0;
    if (j == 2) {
      if (psi_) {
        alpha = 1.0;
      } else {
        alpha = std::exp(static_cast<double>(n) * std::log(rho_)) /
                static_cast<double>(n);
      }
    }
    return ContractionMap::similarity(1, r, vec1(alpha));
  }

  std::optional<Box> separation_box(std::uint64_t n) const override {
    if (psi_) return box1(0.0, rho_ / (2.0 - rho_));
    // (0, sum_{k>=1} rho^{n+k-1} / (2^k (n+k-1))), summed in exp-log form.
    double hi = 0.0;
    double lrho = std::log(rho_);
    for (std::uint64_t k = 1; k <= 2000; ++k) {
      double nm = static_cast<double>(n + k - 1);
      double e = nm * lrho - static_cast<double>(k) * kLn2 - std::log(nm);
      double term = std::exp(e);
      hi += term;
      if (term < hi * 1e-18) break;
    }
    return box1(0.0, hi);
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "ex53(rho=" << rho_ << ", form=" << (psi_ ? "psi" : "phi") << ")";
    return os.str();
  }

 private:
  double log_ratio(std::uint64_t n) const {
    if (!psi_) return -kLn2;
    if (n == 1) return std::log(rho_ / 2.0);
    double nn = static_cast<double>(n);
    return std::log(rho_ * (nn - 1.0) / (2.0 * nn));
  }

  double rho_;
  bool psi_;
  Box ambient_;
};

// 2D product: x-offsets shrink with the layer, y-offsets tile.
class Ex54Family final : public SystemBackend {
 public:
  int dim() const override { return 2; }
  Box ambient() const override { return box2(0, 0, 1, 1); }

  LayerSummary summary(std::uint64_t) const override {
    return uniform_similarity_summary(4, -kLn2);
  }

  ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
    check_symbol(n, j, 4);
    std::uint32_t i = (j - 1) & 1u;
    std::uint32_t jj = (j - 1) >> 1u;
    double ax = static_cast<double>(i) /
                (std::ldexp(1.0, static_cast<int>(std::min<std::uint64_t>(
                                     n, 1000))) *
                 static_cast<double>(n));
    double ay = static_cast<double>(jj) / 2.0;
    return ContractionMap::similarity(2, 0.5, vec2(ax, ay));
  }

  std::optional<Box> separation_box(std::uint64_t n) const override {
    // x-range (0, sum_k 2^{-(n+2k-1)}/(n+k-1)), y-range (0, 1/2).
    double sum = 0.0;
    for (std::uint64_t k = 1; k <= 60; ++k) {
      double e = -static_cast<double>(n + 2 * k - 1) * kLn2 -
                 std::log(static_cast<double>(n + k - 1));
      sum += std::exp(e);
    }
    return box2(0.0, 0.0, sum, 0.5);
  }

  std::string describe() const override { return "ex54"; }
};

enum class Ex55Rule { Divergent, Vanishing, Convergent, Constant };

// a_n-scaled thirds: phi_{n,0} = x/(3 a_n), phi_{n,1} = (x-1)/(3 a_n) + 1.
class Ex55Family final : public SystemBackend {
 public:
  Ex55Family(Ex55Rule rule, double c) : rule_(rule), c_(c) {
    if (rule_ == Ex55Rule::Constant && !(c_ >= 2.0 / 3.0 && c_ <= 1.5))
      throw Error("ex55 family: constant a must lie in [2/3, 3/2]");
  }

  int dim() const override { return 1; }
  Box ambient() const override { return box1(0, 1); }

  LayerSummary summary(std::uint64_t n) const override {
    return uniform_similarity_summary(2, -std::log(3.0 * a(n)));
  }

  ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
    check_symbol(n, j, 2);
    double an = a(n);
    double r = 1.0 / (3.0 * an);
    double alpha = j == 1 ? 0.0 : 3.0 * an - 1.0;
    return ContractionMap::similarity(1, r, vec1(alpha));
  }

  std::optional<Box> separation_box(std::uint64_t) const override {
    return box1(0, 1);
  }

  std::string describe() const override {
    switch (rule_) {
      case Ex55Rule::Divergent:
        return "ex55(a=(n+3)/(n+2))";
      case Ex55Rule::Vanishing:
        return "ex55(a=(n+2)/(n+3))";
      case Ex55Rule::Convergent:
        return "ex55(a=(3/2)^(2^-n))";
      default: {
        std::ostringstream os;
        os << "ex55(a=" << c_ << ")";
        return os.str();
      }
    }
  }

 private:
  double a(std::uint64_t n) const {
    double nn = static_cast<double>(n);
    switch (rule_) {
      case Ex55Rule::Divergent:
        return (nn + 3.0) / (nn + 2.0);
      case Ex55Rule::Vanishing:
        return (nn + 2.0) / (nn + 3.0);
      case Ex55Rule::Convergent:
        return std::exp(std::log(1.5) * std::exp2(-nn));
      default:
        return c_;
    }
  }

  Ex55Rule rule_;
  double c_;
};

// Growing layers: n^2 fine maps on a (2n)-grid plus 3 coarse halves.
class Ex56Family final : public SystemBackend {
 public:
  int dim() const override { return 2; }
  Box ambient() const override { return box2(0, 0, 1, 1); }

  LayerSummary summary(std::uint64_t n) const override {
    LayerSummary s;
    s.map_count = n * n + 3;
    double fine = -std::log(2.0 * static_cast<double>(n));
    s.log_c1 = fine;
    s.log_c2 = -kLn2;
    s.all_similarity = true;
    if (n == 1) {
      s.uniform_log_ratio = -kLn2;  // 1/(2n) = 1/2 as well
      s.ratio_groups.push_back({-kLn2, 4, 1});
    } else {
      s.ratio_groups.push_back({fine, n * n, 1});
      s.ratio_groups.push_back({-kLn2, 3, n * n + 1});
    }
    return s;
  }

  ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
    check_symbol(n, j, n * n + 3);
    double nn = static_cast<double>(n);
    if (j <= n * n) {
      std::uint64_t i = (j - 1) % n;
      std::uint64_t jj = (j - 1) / n;
      return ContractionMap::similarity(
          2, 1.0 / (2.0 * nn),
          vec2(static_cast<double>(i), static_cast<double>(jj)));
    }
    std::uint32_t t = static_cast<std::uint32_t>(j - n * n);
    double ix = t == 1 ? 1.0 : (t == 2 ? 0.0 : 1.0);
    double jy = t == 1 ? 0.0 : 1.0;
    return ContractionMap::similarity(2, 0.5, vec2(ix, jy));
  }

  std::optional<Box> separation_box(std::uint64_t) const override {
    return box2(0, 0, 1, 1);
  }

  std::string describe() const override { return "ex56"; }
};

// Ratio blocks: 1/3 on [2^(2k), 2^(2k+1)), 1/2 on [2^(2k+1), 2^(2k+2)).
class Ex57Family final : public SystemBackend {
 public:
  int dim() const override { return 1; }
  Box ambient() const override { return box1(0, 1); }

  static bool thirds_block(std::uint64_t n) {
    int b = 0;
    while ((n >> (b + 1)) != 0) ++b;
    return (b % 2) == 0;
  }

  LayerSummary summary(std::uint64_t n) const override {
    double lr = thirds_block(n) ? -std::log(3.0) : -kLn2;
    return uniform_similarity_summary(2, lr);
  }

  ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
    check_symbol(n, j, 2);
    bool thirds = thirds_block(n);
    double r = thirds ? 1.0 / 3.0 : 0.5;
    // (x - j)/r' + j rewritten as r*(x + alpha).
    double alpha = j == 1 ? 0.0 : (thirds ? 2.0 : 1.0);
    return ContractionMap::similarity(1, r, vec1(alpha));
  }

  std::optional<Box> separation_box(std::uint64_t) const override {
    return box1(0, 1);
  }

  std::vector<std::uint64_t> suggested_depths(
      std::uint64_t max_depth) const override {
    // Block boundaries 2^j - 1 carry the exact lim inf / lim sup
    // subsequences.
    std::vector<std::uint64_t> out;
    for (std::uint64_t m = 1; m <= std::min<std::uint64_t>(max_depth, 8); ++m)
      out.push_back(m);
    for (std::uint64_t p = 8; p <= max_depth + 1; p *= 2) {
      std::uint64_t m = p - 1;
      if (m > out.back() && m <= max_depth) out.push_back(m);
    }
    if (out.back() != max_depth) out.push_back(max_depth);
    return out;
  }

  std::string describe() const override { return "ex57"; }
};

// Ratios 2^(-2^n); digit sets either full or just the two endpoints.
class Ex58Family final : public SystemBackend {
 public:
  explicit Ex58Family(bool full) : full_(full) {}

  int dim() const override { return 1; }
  Box ambient() const override { return box1(0, 1); }

  LayerSummary summary(std::uint64_t n) const override {
    double lr = -std::exp2(static_cast<double>(n)) * kLn2;
    if (full_ && n > 5)
      throw Error("ex58 full: digit count exceeds 2^32 at layer > 5");
    std::uint64_t count = full_ ? (1ull << (1ull << n)) : 2;
    return uniform_similarity_summary(count, lr);
  }

  ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
    LayerSummary s = summary(n);
    check_symbol(n, j, s.map_count);
    double r = require_representable(s.log_c2, n);
    double top = std::exp2(std::exp2(static_cast<double>(n))) - 1.0;
    double alpha = full_ ? static_cast<double>(j - 1) : (j == 1 ? 0.0 : top);
    return ContractionMap::similarity(1, r, vec1(alpha));
  }

  std::optional<Box> separation_box(std::uint64_t) const override {
    return box1(0, 1);
  }

  std::vector<std::uint64_t> suggested_depths(
      std::uint64_t max_depth) const override {
    std::vector<std::uint64_t> out;
    std::uint64_t cap = full_ ? 4 : 60;
    for (std::uint64_t m = 1; m <= max_depth && m <= cap; ++m)
      out.push_back(m);
    return out;
  }

  std::string describe() const override {
    return full_ ? "ex58(full)" : "ex58(endpoints)";
  }

 private:
  bool full_;
};

// One coarse half-map plus n maps of ratio 1/(2n).
class Ex59Family final : public SystemBackend {
 public:
  explicit Ex59Family(double pad) : pad_(pad) {
    if (pad_ < 0.0) throw Error("ex59 family: pad must be >= 0");
  }

  int dim() const override { return 1; }
  Box ambient() const override { return box1(-pad_, 1.0 + pad_); }

  LayerSummary summary(std::uint64_t n) const override {
    LayerSummary s;
    s.map_count = n + 1;
    double fine = -std::log(2.0 * static_cast<double>(n));
    s.log_c1 = std::min(fine, -kLn2);
    s.log_c2 = -kLn2;
    s.all_similarity = true;
    if (n == 1) {
      s.uniform_log_ratio = -kLn2;
      s.ratio_groups.push_back({-kLn2, 2, 1});
    } else {
      s.ratio_groups.push_back({-kLn2, 1, 1});
      s.ratio_groups.push_back({fine, n, 2});
    }
    return s;
  }

  ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
    check_symbol(n, j, n + 1);
    if (j == 1) return ContractionMap::similarity(1, 0.5, vec1(1.0));
    double nn = static_cast<double>(n);
    return ContractionMap::similarity(1, 1.0 / (2.0 * nn),
                                      vec1(static_cast<double>(j - 2)));
  }

  std::optional<Box> separation_box(std::uint64_t) const override {
    return box1(0, 1);
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "ex59(pad=" << pad_ << ")";
    return os.str();
  }

 private:
  double pad_;
};

class AmbientOverrideBackend final : public SystemBackend {
 public:
  AmbientOverrideBackend(std::shared_ptr<const SystemBackend> base, Box box)
      : base_(std::move(base)), box_(box) {}

  int dim() const override { return base_->dim(); }
  Box ambient() const override { return box_; }
  LayerSummary summary(std::uint64_t n) const override {
    return base_->summary(n);
  }
  ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
    return base_->map(n, j);
  }
  std::optional<Box> separation_box(std::uint64_t n) const override {
    return base_->separation_box(n);
  }
  std::vector<std::uint64_t> suggested_depths(
      std::uint64_t max_depth) const override {
    return base_->suggested_depths(max_depth);
  }
  std::string describe() const override { return base_->describe(); }

 private:
  std::shared_ptr<const SystemBackend> base_;
  Box box_;
};

}  // namespace

LayerSystem make_family(const std::string& name, const FamilyParams& params,
                        std::optional<Box> ambient_override) {
  std::shared_ptr<SystemBackend> b;
  if (name == "constant") {
    double r = params.num_or("r", 1.0 / 3.0);
    std::uint64_t count =
        static_cast<std::uint64_t>(params.num_or("N", 2.0) + 0.5);
    std::vector<double> alphas = params.translations;
    if (alphas.empty() && params.nums.count("gap")) {
      double gap = params.nums.at("gap");
      for (std::uint64_t j = 0; j < count; ++j)
        alphas.push_back(static_cast<double>(j) * gap);
    }
    b = std::make_shared<ConstantFamily>(r, count, std::move(alphas));
  } else if (name == "ex51") {
    b = std::make_shared<Ex51Family>();
  } else if (name == "ex53") {
    std::string form = params.str_or("form", "phi");
    if (form != "phi" && form != "psi")
      throw Error("ex53 family: form must be phi or psi");
    b = std::make_shared<Ex53Family>(params.num_or("rho", 1.0), form == "psi");
  } else if (name == "ex54") {
    b = std::make_shared<Ex54Family>();
  } else if (name == "ex55") {
    std::string rule = params.str_or("a_rule", "divergent");
    Ex55Rule r;
    if (rule == "divergent")
      r = Ex55Rule::Divergent;
    else if (rule == "vanishing")
      r = Ex55Rule::Vanishing;
    else if (rule == "convergent")
      r = Ex55Rule::Convergent;
    else if (rule == "constant")
      r = Ex55Rule::Constant;
    else
      throw Error(
          "ex55 family: a_rule must be divergent, vanishing, convergent or "
          "constant");
    b = std::make_shared<Ex55Family>(r, params.num_or("c", 1.0));
  } else if (name == "ex56") {
    b = std::make_shared<Ex56Family>();
  } else if (name == "ex57") {
    b = std::make_shared<Ex57Family>();
  } else if (name == "ex58") {
    std::string digits = params.str_or("digits", "full");
    if (digits != "full" && digits != "endpoints")
      throw Error("ex58 family: digits must be full or endpoints");
    b = std::make_shared<Ex58Family>(digits == "full");
  } else if (name == "ex59") {
    b = std::make_shared<Ex59Family>(params.num_or("pad", 0.0));
  } else {
    throw Error("unknown family: " + name);
  }
  if (ambient_override) {
    b = std::make_shared<AmbientOverrideBackend>(std::move(b),
                                                 *ambient_override);
  }
  return LayerSystem(std::move(b));
}

bool is_known_family(const std::string& name) {
  for (const auto& n : family_names())
    if (n == name) return true;
  return false;
}

std::vector<std::string> family_names() {
  return {"constant", "ex51", "ex53", "ex54", "ex55",
          "ex56",     "ex57", "ex58", "ex59"};
}

LayerSystem with_ambient(const LayerSystem& sys, const Box& ambient) {
  if (sys.shift_offset() != 0)
    throw Error("ambient override on shifted systems is not supported");
  // Rebuild through a family-agnostic wrapper is not possible without the
  // backend; LayerSystem exposes enough for the wrapper below.
  struct Wrapper final : SystemBackend {
    LayerSystem base;
    Box box;
    int dim() const override { return base.dim(); }
    Box ambient() const override { return box; }
    LayerSummary summary(std::uint64_t n) const override {
      return base.layer_summary(n);
    }
    ContractionMap map(std::uint64_t n, std::uint32_t j) const override {
      return base.map_at(n, j);
    }
    std::optional<Box> separation_box(std::uint64_t n) const override {
      return base.separation_box(n);
    }
    std::vector<std::uint64_t> suggested_depths(
        std::uint64_t max_depth) const override {
      return base.suggested_depths(max_depth);
    }
    std::string describe() const override { return base.describe(); }
  };
  auto w = std::make_shared<Wrapper>();
  w->base = sys;
  w->box = ambient;
  return LayerSystem(std::move(w));
}

}  // namespace moran
