#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moranifs/system.hpp"
#include "moranifs/words.hpp"

namespace moran {

// Open-set candidates V_n (finite unions of open axis-aligned boxes).
class BoxSequence {
 public:
  static BoxSequence constant(std::vector<Box> boxes);
  static BoxSequence explicit_periodic(std::vector<std::vector<Box>> prefix,
                                       std::vector<std::vector<Box>> cycle);
  // Pull the family's shipped candidate; falls back to the ambient interior.
  static BoxSequence family_default();

  std::vector<Box> boxes(const LayerSystem& sys, std::uint64_t n) const;

 private:
  enum class Kind { Constant, ExplicitPeriodic, FamilyDefault };
  Kind kind_ = Kind::FamilyDefault;
  std::vector<Box> constant_;
  std::vector<std::vector<Box>> prefix_;
  std::vector<std::vector<Box>> cycle_;
};

// All verdicts are finite-depth: Holds means no violation found up to the
// stated depth/scale, never a proof.
enum class SepVerdict { Holds, Fails, Inconclusive };

std::string verdict_name(SepVerdict v);

struct SepWitness {
  std::uint64_t layer = 0;
  std::vector<std::uint32_t> word_i;
  std::vector<std::uint32_t> word_j;
  std::uint32_t map_i = 0;
  std::uint32_t map_j = 0;
  std::string note;
};

struct MoscResult {
  SepVerdict verdict = SepVerdict::Inconclusive;
  std::uint64_t checked_depth = 0;
  std::optional<SepWitness> witness;
  std::vector<double> measures;  // L^d(V_n) trace, n = 1..depth
  double inf_measure = 0.0;
  bool measure_bounded_away = false;  // inf not trending to 0
};

// Verifies the nesting/disjointness system of the open-set condition with
// exact box arithmetic (open boxes; touching faces allowed), and traces the
// Lebesgue measures whose infimum the condition demands positive.
MoscResult check_mosc(const LayerSystem& sys, const BoxSequence& V,
                      std::uint64_t nmax);

struct MsscResult {
  SepVerdict verdict = SepVerdict::Inconclusive;
  std::uint64_t checked_depth = 0;
  std::optional<SepWitness> witness;
};

// Pairwise word-image disjointness with closed eps-refined covers standing
// in for the attractor images. Overlapping refined covers at the finest
// scale report Fails (touching compact sets are indistinguishable from
// intersecting ones at finite depth).
MsscResult check_mssc(const LayerSystem& sys, std::uint64_t nmax, double eps,
                      std::uint64_t limit);

struct GammaSamples {
  std::vector<double> log_b;
  std::vector<double> value;     // gamma at each grid point
  std::vector<double> min_gap;   // near-identity only
  std::vector<std::uint64_t> pair_count;          // gap <= theta pairs
  std::vector<std::uint64_t> intersecting_count;  // all intersecting pairs
  SepVerdict verdict = SepVerdict::Inconclusive;
  double sup_value = 0.0;
  std::string note;
};

// gamma_2(b) = max R_J / min r_I over the cutset (exact for the supported
// map classes).
GammaSamples gamma2_mwhp(const LayerSystem& sys,
                         const std::vector<double>& log_b_grid,
                         std::uint64_t limit);

// gamma_3(n) = max over length-n words of R_J / r_J, computed without
// enumeration from per-layer axis-pair maxima; identically 1 for similarity
// systems.
GammaSamples gamma3_mbdp(const LayerSystem& sys, std::uint64_t depth);

// Neighbor counts over the cutset image boxes via spatial hashing.
// dedup=false counts words (gamma_4'), dedup=true counts distinct composed
// maps (gamma_4). With U supplied, images use U_{|J|+1} instead of X and the
// count is the weak-separation gamma_1.
GammaSamples gamma4_neighbors(const LayerSystem& sys,
                              const std::vector<double>& log_b_grid,
                              std::uint64_t limit, bool dedup,
                              const BoxSequence* U = nullptr);

struct MwscResult {
  GammaSamples gamma1;
  std::vector<double> u_measures;
  double inf_measure = 0.0;
  SepVerdict verdict = SepVerdict::Inconclusive;
};

MwscResult check_mwsc(const LayerSystem& sys, const BoxSequence& U,
                      const std::vector<double>& log_b_grid,
                      std::uint64_t limit);

// Near-identity overlap detector: per b, over intersecting distinct cutset
// pairs, the sup over ambient corners of |phi_I^{-1} phi_J(x) - x|; reports
// (count of pairs with gap <= theta, min gap).
GammaSamples near_identity_gap(const LayerSystem& sys,
                               const std::vector<double>& log_b_grid,
                               std::uint64_t limit, double theta);

// Default threshold 0.01 * |X|.
double default_near_identity_theta(const LayerSystem& sys);

// O(W^2) reference for the gamma_4' count; test oracle for the hashed path.
std::uint64_t gamma4_bruteforce(const LayerSystem& sys, double log_b,
                                std::uint64_t limit, bool dedup);

}  // namespace moran
