#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "moranifs/families.hpp"
#include "moranifs/words.hpp"

using namespace moran;

namespace {

constexpr double kLn2 = 0.6931471805599453094;

LayerSystem cantor() {
  FamilyParams p;
  p.nums["r"] = 1.0 / 3.0;
  p.nums["N"] = 2;
  return make_family("constant", p);
}

// Independent oracle: enumerate the full word tree to `max_depth` and keep
// exactly the words with R_J <= b < R_{J-}.
void bruteforce_cutset(const LayerSystem& sys, double log_b,
                       std::uint64_t max_depth, std::vector<std::uint32_t>& cur,
                       double parent_logR,
                       std::vector<std::vector<std::uint32_t>>& out) {
  LayerSummary s = sys.layer_summary(cur.size() + 1);
  for (std::uint32_t j = 1; j <= s.map_count; ++j) {
    ContractionMap m = sys.map_at(cur.size() + 1, j);
    double logR = parent_logR + m.log_rmax();
    cur.push_back(j);
    if (logR <= log_b) {
      out.push_back(cur);
    } else {
      REQUIRE(cur.size() < max_depth);
      bruteforce_cutset(sys, log_b, max_depth, cur, logR, out);
    }
    cur.pop_back();
  }
}

// Random small 1D similarity system (d=1, N <= 3) with a periodic tail.
LayerSystem random_system(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> nd(2, 3);
  std::uniform_real_distribution<double> rd(0.35, 0.8);
  std::uniform_real_distribution<double> td(0.0, 0.4);
  auto make = [&](std::uint64_t idx) {
    std::vector<ContractionMap> maps;
    int n = nd(gen);
    for (int j = 0; j < n; ++j) {
      double r = rd(gen);
      double a = td(gen);
      maps.push_back(ContractionMap::similarity(1, r, vec1(a * (1 - r) / r)));
    }
    return make_layer(idx, std::move(maps));
  };
  std::vector<Layer> prefix;
  std::vector<Layer> cycle;
  std::uniform_int_distribution<int> pc(0, 2);
  int np = pc(gen), nc = pc(gen) + 1;
  for (int i = 0; i < np; ++i) prefix.push_back(make(i + 1));
  for (int i = 0; i < nc; ++i) cycle.push_back(make(np + i + 1));
  Box amb;
  amb.lo = vec1(0.0);
  amb.hi = vec1(1.0);
  return make_explicit_periodic(1, amb, std::move(prefix), std::move(cycle));
}

}  // namespace

TEST_CASE("word bounds and the empty word") {
  auto sys = cantor();
  Word empty = make_word(sys, 1, {});
  CHECK(empty.logR == 0.0);
  CHECK(empty.logr == 0.0);
  Word w = make_word(sys, 1, {1, 2, 1});
  CHECK(w.logR == doctest::Approx(3.0 * std::log(1.0 / 3.0)));
  CHECK(w.logr == w.logR);  // similarity
  CHECK(w.logr <= w.logR);
  CHECK(w.logR <= 0.0);
  CHECK_THROWS_AS(make_word(sys, 1, {3}), Error);
}

TEST_CASE("compose: two left maps of the thirds system") {
  auto sys = cantor();
  ContractionMap c = compose(sys, make_word(sys, 1, {1, 1}));
  CHECK(c.kind == MapKind::Similarity);
  CHECK(c.ratio == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(c.translation[0] == doctest::Approx(0.0));
  // empty word composes to the identity
  ContractionMap id = compose(sys, make_word(sys, 1, {}));
  CHECK(id.ratio == 1.0);
  CHECK(id.apply(vec1(0.77))[0] == 0.77);
}

TEST_CASE("compose: anisotropic chains multiply per axis") {
  auto sys = make_family("ex51", {});
  for (int n : {1, 2, 5, 8}) {
    std::vector<std::uint32_t> digits(n, 1);
    ContractionMap c = compose(sys, make_word(sys, 1, digits));
    CHECK(c.kind == MapKind::DiagonalAffine);
    CHECK(c.diag[0] == doctest::Approx(std::pow(0.5, n)).epsilon(1e-14));
    CHECK(c.diag[1] == doctest::Approx(std::pow(0.4, n)).epsilon(1e-14));
  }
}

TEST_CASE("compose: rotation meeting a diagonal map is rejected") {
  std::vector<ContractionMap> maps{
      ContractionMap::similarity2d_angle(0.4, vec2(0, 0), 0.3),
      ContractionMap::diagonal(2, vec2(0.3, 0.4), vec2(1, 1))};
  Box amb;
  amb.lo = vec2(-10, -10);
  amb.hi = vec2(10, 10);
  auto sys = make_explicit_periodic(2, amb, {}, {make_layer(1, maps)});
  CHECK_THROWS_AS(compose(sys, make_word(sys, 1, {1, 2})),
                  UnsupportedComposition);
  // rotation-only chains stay similarities
  ContractionMap rr = compose(sys, make_word(sys, 1, {1, 1}));
  CHECK(rr.kind == MapKind::Similarity);
  CHECK(rr.ratio == doctest::Approx(0.16));
}

TEST_CASE("cutset: thirds system at coarse scales") {
  auto sys = cantor();
  Cutset c1 = cutset(sys, 0.4, 1 << 20);
  CHECK(c1.words.size() == 2);
  CHECK(c1.words[0].length() == 1);
  Cutset c2 = cutset(sys, 0.1, 1 << 20);
  CHECK(c2.words.size() == 8);
  for (const Word& w : c2.words) CHECK(w.length() == 3);
  CHECK(c2.maps.size() == 8);
}

TEST_CASE("cutset is prefix-free, exhaustive, lexicographic") {
  auto sys = random_system(1234);
  Cutset cs = cutset(sys, 0.03, 1 << 22);
  // lexicographic order
  CHECK(std::is_sorted(cs.words.begin(), cs.words.end(),
                       [](const Word& a, const Word& b) {
                         return a.digits < b.digits;
                       }));
  // prefix-free: no word is a prefix of its successor (sorted order makes
  // any prefix adjacent to its extension)
  for (std::size_t i = 0; i + 1 < cs.words.size(); ++i) {
    const auto& a = cs.words[i].digits;
    const auto& b = cs.words[i + 1].digits;
    bool prefix = a.size() <= b.size() &&
                  std::equal(a.begin(), a.end(), b.begin());
    CHECK(!prefix);
  }
  // exhaustive + prefix-free <=> uniform cylinder masses sum to 1
  WeightSequence uni = WeightSequence::uniform();
  KahanSum total;
  for (const Word& w : cs.words)
    total.add(std::exp(cylinder_log_weight(sys, uni, w)));
  CHECK(total.value() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cs.maps.size() <= cs.words.size());
}

TEST_CASE("cutset equals the brute-force tree filter") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> bd(0.0, 1.0);
  for (std::uint64_t seed : {11u, 22u, 33u, 44u, 55u}) {
    LayerSystem sys = random_system(seed);
    // b range keeping the tree within depth 10
    double lo = 0.0;
    for (int i = 1; i <= 9; ++i) lo += sys.layer_summary(i).log_c2;
    for (int rep = 0; rep < 3; ++rep) {
      double log_b = lo * bd(gen);
      if (log_b >= 0.0) log_b = -0.05;
      std::vector<std::vector<std::uint32_t>> expected;
      std::vector<std::uint32_t> cur;
      bruteforce_cutset(sys, log_b, 10, cur, 0.0, expected);
      Cutset got = cutset(sys, std::exp(log_b), 1 << 22);
      REQUIRE(got.words.size() == expected.size());
      for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(got.words[i].digits == expected[i]);
    }
  }
}

TEST_CASE("cutset monotonicity: finer scales refine coarser ones") {
  for (std::uint64_t seed : {5u, 6u}) {
    auto sys = random_system(seed);
    Cutset coarse = cutset(sys, 0.2, 1 << 22);
    Cutset fine = cutset(sys, 0.04, 1 << 22);
    std::set<std::vector<std::uint32_t>> coarse_words;
    for (const Word& w : coarse.words) coarse_words.insert(w.digits);
    for (const Word& w : fine.words) {
      // some unique prefix of w must be a coarse word
      int hits = 0;
      for (std::size_t len = 1; len <= w.digits.size(); ++len) {
        std::vector<std::uint32_t> pre(w.digits.begin(),
                                       w.digits.begin() + len);
        if (coarse_words.count(pre)) ++hits;
      }
      CHECK(hits == 1);
    }
  }
}

TEST_CASE("cutset limit error carries the count reached") {
  auto sys = cantor();
  try {
    cutset(sys, 1e-4, 10);
    FAIL("expected LimitExceeded");
  } catch (const LimitExceeded& e) {
    CHECK(e.count_reached == 10);
  }
}

TEST_CASE("deep digit-doubling counts in log space") {
  auto full = make_family("ex58", [] {
    FamilyParams p;
    p.strs["digits"] = "full";
    return p;
  }());
  for (int n = 1; n <= 3; ++n) {
    double want_exp = std::pow(2.0, n + 1) - 2.0;
    double log_b = -want_exp * kLn2;  // b = 2^{-2^{n+1}+2}
    CutsetCount c = cutset_count(full, log_b, 1 << 20);
    CHECK(c.closed_form);
    CHECK(c.log_words == doctest::Approx(want_exp * kLn2).epsilon(1e-12));
    REQUIRE(c.exact_count);
    CHECK(c.words == static_cast<std::uint64_t>(std::pow(2.0, want_exp) + 0.5));
    // composed maps tile [0,1]: dedup keeps them all
    CHECK(c.maps == c.words);
  }
}

TEST_CASE("cylinder weights") {
  auto sys = cantor();
  WeightSequence uni = WeightSequence::uniform();
  Word w3 = make_word(sys, 1, {1, 2, 2});
  CHECK(cylinder_log_weight(sys, uni, w3) ==
        doctest::Approx(std::log(1.0 / 8.0)).epsilon(1e-14));
  // equal ratios make ratio-power weights uniform
  WeightSequence rp = WeightSequence::ratio_power(kLn2 / std::log(3.0));
  Word w2 = make_word(sys, 1, {2, 1});
  CHECK(cylinder_log_weight(sys, rp, w2) ==
        doctest::Approx(std::log(0.25)).epsilon(1e-12));
  // layer-halving family: every length-k cylinder has mass 2^-k
  auto e55 = make_family("ex55", {});
  Word w5 = make_word(e55, 1, {1, 2, 1, 2, 1});
  CHECK(cylinder_log_weight(e55, uni, w5) ==
        doctest::Approx(-5.0 * kLn2).epsilon(1e-14));
  // empty word has zero log mass
  CHECK(cylinder_log_weight(sys, uni, make_word(sys, 1, {})) == 0.0);
}

TEST_CASE("word axis bounds stay within the layer envelope") {
  auto sys = random_system(99);
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::uint32_t> digits;
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < 6; ++i) {
      LayerSummary s = sys.layer_summary(i + 1);
      digits.push_back(
          static_cast<std::uint32_t>(gen() % s.map_count + 1));
      lo += s.log_c1;
      hi += s.log_c2;
    }
    Word w = make_word(sys, 1, digits);
    CHECK(w.logR <= hi + 1e-12);
    CHECK(w.logr >= lo - 1e-12);
  }
}
