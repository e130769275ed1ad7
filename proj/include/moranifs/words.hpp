#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "moranifs/system.hpp"

namespace moran {

// Finite word J = j_n ... j_{n+k-1} with log-scale contraction bounds.
// logR/logr are the log of the max/min distance expansion of the composed
// map (per-axis products reduced by max/min; exact for the supported kinds).
struct Word {
  std::uint64_t start = 1;
  std::vector<std::uint32_t> digits;  // 1-based symbols; empty = empty word
  double logR = 0.0;
  double logr = 0.0;

  std::size_t length() const { return digits.size(); }
};

Word make_word(const LayerSystem& sys, std::uint64_t start,
               std::vector<std::uint32_t> digits);

// Composed affine map of the word (identity for the empty word). Throws
// UnsupportedComposition when the chain leaves the closed form families.
ContractionMap compose(const LayerSystem& sys, const Word& w);

// log of p_{n,j_n} ... p_{k,j_k}; 0 for the empty word.
double cylinder_log_weight(const LayerSystem& sys, const WeightSequence& w,
                           const Word& word);

// Scale cutset at b: minimal words with R_J <= b < R_{J^-}, lexicographic.
struct Cutset {
  double b = 0.0;
  double log_b = 0.0;
  std::vector<Word> words;
  std::vector<ContractionMap> maps;  // deduplicated composed maps
};

// Streaming view of one cutset element during enumeration.
struct CutsetEntry {
  std::span<const std::uint32_t> digits;
  double logR;
  double logr;
  const ContractionMap* composed;  // valid during the visit only
};

// Depth-first enumeration from the empty word, extending while logR > log_b
// and emitting once logR <= log_b; lexicographic order. The limit counts
// emitted words; exceeding it throws LimitExceeded with the count reached.
void cutset_visit(const LayerSystem& sys, double log_b, std::uint64_t limit,
                  const std::function<void(const CutsetEntry&)>& visit);

Cutset cutset(const LayerSystem& sys, double b, std::uint64_t limit);

// Word/map counts of the cutset without materializing it. Systems whose
// layers contract uniformly (r_{n,j} = r_n) get an exact closed-form count in
// log space at any depth; other systems enumerate under `limit`.
struct CutsetCount {
  double log_words = 0.0;   // natural log of #I_b (always set)
  bool exact_count = false; // words/maps below hold actual values
  std::uint64_t words = 0;
  std::uint64_t maps = 0;
  std::uint64_t depth_min = 0;
  std::uint64_t depth_max = 0;
  bool closed_form = false;  // came from the uniform-layer path
};

CutsetCount cutset_count(const LayerSystem& sys, double log_b,
                         std::uint64_t limit);

// Deduplicate composed maps by parameter equality within rel_tol (sorted so
// that equal maps land adjacent; deterministic).
std::vector<ContractionMap> dedup_maps(std::vector<ContractionMap> maps,
                                       double rel_tol = 1e-12);

}  // namespace moran
