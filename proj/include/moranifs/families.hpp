#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moranifs/system.hpp"

namespace moran {

// Parameters of a built-in family, as parsed from a declaration file.
struct FamilyParams {
  std::map<std::string, double> nums;
  std::map<std::string, std::string> strs;
  std::vector<double> translations;  // `constant` family only

  double num_or(const std::string& key, double fallback) const {
    auto it = nums.find(key);
    return it == nums.end() ? fallback : it->second;
  }
  std::string str_or(const std::string& key, std::string fallback) const {
    auto it = strs.find(key);
    return it == strs.end() ? fallback : it->second;
  }
};

// Catalog of closed-form layer generators. Names:
//   constant  {r, N, translations? | gap?}       classical self-similar sets
//   ex51      {}                                  2D, one diagonal + one similarity map
//   ex53      {rho, form: phi|psi}                overlapping pair / its separated twin
//   ex54      {}                                  2D product with shrinking x-offsets
//   ex55      {a_rule: divergent|vanishing|convergent|constant, c?}
//   ex56      {}                                  growing layers, N_n = n^2+3
//   ex57      {}                                  ratio blocks alternating 1/3 and 1/2
//   ex58      {digits: full|endpoints}            ratios 2^(-2^n)
//   ex59      {pad?}                              N_n = n+1 with one coarse map
// Out-of-domain parameters throw Error with the offending name.
LayerSystem make_family(const std::string& name, const FamilyParams& params,
                        std::optional<Box> ambient_override = std::nullopt);

bool is_known_family(const std::string& name);
std::vector<std::string> family_names();

// Replace the ambient box of an existing system (images are re-checked
// lazily, as for any system).
LayerSystem with_ambient(const LayerSystem& sys, const Box& ambient);

}  // namespace moran
