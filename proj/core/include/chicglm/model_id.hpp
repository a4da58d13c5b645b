#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "chicglm/errors.hpp"

namespace chicglm {

// Subset of candidate predictors, bit j <=> column j of Dataset::X.
// The intercept is always included and is not part of the mask.
struct ModelId {
  std::uint64_t bits = 0;
  int p = 0;

  ModelId() = default;
  ModelId(std::uint64_t b, int p_total) : bits(b), p(p_total) {
    if (p_total < 0 || p_total > 64) throw validation_error("ModelId supports 0..64 predictors");
    if (p_total < 64 && (b >> p_total) != 0)
      throw validation_error("ModelId has bits outside the candidate set");
  }

  static ModelId null_model(int p_total) { return ModelId(0, p_total); }
  static ModelId full_model(int p_total) {
    return ModelId(p_total == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << p_total) - 1), p_total);
  }

  int size() const { return std::popcount(bits); }
  bool includes(int j) const { return (bits >> j) & 1u; }
  bool is_null() const { return bits == 0; }

  ModelId with_flipped(int j) const { return ModelId(bits ^ (std::uint64_t{1} << j), p); }

  // column 0 first, e.g. "101" = {x0, x2} of p=3
  std::string bitstring() const {
    std::string s(static_cast<std::size_t>(p), '0');
    for (int j = 0; j < p; ++j)
      if (includes(j)) s[static_cast<std::size_t>(j)] = '1';
    return s;
  }

  friend bool operator==(const ModelId& a, const ModelId& b) { return a.bits == b.bits; }
  friend bool operator<(const ModelId& a, const ModelId& b) { return a.bits < b.bits; }
};

}  // namespace chicglm
