#pragma once

#include <vector>

#include "moqd/archive.hpp"
#include "moqd/rng.hpp"
#include "moqd/types.hpp"

namespace moqd {

/// Iso+LineDD noise scales.
struct GaParams {
  double sigma_iso = 0.005;
  double sigma_line = 0.05;
};

/// child = parent1 + sigma_iso * g + sigma_line * u * (parent2 - parent1)
/// with g a standard normal vector and u a scalar standard normal.
/// Throws std::invalid_argument on layout mismatch.
Genotype iso_line_dd(const Genotype& parent1, const Genotype& parent2,
                     const GaParams& params, Rng& rng);

/// n independent draws: a uniform non-empty cell, then a member with
/// probability proportional to its capped crowding distance.
/// Throws std::invalid_argument on an empty archive.
std::vector<Solution> crowding_select(const MoArchive& archive, std::size_t n,
                                      Rng& rng);

/// Same cell draw, uniform within the front.
std::vector<Solution> uniform_select(const MoArchive& archive, std::size_t n,
                                     Rng& rng);

}  // namespace moqd
