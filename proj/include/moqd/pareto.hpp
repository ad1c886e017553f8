#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "moqd/types.hpp"

namespace moqd::pareto {

/// Reference point for hypervolume computation, in reward units.
using ReferencePoint = FitnessVector;

/// True iff a is no worse than b in every objective and strictly better in
/// at least one. Throws std::invalid_argument on length mismatch.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Indices of the members dominated by no other member, in stable order.
std::vector<std::size_t> non_dominated_filter(
    const std::vector<FitnessVector>& set);

/// NSGA-II crowding distances over a mutually non-dominated front.
///
/// Interior members accumulate (f_next - f_prev) / range per objective.
/// Members that sit at either end of any objective's sorted order get the
/// cap value 2 * (largest finite interior score). Fronts of size <= 2, and
/// fronts with no interior member, score 1 everywhere. Objectives with zero
/// range contribute nothing.
std::vector<double> crowding_distances(const std::vector<FitnessVector>& front);

/// Exact hypervolume for 2 or 3 objectives (staircase sweep / slicing).
/// Members weakly dominated by the reference point contribute zero.
/// Throws std::invalid_argument for any other objective count.
double hypervolume(const std::vector<FitnessVector>& front,
                   const ReferencePoint& ref);

/// Monte-Carlo hypervolume estimate over the box [ref, bound_point];
/// bound_point must weakly dominate every front member. Deterministic given
/// the seed and independent of the number of threads.
double hypervolume_mc(const std::vector<FitnessVector>& front,
                      const ReferencePoint& ref,
                      const FitnessVector& bound_point, std::size_t n_samples,
                      std::uint64_t seed);

/// Serial reference path for hypervolume_mc; identical output.
double hypervolume_mc_serial(const std::vector<FitnessVector>& front,
                             const ReferencePoint& ref,
                             const FitnessVector& bound_point,
                             std::size_t n_samples, std::uint64_t seed);

/// Sum of squared per-objective sorted gaps, averaged over |front| - 1.
/// Inputs are assumed normalized to comparable scales. Fronts with fewer
/// than two members score 0.
double sparsity(const std::vector<FitnessVector>& front);

}  // namespace moqd::pareto
