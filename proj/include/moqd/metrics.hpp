#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moqd/archive.hpp"
#include "moqd/pareto.hpp"

namespace moqd::metrics {

/// Per-objective fitness range used to normalize before sparsity metrics.
struct NormalizationBounds {
  std::vector<double> min;
  std::vector<double> max;  // strictly above min on every objective
};

struct MetricsRow {
  std::uint64_t iteration = 0;
  std::uint64_t env_steps = 0;
  double moqd_score = 0.0;
  double moqd_sparsity = 0.0;
  double global_hypervolume = 0.0;
  double global_sparsity = 0.0;
  std::optional<double> max_sum_scores;  // missing on an empty archive
  double coverage = 0.0;
};

/// Sum of per-cell hypervolumes. Cells are independent, so the per-cell
/// values are computed in parallel and summed in cell order.
double moqd_score(const MoArchive& archive, const pareto::ReferencePoint& ref);
double moqd_score_serial(const MoArchive& archive,
                         const pareto::ReferencePoint& ref);

/// Average per-cell sparsity of the normalized fronts over all k cells;
/// empty and singleton fronts contribute 0.
double moqd_sparsity(const MoArchive& archive, const NormalizationBounds& b);

/// Non-dominated filter over every stored solution.
std::vector<Solution> global_front(const MoArchive& archive);

double global_hypervolume(const MoArchive& archive,
                          const pareto::ReferencePoint& ref);
double global_sparsity(const MoArchive& archive, const NormalizationBounds& b);

std::optional<double> max_sum_scores(const MoArchive& archive);

/// Fraction of cells holding at least one solution.
double coverage(const MoArchive& archive);

/// Per-objective min/max over the union of all stored fitness vectors.
/// A degenerate objective (min == max) has its max raised by 1.
/// Throws std::invalid_argument when every archive is empty.
NormalizationBounds compute_bounds(const std::vector<const MoArchive*>& archives);

std::vector<FitnessVector> normalize(const std::vector<FitnessVector>& fs,
                                     const NormalizationBounds& b);

MetricsRow compute_row(std::uint64_t iteration, std::uint64_t env_steps,
                       const MoArchive& archive,
                       const pareto::ReferencePoint& ref,
                       const NormalizationBounds& b);

/// CSV interchange: fixed header, one row per iteration, missing values as
/// empty fields.
std::string csv_header();
std::string csv_row(const MetricsRow& row);

}  // namespace moqd::metrics
