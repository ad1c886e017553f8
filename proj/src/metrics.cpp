#include "moqd/metrics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace moqd::metrics {

namespace {

double score_impl(const MoArchive& archive, const pareto::ReferencePoint& ref,
                  bool parallel) {
  const std::size_t k = archive.cells();
  std::vector<double> per_cell(k, 0.0);
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < k; ++i) {
      if (archive.front(i).size() > 0)
        per_cell[i] = pareto::hypervolume(archive.front(i).fitnesses(), ref);
    }
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      if (archive.front(i).size() > 0)
        per_cell[i] = pareto::hypervolume(archive.front(i).fitnesses(), ref);
    }
  }
  double total = 0.0;
  for (double v : per_cell) total += v;  // fixed order, thread-agnostic
  return total;
}

}  // namespace

double moqd_score(const MoArchive& archive, const pareto::ReferencePoint& ref) {
  return score_impl(archive, ref, true);
}

double moqd_score_serial(const MoArchive& archive,
                         const pareto::ReferencePoint& ref) {
  return score_impl(archive, ref, false);
}

std::vector<FitnessVector> normalize(const std::vector<FitnessVector>& fs,
                                     const NormalizationBounds& b) {
  std::vector<FitnessVector> out = fs;
  for (auto& f : out) {
    if (f.size() != b.min.size())
      throw std::invalid_argument("normalize: bounds length mismatch");
    for (std::size_t j = 0; j < f.size(); ++j)
      f[j] = (f[j] - b.min[j]) / (b.max[j] - b.min[j]);
  }
  return out;
}

double moqd_sparsity(const MoArchive& archive, const NormalizationBounds& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < archive.cells(); ++i) {
    const auto& front = archive.front(i);
    if (front.size() < 2) continue;
    total += pareto::sparsity(normalize(front.fitnesses(), b));
  }
  return total / static_cast<double>(archive.cells());
}

std::vector<Solution> global_front(const MoArchive& archive) {
  std::vector<Solution> all;
  for (std::size_t i = 0; i < archive.cells(); ++i)
    for (const auto& s : archive.front(i).members()) all.push_back(s);

  const std::size_t n = all.size();
  std::vector<char> dominated(n, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && pareto::dominates(all[j].fitness, all[i].fitness)) {
        dominated[i] = 1;
        break;
      }
    }
  }
  std::vector<Solution> front;
  for (std::size_t i = 0; i < n; ++i)
    if (!dominated[i]) front.push_back(std::move(all[i]));
  return front;
}

double global_hypervolume(const MoArchive& archive,
                          const pareto::ReferencePoint& ref) {
  std::vector<FitnessVector> fs;
  for (const auto& s : global_front(archive)) fs.push_back(s.fitness);
  if (fs.empty()) return 0.0;
  return pareto::hypervolume(fs, ref);
}

double global_sparsity(const MoArchive& archive, const NormalizationBounds& b) {
  std::vector<FitnessVector> fs;
  for (const auto& s : global_front(archive)) fs.push_back(s.fitness);
  if (fs.size() < 2) return 0.0;
  return pareto::sparsity(normalize(fs, b));
}

std::optional<double> max_sum_scores(const MoArchive& archive) {
  std::optional<double> best;
  for (std::size_t i = 0; i < archive.cells(); ++i) {
    for (const auto& s : archive.front(i).members()) {
      double sum = 0.0;
      for (double v : s.fitness) sum += v;
      if (!best || sum > *best) best = sum;
    }
  }
  return best;
}

double coverage(const MoArchive& archive) {
  return static_cast<double>(archive.cells_nonempty().size()) /
         static_cast<double>(archive.cells());
}

NormalizationBounds compute_bounds(
    const std::vector<const MoArchive*>& archives) {
  NormalizationBounds b;
  bool any = false;
  for (const MoArchive* a : archives) {
    for (std::size_t i = 0; i < a->cells(); ++i) {
      for (const auto& s : a->front(i).members()) {
        if (!any) {
          b.min = s.fitness;
          b.max = s.fitness;
          any = true;
          continue;
        }
        if (s.fitness.size() != b.min.size())
          throw std::invalid_argument("compute_bounds: objective count mismatch");
        for (std::size_t j = 0; j < s.fitness.size(); ++j) {
          b.min[j] = std::min(b.min[j], s.fitness[j]);
          b.max[j] = std::max(b.max[j], s.fitness[j]);
        }
      }
    }
  }
  if (!any)
    throw std::invalid_argument("compute_bounds: every archive is empty");
  for (std::size_t j = 0; j < b.min.size(); ++j)
    if (b.max[j] <= b.min[j]) b.max[j] = b.min[j] + 1.0;
  return b;
}

MetricsRow compute_row(std::uint64_t iteration, std::uint64_t env_steps,
                       const MoArchive& archive,
                       const pareto::ReferencePoint& ref,
                       const NormalizationBounds& b) {
  MetricsRow row;
  row.iteration = iteration;
  row.env_steps = env_steps;
  row.moqd_score = moqd_score(archive, ref);
  row.moqd_sparsity = moqd_sparsity(archive, b);
  row.global_hypervolume = global_hypervolume(archive, ref);
  row.global_sparsity = global_sparsity(archive, b);
  row.max_sum_scores = max_sum_scores(archive);
  row.coverage = coverage(archive);
  return row;
}

std::string csv_header() {
  return "iteration,env_steps,moqd_score,moqd_sparsity,global_hypervolume,"
         "global_sparsity,max_sum_scores,coverage";
}

std::string csv_row(const MetricsRow& row) {
  std::string s = std::to_string(row.iteration);
  s += ',' + std::to_string(row.env_steps);
  s += ',' + fmt_double(row.moqd_score);
  s += ',' + fmt_double(row.moqd_sparsity);
  s += ',' + fmt_double(row.global_hypervolume);
  s += ',' + fmt_double(row.global_sparsity);
  s += ',';
  if (row.max_sum_scores) s += fmt_double(*row.max_sum_scores);
  s += ',' + fmt_double(row.coverage);
  return s;
}

}  // namespace moqd::metrics
