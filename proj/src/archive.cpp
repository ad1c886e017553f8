#include "moqd/archive.hpp"

#include <algorithm>
#include <stdexcept>

#include "moqd/pareto.hpp"

namespace moqd {

std::vector<FitnessVector> ParetoFront::fitnesses() const {
  std::vector<FitnessVector> fs;
  fs.reserve(members_.size());
  for (const auto& s : members_) fs.push_back(s.fitness);
  return fs;
}

InsertOutcome ParetoFront::insert(Solution candidate, EvictionRule rule,
                                  Rng* rng) {
  if (!all_finite(candidate.fitness))
    throw std::invalid_argument("ParetoFront::insert: non-finite fitness");

  for (const auto& inc : members_) {
    if (pareto::dominates(inc.fitness, candidate.fitness))
      return {InsertKind::dominated, std::nullopt};
    if (inc.fitness == candidate.fitness)
      return {InsertKind::duplicate, std::nullopt};
  }

  std::erase_if(members_, [&](const Solution& inc) {
    return pareto::dominates(candidate.fitness, inc.fitness);
  });
  members_.push_back(std::move(candidate));

  if (members_.size() <= capacity_) return {InsertKind::added, std::nullopt};

  std::size_t victim = 0;
  if (rule == EvictionRule::uniform) {
    if (rng == nullptr)
      throw std::invalid_argument("uniform eviction needs an rng");
    victim = rng->uniform_index(members_.size());
  } else {
    const auto scores = pareto::crowding_distances(fitnesses());
    victim = 0;
    for (std::size_t i = 1; i < members_.size(); ++i) {
      if (scores[i] < scores[victim] ||
          (scores[i] == scores[victim] &&
           members_[i].fitness < members_[victim].fitness))
        victim = i;
    }
  }
  Solution evicted = std::move(members_[victim]);
  members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(victim));
  return {InsertKind::added_with_eviction, std::move(evicted)};
}

MoArchive::MoArchive(Tessellation tess, std::size_t capacity)
    : tess_(std::move(tess)), capacity_(capacity) {
  if (capacity == 0)
    throw std::invalid_argument("MoArchive: capacity must be >= 1");
  fronts_.assign(tess_.cells(), ParetoFront(capacity));
}

InsertOutcome MoArchive::insert(const Solution& solution, EvictionRule rule,
                                Rng* rng) {
  if (!all_finite(solution.fitness))
    throw std::invalid_argument("MoArchive::insert: non-finite fitness");
  if (solution.feature.size() != tess_.dim)
    throw std::invalid_argument("MoArchive::insert: feature length mismatch");
  for (double x : solution.feature)
    if (!(x >= 0.0 && x <= 1.0))
      throw std::invalid_argument("MoArchive::insert: feature outside [0,1]");
  const std::size_t cell = locate(tess_, solution.feature);
  return fronts_[cell].insert(solution, rule, rng);
}

std::vector<std::size_t> MoArchive::cells_nonempty() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < fronts_.size(); ++i)
    if (fronts_[i].size() > 0) idx.push_back(i);
  return idx;
}

std::size_t MoArchive::total_solutions() const {
  std::size_t n = 0;
  for (const auto& f : fronts_) n += f.size();
  return n;
}

}  // namespace moqd
