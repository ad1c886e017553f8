#pragma once

#include <optional>
#include <vector>

#include "moqd/rng.hpp"
#include "moqd/tessellation.hpp"
#include "moqd/types.hpp"

namespace moqd {

enum class InsertKind { added, added_with_eviction, dominated, duplicate };

struct InsertOutcome {
  InsertKind kind;
  std::optional<Solution> evicted;  // set for added_with_eviction
};

/// Which member is removed when a full front overflows.
enum class EvictionRule { crowding, uniform };

/// Bounded set of mutually non-dominated solutions.
///
/// Insertion semantics: a candidate dominated by an incumbent is rejected;
/// a candidate with a fitness vector identical to an incumbent's is rejected
/// as a duplicate; otherwise incumbents dominated by the candidate are
/// removed and the candidate joins. If the front then exceeds capacity,
/// crowding distances are recomputed over the post-insertion front and the
/// member with the minimum distance is evicted (possibly the candidate
/// itself); ties evict the lexicographically smallest fitness vector.
class ParetoFront {
 public:
  ParetoFront() = default;
  explicit ParetoFront(std::size_t capacity) : capacity_(capacity) {}

  const std::vector<Solution>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  std::size_t capacity() const { return capacity_; }

  /// rng is only consulted for EvictionRule::uniform.
  InsertOutcome insert(Solution candidate,
                       EvictionRule rule = EvictionRule::crowding,
                       Rng* rng = nullptr);

  std::vector<FitnessVector> fitnesses() const;

 private:
  std::vector<Solution> members_;
  std::size_t capacity_ = 0;
};

/// MAP-Elites archive holding one Pareto front per tessellation cell.
/// Mutation must stay single-owner; const access is freely shareable.
class MoArchive {
 public:
  /// Throws std::invalid_argument if capacity == 0.
  MoArchive(Tessellation tess, std::size_t capacity);

  std::size_t cells() const { return fronts_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Tessellation& tessellation() const { return tess_; }
  const ParetoFront& front(std::size_t cell) const { return fronts_.at(cell); }

  /// Locates the cell from the solution's feature and inserts there.
  /// Throws std::invalid_argument on non-finite fitness or a feature outside
  /// the unit hypercube.
  InsertOutcome insert(const Solution& solution,
                       EvictionRule rule = EvictionRule::crowding,
                       Rng* rng = nullptr);

  /// Indices of the cells holding at least one solution, ascending.
  std::vector<std::size_t> cells_nonempty() const;

  std::size_t total_solutions() const;

 private:
  Tessellation tess_;
  std::vector<ParetoFront> fronts_;
  std::size_t capacity_ = 0;
};

}  // namespace moqd
