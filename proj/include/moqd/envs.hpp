#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moqd/neural.hpp"
#include "moqd/types.hpp"

namespace moqd {

/// Deterministic point-mass control task. The agent accelerates a point in
/// the plane; objectives trade realised velocity against actuation energy,
/// and the feature is the proportion of time spent in the positive half of
/// each axis.
struct EnvSpec {
  std::string name;
  std::size_t state_dim = 4;   // x, y, vx, vy
  std::size_t action_dim = 2;  // boxed in [-1, 1]
  std::size_t objectives = 2;
  std::size_t feature_dim = 2;
  std::size_t episode_len = 100;
  double dt = 0.1;
  double vmax = 1.0;
  FitnessVector ref_point;    // dominated by every reachable fitness
  FitnessVector ideal_point;  // dominates every reachable fitness
};

/// Tasks: "pointvel2" (forward velocity vs energy) and "pointvel3"
/// (x velocity, y velocity, energy).
std::optional<EnvSpec> make_env(std::string_view name);

/// Analytic reward bounds: (reference point, ideal point).
std::pair<FitnessVector, FitnessVector> reward_bounds(const EnvSpec& spec);

/// Fixed start: origin at rest.
std::vector<double> reset(const EnvSpec& spec);

/// Clips the action to the box, integrates velocity (clipped to +-vmax)
/// then position, and returns (next_state, reward_vector).
/// Throws std::invalid_argument on a non-finite state.
std::pair<std::vector<double>, std::vector<double>> step(
    const EnvSpec& spec, std::span<const double> state,
    std::span<const double> action);

struct EvaluationResult {
  FitnessVector fitness;  // undiscounted per-objective sums
  FeatureVector feature;
  std::vector<Transition> transitions;
  std::size_t env_steps = 0;
};

/// Deterministic closed-loop rollout of a policy genotype for one episode.
/// Throws std::invalid_argument if the genotype does not match the layout
/// or the layout does not fit the task.
EvaluationResult evaluate(const EnvSpec& spec, const MlpLayout& layout,
                          const Genotype& genotype);

/// Rollouts are independent; the batch fans out across threads and each
/// result lands in its own slot, so output never depends on scheduling.
std::vector<EvaluationResult> evaluate_batch(
    const EnvSpec& spec, const MlpLayout& layout,
    const std::vector<Genotype>& genotypes);

/// Serial reference path; identical output.
std::vector<EvaluationResult> evaluate_batch_serial(
    const EnvSpec& spec, const MlpLayout& layout,
    const std::vector<Genotype>& genotypes);

}  // namespace moqd
