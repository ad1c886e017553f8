#include "moqd/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace moqd {

std::optional<EnvSpec> make_env(std::string_view name) {
  EnvSpec spec;
  spec.name = std::string(name);
  if (name == "pointvel2") {
    spec.objectives = 2;
    spec.ref_point = {-100.0, -200.0};
    spec.ideal_point = {100.0, 0.0};
    return spec;
  }
  if (name == "pointvel3") {
    spec.objectives = 3;
    spec.ref_point = {-100.0, -100.0, -200.0};
    spec.ideal_point = {100.0, 100.0, 0.0};
    return spec;
  }
  return std::nullopt;
}

std::pair<FitnessVector, FitnessVector> reward_bounds(const EnvSpec& spec) {
  return {spec.ref_point, spec.ideal_point};
}

std::vector<double> reset(const EnvSpec& spec) {
  return std::vector<double>(spec.state_dim, 0.0);
}

std::pair<std::vector<double>, std::vector<double>> step(
    const EnvSpec& spec, std::span<const double> state,
    std::span<const double> action) {
  if (state.size() != spec.state_dim)
    throw std::invalid_argument("step: state length mismatch");
  if (!all_finite(state))
    throw std::invalid_argument("step: non-finite state");

  double ax = std::clamp(action.size() > 0 ? action[0] : 0.0, -1.0, 1.0);
  double ay = std::clamp(action.size() > 1 ? action[1] : 0.0, -1.0, 1.0);

  const double vx = std::clamp(state[2] + ax * spec.dt, -spec.vmax, spec.vmax);
  const double vy = std::clamp(state[3] + ay * spec.dt, -spec.vmax, spec.vmax);
  const double x = state[0] + vx * spec.dt;
  const double y = state[1] + vy * spec.dt;

  const double energy = -(ax * ax + ay * ay);
  std::vector<double> reward;
  if (spec.objectives == 2)
    reward = {vx, energy};
  else
    reward = {vx, vy, energy};
  return {std::vector<double>{x, y, vx, vy}, std::move(reward)};
}

EvaluationResult evaluate(const EnvSpec& spec, const MlpLayout& layout,
                          const Genotype& genotype) {
  if (layout.input_dim != spec.state_dim || layout.output_dim != spec.action_dim)
    throw std::invalid_argument("evaluate: layout does not fit the task");
  if (genotype.params.size() != layout.param_count())
    throw std::invalid_argument("evaluate: genotype length mismatch");

  const MlpParams params = unflatten(layout, genotype.params);
  EvaluationResult result;
  result.fitness.assign(spec.objectives, 0.0);
  result.transitions.reserve(spec.episode_len);

  std::size_t x_pos = 0, y_pos = 0;
  std::vector<double> state = reset(spec);
  for (std::size_t t = 0; t < spec.episode_len; ++t) {
    const std::vector<double> action = forward(layout, params, state);
    auto [next_state, reward] = step(spec, state, action);
    for (std::size_t i = 0; i < spec.objectives; ++i)
      result.fitness[i] += reward[i];
    if (next_state[0] > 0.0) ++x_pos;
    if (next_state[1] > 0.0) ++y_pos;
    // Episodes end only by time limit, so bootstrapping stays on.
    result.transitions.push_back(
        Transition{state, action, reward, next_state, false});
    state = std::move(next_state);
  }
  const double T = static_cast<double>(spec.episode_len);
  result.feature = {static_cast<double>(x_pos) / T,
                    static_cast<double>(y_pos) / T};
  result.env_steps = spec.episode_len;
  return result;
}

namespace {

std::vector<EvaluationResult> batch_impl(const EnvSpec& spec,
                                         const MlpLayout& layout,
                                         const std::vector<Genotype>& genotypes,
                                         bool parallel) {
  // Validate up front; an exception must not escape the parallel region.
  if (layout.input_dim != spec.state_dim || layout.output_dim != spec.action_dim)
    throw std::invalid_argument("evaluate_batch: layout does not fit the task");
  for (const auto& g : genotypes)
    if (g.params.size() != layout.param_count())
      throw std::invalid_argument("evaluate_batch: genotype length mismatch");

  std::vector<EvaluationResult> results(genotypes.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < genotypes.size(); ++i)
      results[i] = evaluate(spec, layout, genotypes[i]);
  } else {
    for (std::size_t i = 0; i < genotypes.size(); ++i)
      results[i] = evaluate(spec, layout, genotypes[i]);
  }
  return results;
}

}  // namespace

std::vector<EvaluationResult> evaluate_batch(
    const EnvSpec& spec, const MlpLayout& layout,
    const std::vector<Genotype>& genotypes) {
  return batch_impl(spec, layout, genotypes, true);
}

std::vector<EvaluationResult> evaluate_batch_serial(
    const EnvSpec& spec, const MlpLayout& layout,
    const std::vector<Genotype>& genotypes) {
  return batch_impl(spec, layout, genotypes, false);
}

}  // namespace moqd
