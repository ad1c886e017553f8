#include "moqd/envs.hpp"

#include <cmath>

#include <stdexcept>

#include "doctest.h"
#include "moqd/pareto.hpp"
#include "moqd/rng.hpp"

using namespace moqd;

namespace {

MlpLayout policy_layout(const EnvSpec& spec, std::vector<std::size_t> hidden) {
  MlpLayout l;
  l.input_dim = spec.state_dim;
  l.hidden = std::move(hidden);
  l.output_dim = spec.action_dim;
  l.output_activation = OutputActivation::tanh;
  return l;
}

// Single tanh layer with saturating biases: emits a constant action.
Genotype constant_action_policy(const MlpLayout& layout, double bias_x,
                                double bias_y) {
  MlpParams p;
  p.weights = {std::vector<double>(layout.output_dim * layout.input_dim, 0.0)};
  p.biases = {{bias_x, bias_y}};
  return to_genotype(layout, p);
}

}  // namespace

TEST_CASE("task registry") {
  REQUIRE(make_env("pointvel2").has_value());
  REQUIRE(make_env("pointvel3").has_value());
  CHECK_FALSE(make_env("walker").has_value());
  CHECK(make_env("pointvel2")->objectives == 2);
  CHECK(make_env("pointvel3")->objectives == 3);
  CHECK(make_env("pointvel2")->episode_len == 100);
}

TEST_CASE("reset returns the origin at rest") {
  const auto spec = *make_env("pointvel2");
  CHECK(reset(spec) == std::vector<double>{0, 0, 0, 0});
  CHECK(reset(*make_env("pointvel3")) == std::vector<double>{0, 0, 0, 0});
  CHECK(reset(spec) == reset(spec));
}

TEST_CASE("one-step dynamics arithmetic") {
  const auto spec = *make_env("pointvel2");

  auto [s_rest, r_rest] =
      step(spec, std::vector<double>{0, 0, 0, 0}, std::vector<double>{0, 0});
  CHECK(s_rest == std::vector<double>{0, 0, 0, 0});
  CHECK(r_rest == std::vector<double>{0, 0});

  auto [s1, r1] =
      step(spec, std::vector<double>{0, 0, 0, 0}, std::vector<double>{1, 0});
  CHECK(s1[2] == doctest::Approx(0.1));
  CHECK(s1[0] == doctest::Approx(0.01));
  CHECK(r1[0] == doctest::Approx(0.1));
  CHECK(r1[1] == doctest::Approx(-1.0));

  const auto spec3 = *make_env("pointvel3");
  auto [s3, r3] =
      step(spec3, std::vector<double>{0, 0, 0, 0}, std::vector<double>{0, 0});
  CHECK(r3 == std::vector<double>{0, 0, 0});

  // Out-of-box actions are clipped before use.
  auto [s_clip, r_clip] =
      step(spec, std::vector<double>{0, 0, 0, 0}, std::vector<double>{5, 0});
  CHECK(s_clip[2] == doctest::Approx(0.1));
  CHECK(r_clip[1] == doctest::Approx(-1.0));

  CHECK_THROWS_AS(step(spec, std::vector<double>{0, 0, 0},
                       std::vector<double>{0, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(step(spec, std::vector<double>{0, 0, 0, NAN},
                       std::vector<double>{0, 0}),
                  std::invalid_argument);
}

TEST_CASE("sustained thrust saturates at vmax") {
  const auto spec = *make_env("pointvel2");
  std::vector<double> s{0, 0, 0, 0};
  for (int t = 0; t < 30; ++t)
    s = step(spec, s, std::vector<double>{1, 0}).first;
  CHECK(s[2] == doctest::Approx(1.0));
  const auto r = step(spec, s, std::vector<double>{1, 0}).second;
  CHECK(r[0] == doctest::Approx(1.0));
}

TEST_CASE("zero policy rollout is perfect stasis") {
  const auto spec = *make_env("pointvel2");
  const auto layout = policy_layout(spec, {8, 8});
  Genotype zero;
  zero.params.assign(layout.param_count(), 0.0);
  zero.layout_id = layout.id();
  const auto result = evaluate(spec, layout, zero);
  CHECK(result.fitness == FitnessVector{0, 0});
  CHECK(result.feature == FeatureVector{0, 0});
  CHECK(result.transitions.size() == 100);
  CHECK(result.env_steps == 100);
}

TEST_CASE("constant-thrust rollout matches the closed form") {
  const auto spec = *make_env("pointvel2");
  const auto layout = policy_layout(spec, {});
  // tanh(20) rounds to 1.0 in double precision, so the action is exactly
  // (1, 0) and the energy objective is exactly -T.
  const auto genotype = constant_action_policy(layout, 20.0, 0.0);
  const auto result = evaluate(spec, layout, genotype);
  // v_x ramps 0.1, 0.2, ... for ten steps, then rides vmax = 1:
  // sum = 4.5 + 91 * 1 = 95.5.
  CHECK(result.fitness[0] == doctest::Approx(95.5).epsilon(1e-9));
  CHECK(result.fitness[1] == doctest::Approx(-100.0));
  CHECK(result.feature[0] == doctest::Approx(1.0));
  CHECK(result.feature[1] == doctest::Approx(0.0));
}

TEST_CASE("evaluation is deterministic and feature stays in the unit box") {
  const auto spec = *make_env("pointvel3");
  const auto layout = policy_layout(spec, {8, 8});
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const auto genotype = to_genotype(layout, init_params(layout, rng));
    const auto a = evaluate(spec, layout, genotype);
    const auto b = evaluate(spec, layout, genotype);
    CHECK(a.fitness == b.fitness);
    CHECK(a.feature == b.feature);
    for (double v : a.feature) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("velocity and fitness stay within the analytic bounds") {
  const auto spec = *make_env("pointvel2");
  const auto layout = policy_layout(spec, {8});
  Rng rng(5);
  const auto [ref, ideal] = reward_bounds(spec);
  for (int rep = 0; rep < 20; ++rep) {
    auto params = init_params(layout, rng);
    for (auto& w : params.weights)
      for (auto& v : w) v *= 10.0;  // spicier policies
    const auto result = evaluate(spec, layout, to_genotype(layout, params));
    for (const auto& t : result.transitions) {
      CHECK(std::abs(t.next_state[2]) <= spec.vmax + 1e-12);
      CHECK(std::abs(t.next_state[3]) <= spec.vmax + 1e-12);
    }
    for (std::size_t i = 0; i < result.fitness.size(); ++i) {
      CHECK(result.fitness[i] > ref[i]);
      CHECK(result.fitness[i] < ideal[i] + 1e-12);
    }
  }
}

TEST_CASE("max-thrust and zero policies are mutually non-dominated") {
  const auto spec = *make_env("pointvel2");
  const auto layout = policy_layout(spec, {});
  const auto thrust = evaluate(spec, layout, constant_action_policy(layout, 20, 0));
  Genotype zero;
  zero.params.assign(layout.param_count(), 0.0);
  zero.layout_id = layout.id();
  const auto still = evaluate(spec, layout, zero);
  CHECK_FALSE(pareto::dominates(thrust.fitness, still.fitness));
  CHECK_FALSE(pareto::dominates(still.fitness, thrust.fitness));
}

TEST_CASE("batch evaluation equals the serial reference") {
  const auto spec = *make_env("pointvel2");
  const auto layout = policy_layout(spec, {8, 8});
  std::vector<Genotype> genotypes;
  Rng rng(6);
  for (int i = 0; i < 32; ++i)
    genotypes.push_back(to_genotype(layout, init_params(layout, rng)));
  const auto par = evaluate_batch(spec, layout, genotypes);
  const auto ser = evaluate_batch_serial(spec, layout, genotypes);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].fitness == ser[i].fitness);
    CHECK(par[i].feature == ser[i].feature);
  }
}
