#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "moqd/neural.hpp"
#include "moqd/rng.hpp"
#include "moqd/types.hpp"

namespace moqd {

/// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return ring_[i]; }

  /// Uniform with replacement; throws std::invalid_argument when empty.
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

 private:
  std::vector<Transition> ring_;
  std::size_t capacity_ = 0;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
};

/// Uniform draw on the (m-1)-simplex via normalized exponentials; m >= 2.
Preference sample_preference(Rng& rng, std::size_t m);

Preference one_hot_preference(std::size_t m, std::size_t objective);

/// n_a - m uniform simplex draws followed by the m canonical one-hot
/// preferences. Throws std::invalid_argument if n_a < m.
std::vector<Preference> actor_preference_batch(std::size_t n_a, std::size_t m,
                                               Rng& rng);

/// Per-objective running mean/variance (Welford). Applied to rewards inside
/// training only; archive fitness always stays unnormalised.
class RewardNormalizer {
 public:
  explicit RewardNormalizer(std::size_t m);

  void update(std::span<const double> reward);

  /// (r - mean) / sqrt(var + 1e-8); identity until two updates have been seen.
  std::vector<double> apply(std::span<const double> reward) const;

  std::uint64_t count() const { return count_; }

 private:
  std::vector<double> mean_, m2_;
  std::uint64_t count_ = 0;
};

struct TrainConfig {
  double gamma = 0.99;
  double policy_noise = 0.2;
  double noise_clip = 0.2;
  double tau = 0.005;
  double critic_lr = 3e-4;
  double actor_lr = 3e-4;
  std::size_t batch_size = 256;
  std::size_t policy_delay = 2;
  /// When set, every update uses this preference instead of sampling one
  /// per transition (used by the closed-form value tests).
  std::optional<Preference> fixed_pref;
};

/// Preference-conditioned actor (input state+m) and twin vector-valued
/// critics (input state+action+m, output m) with target copies and Adam
/// state. Single-owner during training.
struct PreferenceCriticPair {
  PreferenceCriticPair(std::size_t state_dim, std::size_t action_dim,
                       std::size_t objectives,
                       std::vector<std::size_t> actor_hidden,
                       std::vector<std::size_t> critic_hidden, Rng& rng);

  std::size_t state_dim, action_dim, objectives;
  MlpLayout actor_layout, critic_layout;
  MlpParams actor, critic1, critic2;
  MlpParams actor_target, critic1_target, critic2_target;
  AdamState actor_adam, critic1_adam, critic2_adam;
  std::uint64_t critic_steps = 0;
};

/// One TD3-style twin-critic regression step. Per transition a preference is
/// drawn, the smoothed target action comes from the target actor, and both
/// critics regress their preference-projected output to the scalar target
///   y = w.r + gamma * (1 - terminal) * min_i w.Q_i'(s', a' | w).
/// Returns the mean squared error over the batch and both critics.
double critic_update(PreferenceCriticPair& pair,
                     std::span<const Transition* const> batch, Rng& rng,
                     const RewardNormalizer& normalizer,
                     const TrainConfig& cfg);

/// Deterministic policy-gradient ascent of the actor on
/// mean w.Q_1(s, pi(s|w) | w); returns the surrogate objective estimate.
double actor_update(PreferenceCriticPair& pair,
                    std::span<const Transition* const> batch, Rng& rng,
                    const TrainConfig& cfg);

/// target <- tau * online + (1 - tau) * target, all three networks.
void soft_update_targets(PreferenceCriticPair& pair, double tau);

/// n_critic_steps critic updates; every policy_delay-th one is followed by
/// an actor update and the soft target updates.
void train_networks(PreferenceCriticPair& pair, const ReplayBuffer& buffer,
                    Rng& rng, const RewardNormalizer& normalizer,
                    const TrainConfig& cfg, std::size_t n_critic_steps);

/// Adam ascent of a policy genotype on mean w.Q_1(s, pi(s) | w), one fresh
/// minibatch per step. The parent genotype and the critic stay untouched.
Genotype pg_variation(const Genotype& genotype, const Preference& pref,
                      const PreferenceCriticPair& pair,
                      const ReplayBuffer& buffer, std::size_t steps, double lr,
                      std::size_t minibatch, Rng& rng);

/// One offspring per (genotype, preference, seed) triple, fanned out across
/// threads against the frozen critic; results land in per-offspring slots.
std::vector<Genotype> pg_variation_batch(
    const std::vector<Genotype>& genotypes,
    const std::vector<Preference>& prefs, const PreferenceCriticPair& pair,
    const ReplayBuffer& buffer, std::size_t steps, double lr,
    std::size_t minibatch, std::span<const std::uint64_t> seeds);

/// Serial reference path; identical output.
std::vector<Genotype> pg_variation_batch_serial(
    const std::vector<Genotype>& genotypes,
    const std::vector<Preference>& prefs, const PreferenceCriticPair& pair,
    const ReplayBuffer& buffer, std::size_t steps, double lr,
    std::size_t minibatch, std::span<const std::uint64_t> seeds);

/// Folds a fixed preference into the first-layer bias of the conditioned
/// actor, yielding a plain policy genotype:
///   W [s; w] + B = W_s s + (W_w w + B).
Genotype inject_actor(const MlpLayout& actor_layout, const MlpParams& actor,
                      const Preference& pref);

}  // namespace moqd
