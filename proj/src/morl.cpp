#include "moqd/morl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace moqd {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0)
    throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(t));
    size_ = ring_.size();
    cursor_ = size_ % capacity_;
  } else {
    ring_[cursor_] = std::move(t);
    cursor_ = (cursor_ + 1) % capacity_;
  }
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n,
                                                    Rng& rng) const {
  if (size_ == 0)
    throw std::invalid_argument("ReplayBuffer: sample from empty buffer");
  std::vector<const Transition*> batch;
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    batch.push_back(&ring_[rng.uniform_index(size_)]);
  return batch;
}

Preference sample_preference(Rng& rng, std::size_t m) {
  if (m < 2)
    throw std::invalid_argument("sample_preference: m must be >= 2");
  Preference p;
  p.weights.resize(m);
  double total = 0.0;
  for (auto& w : p.weights) {
    w = -std::log(1.0 - rng.uniform());  // Exp(1)
    total += w;
  }
  for (auto& w : p.weights) w /= total;
  return p;
}

Preference one_hot_preference(std::size_t m, std::size_t objective) {
  Preference p;
  p.weights.assign(m, 0.0);
  p.weights.at(objective) = 1.0;
  return p;
}

std::vector<Preference> actor_preference_batch(std::size_t n_a, std::size_t m,
                                               Rng& rng) {
  if (n_a < m)
    throw std::invalid_argument(
        "actor_preference_batch: n_a must be at least m");
  std::vector<Preference> prefs;
  prefs.reserve(n_a);
  for (std::size_t i = 0; i + m < n_a; ++i)
    prefs.push_back(sample_preference(rng, m));
  for (std::size_t j = 0; j < m; ++j)
    prefs.push_back(one_hot_preference(m, j));
  return prefs;
}

RewardNormalizer::RewardNormalizer(std::size_t m)
    : mean_(m, 0.0), m2_(m, 0.0) {}

void RewardNormalizer::update(std::span<const double> reward) {
  if (reward.size() != mean_.size())
    throw std::invalid_argument("RewardNormalizer: reward length mismatch");
  ++count_;
  for (std::size_t j = 0; j < mean_.size(); ++j) {
    const double delta = reward[j] - mean_[j];
    mean_[j] += delta / static_cast<double>(count_);
    m2_[j] += delta * (reward[j] - mean_[j]);
  }
}

std::vector<double> RewardNormalizer::apply(
    std::span<const double> reward) const {
  std::vector<double> out(reward.begin(), reward.end());
  if (count_ < 2) return out;  // warm-up: identity
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double var = m2_[j] / static_cast<double>(count_);
    out[j] = (out[j] - mean_[j]) / std::sqrt(var + 1e-8);
  }
  return out;
}

namespace {

MlpLayout make_layout(std::size_t in, std::vector<std::size_t> hidden,
                      std::size_t out, OutputActivation act) {
  MlpLayout layout;
  layout.input_dim = in;
  layout.hidden = std::move(hidden);
  layout.output_dim = out;
  layout.output_activation = act;
  return layout;
}

std::vector<double> concat2(std::span<const double> a,
                            std::span<const double> b) {
  std::vector<double> v;
  v.reserve(a.size() + b.size());
  v.insert(v.end(), a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  return v;
}

std::vector<double> concat3(std::span<const double> a,
                            std::span<const double> b,
                            std::span<const double> c) {
  std::vector<double> v;
  v.reserve(a.size() + b.size() + c.size());
  v.insert(v.end(), a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  v.insert(v.end(), c.begin(), c.end());
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

constexpr std::size_t kGradChunk = 32;

// Deterministic chunked map-reduce over a batch: each chunk accumulates its
// own bundle serially; chunks run in parallel; bundles merge in chunk order.
template <typename PerItem>
GradientBundle chunked_grad(const MlpLayout& layout, std::size_t n,
                            PerItem&& per_item) {
  const std::size_t n_chunks = (n + kGradChunk - 1) / kGradChunk;
  std::vector<GradientBundle> partial(n_chunks);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < n_chunks; ++c) {
    GradientBundle acc = zeros_like(layout);
    const std::size_t hi = std::min(n, (c + 1) * kGradChunk);
    for (std::size_t i = c * kGradChunk; i < hi; ++i) per_item(i, acc);
    partial[c] = std::move(acc);
  }
  GradientBundle total = zeros_like(layout);
  for (auto& p : partial) accumulate(total, p);
  return total;
}

}  // namespace

PreferenceCriticPair::PreferenceCriticPair(std::size_t state_dim_,
                                           std::size_t action_dim_,
                                           std::size_t objectives_,
                                           std::vector<std::size_t> actor_hidden,
                                           std::vector<std::size_t> critic_hidden,
                                           Rng& rng)
    : state_dim(state_dim_),
      action_dim(action_dim_),
      objectives(objectives_),
      actor_layout(make_layout(state_dim_ + objectives_,
                               std::move(actor_hidden), action_dim_,
                               OutputActivation::tanh)),
      critic_layout(make_layout(state_dim_ + action_dim_ + objectives_,
                                std::move(critic_hidden), objectives_,
                                OutputActivation::identity)),
      actor(init_params(actor_layout, rng)),
      critic1(init_params(critic_layout, rng)),
      critic2(init_params(critic_layout, rng)),
      actor_target(actor),
      critic1_target(critic1),
      critic2_target(critic2),
      actor_adam(actor_layout),
      critic1_adam(critic_layout),
      critic2_adam(critic_layout) {}

double critic_update(PreferenceCriticPair& pair,
                     std::span<const Transition* const> batch, Rng& rng,
                     const RewardNormalizer& normalizer,
                     const TrainConfig& cfg) {
  if (batch.empty())
    throw std::invalid_argument("critic_update: empty batch");
  const std::size_t n = batch.size();
  const std::size_t m = pair.objectives;

  // Draw all randomness up front, in batch order, so the heavy passes can
  // fan out without touching the rng.
  std::vector<Preference> prefs;
  prefs.reserve(n);
  std::vector<double> noise(n * pair.action_dim);
  for (std::size_t i = 0; i < n; ++i) {
    prefs.push_back(cfg.fixed_pref ? *cfg.fixed_pref
                                   : sample_preference(rng, m));
    for (std::size_t j = 0; j < pair.action_dim; ++j)
      noise[i * pair.action_dim + j] =
          std::clamp(cfg.policy_noise * rng.normal(), -cfg.noise_clip,
                     cfg.noise_clip);
  }

  std::vector<double> targets(n), err1(n), err2(n);
  std::vector<std::vector<double>> inputs(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = *batch[i];
    const auto& w = prefs[i].weights;

    auto next_in = concat2(t.next_state, w);
    auto a_next = forward(pair.actor_layout, pair.actor_target, next_in);
    for (std::size_t j = 0; j < a_next.size(); ++j)
      a_next[j] =
          std::clamp(a_next[j] + noise[i * pair.action_dim + j], -1.0, 1.0);

    const auto target_in = concat3(t.next_state, a_next, w);
    const double q1t =
        dot(w, forward(pair.critic_layout, pair.critic1_target, target_in));
    const double q2t =
        dot(w, forward(pair.critic_layout, pair.critic2_target, target_in));
    const auto r = normalizer.apply(t.reward);
    targets[i] = dot(w, r) + cfg.gamma * (t.terminal ? 0.0 : 1.0) *
                                 std::min(q1t, q2t);

    inputs[i] = concat3(t.state, t.action, w);
    err1[i] = dot(w, forward(pair.critic_layout, pair.critic1, inputs[i])) -
              targets[i];
    err2[i] = dot(w, forward(pair.critic_layout, pair.critic2, inputs[i])) -
              targets[i];
  }

  // loss = mean over batch and both critics of the squared projection error;
  // dLoss/dq_i = err_i * w / n for each critic.
  const double inv_n = 1.0 / static_cast<double>(n);
  auto grads_for = [&](const MlpParams& critic, const std::vector<double>& err) {
    return chunked_grad(pair.critic_layout, n,
                        [&](std::size_t i, GradientBundle& acc) {
                          std::vector<double> upstream(m);
                          for (std::size_t j = 0; j < m; ++j)
                            upstream[j] = err[i] * prefs[i].weights[j] * inv_n;
                          auto [g, ignore] = backward(pair.critic_layout, critic,
                                                      inputs[i], upstream);
                          accumulate(acc, g);
                        });
  };
  GradientBundle g1 = grads_for(pair.critic1, err1);
  GradientBundle g2 = grads_for(pair.critic2, err2);
  scale(g1, -1.0);  // descend the loss
  scale(g2, -1.0);
  adam_ascend(pair.critic1, g1, pair.critic1_adam, cfg.critic_lr);
  adam_ascend(pair.critic2, g2, pair.critic2_adam, cfg.critic_lr);
  pair.critic_steps += 1;

  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    loss += err1[i] * err1[i] + err2[i] * err2[i];
  return loss / (2.0 * static_cast<double>(n));
}

double actor_update(PreferenceCriticPair& pair,
                    std::span<const Transition* const> batch, Rng& rng,
                    const TrainConfig& cfg) {
  if (batch.empty())
    throw std::invalid_argument("actor_update: empty batch");
  const std::size_t n = batch.size();
  const std::size_t m = pair.objectives;

  std::vector<Preference> prefs;
  prefs.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    prefs.push_back(cfg.fixed_pref ? *cfg.fixed_pref
                                   : sample_preference(rng, m));

  std::vector<double> objective(n, 0.0);
  GradientBundle grads = chunked_grad(
      pair.actor_layout, n, [&](std::size_t i, GradientBundle& acc) {
        const Transition& t = *batch[i];
        const auto& w = prefs[i].weights;
        const auto actor_in = concat2(t.state, w);
        const auto action = forward(pair.actor_layout, pair.actor, actor_in);
        const auto critic_in = concat3(t.state, action, w);
        objective[i] =
            dot(w, forward(pair.critic_layout, pair.critic1, critic_in));

        auto [unused, in_grad] =
            backward(pair.critic_layout, pair.critic1, critic_in, w);
        std::span<const double> dJ_da(in_grad.data() + pair.state_dim,
                                      pair.action_dim);
        auto [g, ignore] = backward(pair.actor_layout, pair.actor, actor_in,
                                    dJ_da);
        accumulate(acc, g);
      });
  scale(grads, 1.0 / static_cast<double>(n));
  adam_ascend(pair.actor, grads, pair.actor_adam, cfg.actor_lr);

  double j = 0.0;
  for (double v : objective) j += v;
  return j / static_cast<double>(n);
}

namespace {

void soft_update(MlpParams& target, const MlpParams& online, double tau) {
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    for (std::size_t i = 0; i < target.weights[l].size(); ++i)
      target.weights[l][i] =
          tau * online.weights[l][i] + (1.0 - tau) * target.weights[l][i];
    for (std::size_t i = 0; i < target.biases[l].size(); ++i)
      target.biases[l][i] =
          tau * online.biases[l][i] + (1.0 - tau) * target.biases[l][i];
  }
}

}  // namespace

void soft_update_targets(PreferenceCriticPair& pair, double tau) {
  soft_update(pair.actor_target, pair.actor, tau);
  soft_update(pair.critic1_target, pair.critic1, tau);
  soft_update(pair.critic2_target, pair.critic2, tau);
}

void train_networks(PreferenceCriticPair& pair, const ReplayBuffer& buffer,
                    Rng& rng, const RewardNormalizer& normalizer,
                    const TrainConfig& cfg, std::size_t n_critic_steps) {
  for (std::size_t step = 0; step < n_critic_steps; ++step) {
    const auto batch = buffer.sample(cfg.batch_size, rng);
    critic_update(pair, batch, rng, normalizer, cfg);
    if (pair.critic_steps % cfg.policy_delay == 0) {
      actor_update(pair, batch, rng, cfg);
      soft_update_targets(pair, cfg.tau);
    }
  }
}

Genotype pg_variation(const Genotype& genotype, const Preference& pref,
                      const PreferenceCriticPair& pair,
                      const ReplayBuffer& buffer, std::size_t steps, double lr,
                      std::size_t minibatch, Rng& rng) {
  if (buffer.size() == 0)
    throw std::invalid_argument("pg_variation: empty replay buffer");
  if (!is_valid_preference(pref, pair.objectives))
    throw std::invalid_argument("pg_variation: invalid preference");
  const auto layout = MlpLayout::from_id(genotype.layout_id);
  if (!layout || layout->input_dim != pair.state_dim ||
      layout->output_dim != pair.action_dim ||
      layout->param_count() != genotype.params.size())
    throw std::invalid_argument("pg_variation: genotype layout mismatch");
  if (steps == 0) return genotype;

  MlpParams policy = unflatten(*layout, genotype.params);
  AdamState adam(*layout);
  const auto& w = pref.weights;
  const double inv_b = 1.0 / static_cast<double>(minibatch);

  for (std::size_t step = 0; step < steps; ++step) {
    const auto batch = buffer.sample(minibatch, rng);
    GradientBundle grads = zeros_like(*layout);
    for (const Transition* t : batch) {
      const auto action = forward(*layout, policy, t->state);
      const auto critic_in = concat3(t->state, action, w);
      auto [unused, in_grad] =
          backward(pair.critic_layout, pair.critic1, critic_in, w);
      std::span<const double> dJ_da(in_grad.data() + pair.state_dim,
                                    pair.action_dim);
      auto [g, ignore] = backward(*layout, policy, t->state, dJ_da);
      accumulate(grads, g);
    }
    scale(grads, inv_b);
    adam_ascend(policy, grads, adam, lr);
  }
  return to_genotype(*layout, policy);
}

namespace {

std::vector<Genotype> pg_batch_impl(const std::vector<Genotype>& genotypes,
                                    const std::vector<Preference>& prefs,
                                    const PreferenceCriticPair& pair,
                                    const ReplayBuffer& buffer,
                                    std::size_t steps, double lr,
                                    std::size_t minibatch,
                                    std::span<const std::uint64_t> seeds,
                                    bool parallel) {
  if (genotypes.size() != prefs.size() || genotypes.size() != seeds.size())
    throw std::invalid_argument("pg_variation_batch: size mismatch");
  std::vector<Genotype> offspring(genotypes.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < genotypes.size(); ++i) {
      Rng rng(seeds[i]);
      offspring[i] = pg_variation(genotypes[i], prefs[i], pair, buffer, steps,
                                  lr, minibatch, rng);
    }
  } else {
    for (std::size_t i = 0; i < genotypes.size(); ++i) {
      Rng rng(seeds[i]);
      offspring[i] = pg_variation(genotypes[i], prefs[i], pair, buffer, steps,
                                  lr, minibatch, rng);
    }
  }
  return offspring;
}

}  // namespace

std::vector<Genotype> pg_variation_batch(
    const std::vector<Genotype>& genotypes,
    const std::vector<Preference>& prefs, const PreferenceCriticPair& pair,
    const ReplayBuffer& buffer, std::size_t steps, double lr,
    std::size_t minibatch, std::span<const std::uint64_t> seeds) {
  return pg_batch_impl(genotypes, prefs, pair, buffer, steps, lr, minibatch,
                       seeds, true);
}

std::vector<Genotype> pg_variation_batch_serial(
    const std::vector<Genotype>& genotypes,
    const std::vector<Preference>& prefs, const PreferenceCriticPair& pair,
    const ReplayBuffer& buffer, std::size_t steps, double lr,
    std::size_t minibatch, std::span<const std::uint64_t> seeds) {
  return pg_batch_impl(genotypes, prefs, pair, buffer, steps, lr, minibatch,
                       seeds, false);
}

Genotype inject_actor(const MlpLayout& actor_layout, const MlpParams& actor,
                      const Preference& pref) {
  const std::size_t m = pref.weights.size();
  if (actor_layout.input_dim <= m)
    throw std::invalid_argument("inject_actor: actor input too small");
  const std::size_t state_dim = actor_layout.input_dim - m;

  MlpLayout policy_layout = actor_layout;
  policy_layout.input_dim = state_dim;

  MlpParams policy = actor;
  const std::size_t out0 = actor_layout.hidden.empty()
                               ? actor_layout.output_dim
                               : actor_layout.hidden.front();
  std::vector<double> w_state(out0 * state_dim);
  for (std::size_t r = 0; r < out0; ++r) {
    const double* row = actor.weights[0].data() + r * actor_layout.input_dim;
    for (std::size_t c = 0; c < state_dim; ++c)
      w_state[r * state_dim + c] = row[c];
    double bias = actor.biases[0][r];
    for (std::size_t j = 0; j < m; ++j)
      bias += row[state_dim + j] * pref.weights[j];
    policy.biases[0][r] = bias;
  }
  policy.weights[0] = std::move(w_state);
  return to_genotype(policy_layout, policy);
}

}  // namespace moqd
