#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moqd/rng.hpp"
#include "moqd/types.hpp"

namespace moqd {

enum class OutputActivation { tanh, identity };

/// Fully-connected network shape: tanh hidden layers, tanh or identity output.
struct MlpLayout {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t output_dim = 0;
  OutputActivation output_activation = OutputActivation::tanh;

  std::size_t layer_count() const { return hidden.size() + 1; }
  std::size_t param_count() const;

  /// Compact id, e.g. "4-64-64-2/tanh"; round-trips through from_id().
  std::string id() const;
  static std::optional<MlpLayout> from_id(std::string_view id);

  bool operator==(const MlpLayout&) const = default;
};

/// Per-layer weight matrices (row-major, out x in) and bias vectors.
struct MlpParams {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

/// Same shapes as MlpParams; also used for Adam moment buffers.
using GradientBundle = MlpParams;

/// flatten/unflatten define the genotype <-> network correspondence:
/// layer by layer, weights row-major then biases.
std::vector<double> flatten(const MlpLayout& layout, const MlpParams& params);
MlpParams unflatten(const MlpLayout& layout, std::span<const double> flat);

GradientBundle zeros_like(const MlpLayout& layout);

/// Weights uniform in +-1/sqrt(fan_in), biases zero.
MlpParams init_params(const MlpLayout& layout, Rng& rng);

Genotype to_genotype(const MlpLayout& layout, const MlpParams& params);

std::vector<double> forward(const MlpLayout& layout, const MlpParams& params,
                            std::span<const double> input);

/// Reverse-mode derivatives of dot(upstream, output) with respect to every
/// parameter and to the input.
std::pair<GradientBundle, std::vector<double>> backward(
    const MlpLayout& layout, const MlpParams& params,
    std::span<const double> input, std::span<const double> upstream);

/// params += step * grads. Plain first-order step; positive step ascends.
void axpy_update(MlpParams& params, const GradientBundle& grads, double step);

void accumulate(GradientBundle& into, const GradientBundle& grads);
void scale(GradientBundle& grads, double factor);

/// Adam moments (beta1 0.9, beta2 0.999, eps 1e-8) with bias correction.
struct AdamState {
  explicit AdamState(const MlpLayout& layout)
      : m(zeros_like(layout)), v(zeros_like(layout)) {}
  GradientBundle m, v;
  std::uint64_t t = 0;
};

/// One bias-corrected ascent step along grads.
void adam_ascend(MlpParams& params, const GradientBundle& grads,
                 AdamState& state, double lr);

}  // namespace moqd
