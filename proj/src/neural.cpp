#include "moqd/neural.hpp"

#include <cmath>
#include <stdexcept>

namespace moqd {

namespace {

std::vector<std::size_t> layer_dims(const MlpLayout& layout) {
  std::vector<std::size_t> dims;
  dims.push_back(layout.input_dim);
  dims.insert(dims.end(), layout.hidden.begin(), layout.hidden.end());
  dims.push_back(layout.output_dim);
  return dims;
}

}  // namespace

std::size_t MlpLayout::param_count() const {
  auto dims = layer_dims(*this);
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    n += dims[l + 1] * dims[l] + dims[l + 1];
  return n;
}

std::string MlpLayout::id() const {
  std::string s = std::to_string(input_dim);
  for (std::size_t h : hidden) s += "-" + std::to_string(h);
  s += "-" + std::to_string(output_dim);
  s += output_activation == OutputActivation::tanh ? "/tanh" : "/identity";
  return s;
}

std::optional<MlpLayout> MlpLayout::from_id(std::string_view id) {
  const auto slash = id.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  const std::string_view act = id.substr(slash + 1);
  MlpLayout layout;
  if (act == "tanh")
    layout.output_activation = OutputActivation::tanh;
  else if (act == "identity")
    layout.output_activation = OutputActivation::identity;
  else
    return std::nullopt;

  std::vector<std::size_t> dims;
  std::string_view rest = id.substr(0, slash);
  while (!rest.empty()) {
    const auto dash = rest.find('-');
    const std::string_view tok = rest.substr(0, dash);
    if (tok.empty()) return std::nullopt;
    std::size_t v = 0;
    for (char c : tok) {
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + static_cast<std::size_t>(c - '0');
    }
    if (v == 0) return std::nullopt;
    dims.push_back(v);
    rest = dash == std::string_view::npos ? std::string_view{}
                                          : rest.substr(dash + 1);
  }
  if (dims.size() < 2) return std::nullopt;
  layout.input_dim = dims.front();
  layout.output_dim = dims.back();
  layout.hidden.assign(dims.begin() + 1, dims.end() - 1);
  return layout;
}

std::vector<double> flatten(const MlpLayout& layout, const MlpParams& params) {
  std::vector<double> flat;
  flat.reserve(layout.param_count());
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    flat.insert(flat.end(), params.weights[l].begin(), params.weights[l].end());
    flat.insert(flat.end(), params.biases[l].begin(), params.biases[l].end());
  }
  return flat;
}

MlpParams unflatten(const MlpLayout& layout, std::span<const double> flat) {
  if (flat.size() != layout.param_count())
    throw std::invalid_argument("unflatten: flat parameter size mismatch");
  auto dims = layer_dims(layout);
  MlpParams params;
  std::size_t pos = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t w = dims[l + 1] * dims[l];
    params.weights.emplace_back(flat.begin() + pos, flat.begin() + pos + w);
    pos += w;
    params.biases.emplace_back(flat.begin() + pos,
                               flat.begin() + pos + dims[l + 1]);
    pos += dims[l + 1];
  }
  return params;
}

GradientBundle zeros_like(const MlpLayout& layout) {
  auto dims = layer_dims(layout);
  GradientBundle g;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    g.weights.emplace_back(dims[l + 1] * dims[l], 0.0);
    g.biases.emplace_back(dims[l + 1], 0.0);
  }
  return g;
}

MlpParams init_params(const MlpLayout& layout, Rng& rng) {
  auto dims = layer_dims(layout);
  MlpParams params;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    std::vector<double> w(dims[l + 1] * dims[l]);
    for (auto& x : w) x = rng.uniform(-bound, bound);
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(dims[l + 1], 0.0);
  }
  return params;
}

Genotype to_genotype(const MlpLayout& layout, const MlpParams& params) {
  return Genotype{flatten(layout, params), layout.id()};
}

std::vector<double> forward(const MlpLayout& layout, const MlpParams& params,
                            std::span<const double> input) {
  if (input.size() != layout.input_dim)
    throw std::invalid_argument("forward: input length mismatch");
  auto dims = layer_dims(layout);
  std::vector<double> act(input.begin(), input.end());
  std::vector<double> next;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t in = dims[l], out = dims[l + 1];
    next.assign(out, 0.0);
    const auto& w = params.weights[l];
    for (std::size_t r = 0; r < out; ++r) {
      double z = params.biases[l][r];
      const double* row = w.data() + r * in;
      for (std::size_t c = 0; c < in; ++c) z += row[c] * act[c];
      const bool last = (l + 2 == dims.size());
      next[r] = (!last || layout.output_activation == OutputActivation::tanh)
                    ? std::tanh(z)
                    : z;
    }
    act.swap(next);
  }
  return act;
}

std::pair<GradientBundle, std::vector<double>> backward(
    const MlpLayout& layout, const MlpParams& params,
    std::span<const double> input, std::span<const double> upstream) {
  if (input.size() != layout.input_dim)
    throw std::invalid_argument("backward: input length mismatch");
  if (upstream.size() != layout.output_dim)
    throw std::invalid_argument("backward: upstream length mismatch");

  auto dims = layer_dims(layout);
  const std::size_t n_layers = dims.size() - 1;

  // Forward pass, keeping every layer's activation.
  std::vector<std::vector<double>> acts(n_layers + 1);
  acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t in = dims[l], out = dims[l + 1];
    acts[l + 1].assign(out, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      double z = params.biases[l][r];
      const double* row = params.weights[l].data() + r * in;
      for (std::size_t c = 0; c < in; ++c) z += row[c] * acts[l][c];
      const bool last = (l + 1 == n_layers);
      acts[l + 1][r] =
          (!last || layout.output_activation == OutputActivation::tanh)
              ? std::tanh(z)
              : z;
    }
  }

  GradientBundle grads = zeros_like(layout);
  std::vector<double> delta(upstream.begin(), upstream.end());
  if (layout.output_activation == OutputActivation::tanh) {
    for (std::size_t r = 0; r < delta.size(); ++r)
      delta[r] *= 1.0 - acts[n_layers][r] * acts[n_layers][r];
  }

  for (std::size_t l = n_layers; l-- > 0;) {
    const std::size_t in = dims[l], out = dims[l + 1];
    for (std::size_t r = 0; r < out; ++r) {
      grads.biases[l][r] = delta[r];
      double* grow = grads.weights[l].data() + r * in;
      for (std::size_t c = 0; c < in; ++c) grow[c] = delta[r] * acts[l][c];
    }
    std::vector<double> prev(in, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      const double* row = params.weights[l].data() + r * in;
      for (std::size_t c = 0; c < in; ++c) prev[c] += row[c] * delta[r];
    }
    if (l > 0) {  // hidden layers are tanh
      for (std::size_t c = 0; c < in; ++c)
        prev[c] *= 1.0 - acts[l][c] * acts[l][c];
    }
    delta.swap(prev);
  }
  return {std::move(grads), std::move(delta)};
}

namespace {

void check_shapes(const MlpParams& a, const MlpParams& b) {
  if (a.weights.size() != b.weights.size())
    throw std::invalid_argument("parameter shape mismatch");
  for (std::size_t l = 0; l < a.weights.size(); ++l)
    if (a.weights[l].size() != b.weights[l].size() ||
        a.biases[l].size() != b.biases[l].size())
      throw std::invalid_argument("parameter shape mismatch");
}

}  // namespace

void axpy_update(MlpParams& params, const GradientBundle& grads, double step) {
  check_shapes(params, grads);
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    for (std::size_t i = 0; i < params.weights[l].size(); ++i)
      params.weights[l][i] += step * grads.weights[l][i];
    for (std::size_t i = 0; i < params.biases[l].size(); ++i)
      params.biases[l][i] += step * grads.biases[l][i];
  }
}

void accumulate(GradientBundle& into, const GradientBundle& grads) {
  check_shapes(into, grads);
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    for (std::size_t i = 0; i < into.weights[l].size(); ++i)
      into.weights[l][i] += grads.weights[l][i];
    for (std::size_t i = 0; i < into.biases[l].size(); ++i)
      into.biases[l][i] += grads.biases[l][i];
  }
}

void scale(GradientBundle& grads, double factor) {
  for (auto& w : grads.weights)
    for (auto& x : w) x *= factor;
  for (auto& b : grads.biases)
    for (auto& x : b) x *= factor;
}

void adam_ascend(MlpParams& params, const GradientBundle& grads,
                 AdamState& state, double lr) {
  check_shapes(params, grads);
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  state.t += 1;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      p[i] += lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(params.weights[l], grads.weights[l], state.m.weights[l],
           state.v.weights[l]);
    update(params.biases[l], grads.biases[l], state.m.biases[l],
           state.v.biases[l]);
  }
}

}  // namespace moqd
