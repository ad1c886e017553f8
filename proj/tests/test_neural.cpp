#include "moqd/neural.hpp"

#include <cmath>

#include <stdexcept>

#include "doctest.h"

using namespace moqd;

namespace {

MlpLayout layout_of(std::size_t in, std::vector<std::size_t> hidden,
                    std::size_t out, OutputActivation act) {
  MlpLayout l;
  l.input_dim = in;
  l.hidden = std::move(hidden);
  l.output_dim = out;
  l.output_activation = act;
  return l;
}

MlpParams random_params(const MlpLayout& layout, std::uint64_t seed) {
  Rng rng(seed);
  return init_params(layout, rng);
}

double scalar_surrogate(const MlpLayout& layout, const MlpParams& params,
                        const std::vector<double>& input,
                        const std::vector<double>& upstream) {
  const auto out = forward(layout, params, input);
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += upstream[i] * out[i];
  return s;
}

// Central finite differences through the flat parameter view.
void check_grads_fd(const MlpLayout& layout, const MlpParams& params,
                    const std::vector<double>& input,
                    const std::vector<double>& upstream) {
  constexpr double h = 1e-5;
  const auto [grads, in_grad] = backward(layout, params, input, upstream);
  const auto flat_g = flatten(layout, grads);
  auto flat_p = flatten(layout, params);
  for (std::size_t i = 0; i < flat_p.size(); ++i) {
    const double saved = flat_p[i];
    flat_p[i] = saved + h;
    const double up = scalar_surrogate(layout, unflatten(layout, flat_p), input, upstream);
    flat_p[i] = saved - h;
    const double dn = scalar_surrogate(layout, unflatten(layout, flat_p), input, upstream);
    flat_p[i] = saved;
    const double fd = (up - dn) / (2.0 * h);
    const double scale = std::max({1.0, std::abs(fd), std::abs(flat_g[i])});
    CHECK(std::abs(flat_g[i] - fd) / scale < 1e-4);
  }
  for (std::size_t i = 0; i < input.size(); ++i) {
    auto in = input;
    in[i] = input[i] + h;
    const double up = scalar_surrogate(layout, params, in, upstream);
    in[i] = input[i] - h;
    const double dn = scalar_surrogate(layout, params, in, upstream);
    const double fd = (up - dn) / (2.0 * h);
    const double scale = std::max({1.0, std::abs(fd), std::abs(in_grad[i])});
    CHECK(std::abs(in_grad[i] - fd) / scale < 1e-4);
  }
}

}  // namespace

TEST_CASE("layout ids round-trip and count parameters") {
  const auto layout = layout_of(4, {64, 64}, 2, OutputActivation::tanh);
  CHECK(layout.id() == "4-64-64-2/tanh");
  CHECK(MlpLayout::from_id("4-64-64-2/tanh") == layout);
  CHECK(layout.param_count() == 4 * 64 + 64 + 64 * 64 + 64 + 64 * 2 + 2);

  const auto critic = layout_of(8, {256, 256}, 2, OutputActivation::identity);
  CHECK(MlpLayout::from_id(critic.id()) == critic);

  CHECK_FALSE(MlpLayout::from_id("4-64").has_value());
  CHECK_FALSE(MlpLayout::from_id("4/tanh").has_value());
  CHECK_FALSE(MlpLayout::from_id("4-0-2/tanh").has_value());
  CHECK_FALSE(MlpLayout::from_id("4-a-2/tanh").has_value());
}

TEST_CASE("flatten and unflatten are exact inverses") {
  const auto layout = layout_of(3, {5, 4}, 2, OutputActivation::tanh);
  const auto params = random_params(layout, 1);
  const auto flat = flatten(layout, params);
  REQUIRE(flat.size() == layout.param_count());
  const auto back = unflatten(layout, flat);
  CHECK(back.weights == params.weights);
  CHECK(back.biases == params.biases);

  Rng rng(2);
  std::vector<double> raw(layout.param_count());
  for (auto& v : raw) v = rng.normal();
  CHECK(flatten(layout, unflatten(layout, raw)) == raw);

  CHECK_THROWS_AS(unflatten(layout, std::vector<double>(3, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("forward worked examples") {
  const auto zero_layout = layout_of(2, {3}, 2, OutputActivation::tanh);
  const GradientBundle zero = zeros_like(zero_layout);
  CHECK(forward(zero_layout, zero, std::vector<double>{0.3, -0.7}) ==
        std::vector<double>{0.0, 0.0});

  const auto lin = layout_of(1, {}, 1, OutputActivation::identity);
  MlpParams ident;
  ident.weights = {{1.0}};
  ident.biases = {{0.0}};
  CHECK(forward(lin, ident, std::vector<double>{2.0}) ==
        std::vector<double>{2.0});

  const auto th = layout_of(1, {}, 1, OutputActivation::tanh);
  MlpParams biased;
  biased.weights = {{1.0}};
  biased.biases = {{0.5}};
  const auto out = forward(th, biased, std::vector<double>{0.0});
  CHECK(out[0] == doctest::Approx(std::tanh(0.5)));
  CHECK(out[0] == doctest::Approx(0.4621).epsilon(1e-4));

  CHECK_THROWS_AS(forward(th, biased, std::vector<double>{1.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("backward on a linear scalar net") {
  const auto lin = layout_of(1, {}, 1, OutputActivation::identity);
  MlpParams p;
  p.weights = {{0.7}};
  p.biases = {{0.0}};
  const auto [grads, in_grad] =
      backward(lin, p, std::vector<double>{3.0}, std::vector<double>{1.0});
  CHECK(grads.weights[0][0] == doctest::Approx(3.0));  // dy/dw = x
  CHECK(grads.biases[0][0] == doctest::Approx(1.0));
  CHECK(in_grad[0] == doctest::Approx(0.7));  // dy/dx = w
}

TEST_CASE("backward matches central finite differences") {
  const std::vector<MlpLayout> layouts = {
      layout_of(4, {8, 6}, 2, OutputActivation::tanh),
      layout_of(6, {10}, 3, OutputActivation::identity),
      layout_of(3, {}, 2, OutputActivation::tanh),
  };
  Rng rng(77);
  for (const auto& layout : layouts) {
    for (int rep = 0; rep < 8; ++rep) {
      const auto params = random_params(layout, 100 + static_cast<std::uint64_t>(rep));
      std::vector<double> input(layout.input_dim), upstream(layout.output_dim);
      for (auto& v : input) v = rng.normal();
      for (auto& v : upstream) v = rng.normal();
      check_grads_fd(layout, params, input, upstream);
    }
  }
}

TEST_CASE("zero upstream gradient yields a zero bundle") {
  const auto layout = layout_of(3, {4}, 2, OutputActivation::tanh);
  const auto params = random_params(layout, 5);
  const auto [grads, in_grad] =
      backward(layout, params, std::vector<double>{0.1, 0.2, 0.3},
               std::vector<double>{0.0, 0.0});
  for (const auto& w : grads.weights)
    for (double v : w) CHECK(v == 0.0);
  for (const auto& b : grads.biases)
    for (double v : b) CHECK(v == 0.0);
  for (double v : in_grad) CHECK(v == 0.0);
}

TEST_CASE("plain axpy step") {
  const auto lin = layout_of(1, {}, 1, OutputActivation::identity);
  MlpParams p;
  p.weights = {{1.0}};
  p.biases = {{0.0}};
  GradientBundle g;
  g.weights = {{2.0}};
  g.biases = {{0.0}};
  axpy_update(p, g, 0.1);
  CHECK(p.weights[0][0] == doctest::Approx(1.2));

  GradientBundle zero = zeros_like(lin);
  auto before = p;
  axpy_update(p, zero, 0.1);
  CHECK(p.weights == before.weights);
}

TEST_CASE("adam step magnitude approaches the learning rate") {
  const auto lin = layout_of(1, {}, 1, OutputActivation::identity);
  MlpParams p;
  p.weights = {{0.0}};
  p.biases = {{0.0}};
  GradientBundle g;
  g.weights = {{2.0}};
  g.biases = {{0.0}};
  AdamState state(lin);
  const double lr = 0.01;
  double prev = p.weights[0][0];
  double last_step = 0.0;
  for (int t = 0; t < 300; ++t) {
    adam_ascend(p, g, state, lr);
    last_step = p.weights[0][0] - prev;
    prev = p.weights[0][0];
  }
  CHECK(last_step == doctest::Approx(lr).epsilon(0.02));
}

TEST_CASE("initialization respects the fan-in bound and the seed") {
  const auto layout = layout_of(16, {8}, 4, OutputActivation::tanh);
  Rng a(9), b(9), c(10);
  const auto pa = init_params(layout, a);
  const auto pb = init_params(layout, b);
  const auto pc = init_params(layout, c);
  CHECK(pa.weights == pb.weights);
  CHECK(pa.weights != pc.weights);
  for (double w : pa.weights[0]) CHECK(std::abs(w) <= 1.0 / 4.0);
  for (double w : pa.weights[1]) CHECK(std::abs(w) <= 1.0 / std::sqrt(8.0));
  for (double b0 : pa.biases[0]) CHECK(b0 == 0.0);
}
