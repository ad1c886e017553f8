#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace moqd {

/// Per-objective undiscounted episode returns.
using FitnessVector = std::vector<double>;

/// Behaviour descriptor; every component lies in [0, 1].
using FeatureVector = std::vector<double>;

/// How a solution was produced.
enum class Origin { random, ga, pg, actor_injection };

const char* origin_name(Origin o);
std::optional<Origin> origin_from_name(std::string_view s);

/// Simplex weight vector over the objectives (entries >= 0, summing to 1).
struct Preference {
  std::vector<double> weights;
};

bool is_valid_preference(const Preference& p, std::size_t m);

/// Flat parameter vector of a policy network plus the id of the layout it
/// instantiates (see MlpLayout::id()).
struct Genotype {
  std::vector<double> params;
  std::string layout_id;
};

/// An evaluated genotype. Fitness and feature come from exactly one rollout.
struct Solution {
  Genotype genotype;
  FitnessVector fitness;
  FeatureVector feature;
  Origin origin = Origin::random;
  std::optional<Preference> pref;  // preference of the last PG variation, if any
};

/// One environment interaction.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  std::vector<double> reward;
  std::vector<double> next_state;
  bool terminal = false;
};

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

/// Shortest decimal form that round-trips the exact double value.
std::string fmt_double(double v);

/// Strict double parse of a whole token; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);

}  // namespace moqd
