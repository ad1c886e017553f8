#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "moqd/archive.hpp"
#include "moqd/metrics.hpp"
#include "moqd/variation.hpp"

namespace moqd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { mome, mome_p2c, no_actor, no_crowding, keep_pref, one_hot };

const char* algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(std::string_view s);

/// Fully resolved experiment configuration. Batch-size defaults depend on
/// the algorithm (set by apply_algorithm_defaults): mome runs 256 GA
/// offspring; no-actor replaces the 64 injected offspring with 64 extra PG
/// offspring; every other variant runs 128 GA + 64 PG + 64 injected.
struct RunConfig {
  std::string task = "pointvel2";
  Algorithm algorithm = Algorithm::mome_p2c;
  std::uint64_t seed = 0;
  std::size_t iterations = 4000;

  std::size_t batch_ga = 128;
  std::size_t batch_pg = 64;
  std::size_t batch_actor = 64;

  std::size_t archive_cells = 128;
  std::size_t front_capacity = 50;
  std::size_t cvt_samples = 100000;
  std::size_t cvt_iterations = 50;

  GaParams ga;

  std::vector<std::size_t> policy_hidden = {64, 64};
  std::vector<std::size_t> critic_hidden = {256, 256};
  std::size_t replay_capacity = 1000000;
  std::size_t critic_batch = 256;
  double critic_lr = 3e-4;
  double actor_lr = 3e-4;
  double policy_lr = 1e-3;
  std::size_t critic_steps = 300;
  std::size_t pg_steps = 100;
  double policy_noise = 0.2;
  double noise_clip = 0.2;
  double discount = 0.99;
  double tau = 0.005;
  std::size_t policy_delay = 2;

  std::optional<FitnessVector> ref_point;  // task default when unset
  std::string out_dir = "out";
  std::size_t snapshot_every = 50;  // 0: final snapshot only

  std::size_t batch_total() const { return batch_ga + batch_pg + batch_actor; }
};

/// Flat key=value file; '#'/';' comments and [section] headers are allowed.
/// Unknown keys are rejected. Throws ConfigError.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

/// Resets batch sizes to the algorithm's defaults (after changing algorithm).
void apply_algorithm_defaults(RunConfig& cfg);

/// Throws ConfigError on any contract violation (unknown task, batch-size
/// constraints, zero capacity, ...).
void validate(const RunConfig& cfg);

std::string resolved_config_text(const RunConfig& cfg);

/// Passed to the observer after initialisation (iteration 0) and after each
/// loop iteration. Spans stay valid only during the callback.
struct IterationReport {
  std::uint64_t iteration = 0;
  const MoArchive* archive = nullptr;
  metrics::MetricsRow row;
  std::span<const Solution> offspring;    // evaluated this iteration
  std::span<const Solution> pg_parents;   // parents of the PG offspring
  std::size_t buffer_size = 0;
  std::uint64_t critic_steps = 0;
};

using RunObserver = std::function<void(const IterationReport&)>;

struct RunArtifacts {
  std::string metrics_csv;
  std::vector<std::string> snapshot_paths;  // periodic plus final
  std::string resolved_config;
};

/// Executes the configured algorithm. Deterministic: the root seed and the
/// named rng substreams fully determine every output byte.
RunArtifacts run(const RunConfig& cfg, const RunObserver& observer = {});

}  // namespace moqd
