#include "moqd/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "moqd/envs.hpp"
#include "moqd/morl.hpp"
#include "moqd/snapshot.hpp"

namespace moqd {

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::mome: return "mome";
    case Algorithm::mome_p2c: return "mome-p2c";
    case Algorithm::no_actor: return "no-actor";
    case Algorithm::no_crowding: return "no-crowding";
    case Algorithm::keep_pref: return "keep-pref";
    case Algorithm::one_hot: return "one-hot";
  }
  return "unknown";
}

std::optional<Algorithm> algorithm_from_name(std::string_view s) {
  if (s == "mome") return Algorithm::mome;
  if (s == "mome-p2c") return Algorithm::mome_p2c;
  if (s == "no-actor") return Algorithm::no_actor;
  if (s == "no-crowding") return Algorithm::no_crowding;
  if (s == "keep-pref") return Algorithm::keep_pref;
  if (s == "one-hot") return Algorithm::one_hot;
  return std::nullopt;
}

void apply_algorithm_defaults(RunConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::mome:
      cfg.batch_ga = 256;
      cfg.batch_pg = 0;
      cfg.batch_actor = 0;
      break;
    case Algorithm::no_actor:
      cfg.batch_ga = 128;
      cfg.batch_pg = 128;
      cfg.batch_actor = 0;
      break;
    default:
      cfg.batch_ga = 128;
      cfg.batch_pg = 64;
      cfg.batch_actor = 64;
      break;
  }
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return std::string(s.substr(b, e - b));
}

std::size_t parse_size(const std::string& v, const std::string& key) {
  if (v.empty()) throw ConfigError("empty value for " + key);
  std::size_t out = 0;
  for (char c : v) {
    if (c < '0' || c > '9')
      throw ConfigError("bad unsigned value for " + key + ": '" + v + "'");
    out = out * 10 + static_cast<std::size_t>(c - '0');
  }
  return out;
}

double parse_real(const std::string& v, const std::string& key) {
  auto d = parse_double(v);
  if (!d) throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  return *d;
}

std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

std::vector<std::size_t> parse_size_list(const std::string& v,
                                         const std::string& key) {
  std::vector<std::size_t> out;
  if (trim(v).empty()) return out;
  for (const auto& p : split_commas(v)) out.push_back(parse_size(p, key));
  return out;
}

FitnessVector parse_real_list(const std::string& v, const std::string& key) {
  FitnessVector out;
  for (const auto& p : split_commas(v)) out.push_back(parse_real(p, key));
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(xs[i]);
  }
  return s;
}

std::string join_reals(const FitnessVector& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += fmt_double(xs[i]);
  }
  return s;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value,
               bool& batch_ga_set, bool& batch_pg_set, bool& batch_actor_set) {
  if (key == "task") {
    cfg.task = value;
  } else if (key == "algorithm") {
    auto a = algorithm_from_name(value);
    if (!a) throw ConfigError("unknown algorithm '" + value + "'");
    cfg.algorithm = *a;
  } else if (key == "seed") {
    cfg.seed = parse_size(value, key);
  } else if (key == "iterations") {
    cfg.iterations = parse_size(value, key);
  } else if (key == "batch_ga") {
    cfg.batch_ga = parse_size(value, key);
    batch_ga_set = true;
  } else if (key == "batch_pg") {
    cfg.batch_pg = parse_size(value, key);
    batch_pg_set = true;
  } else if (key == "batch_actor") {
    cfg.batch_actor = parse_size(value, key);
    batch_actor_set = true;
  } else if (key == "archive_cells") {
    cfg.archive_cells = parse_size(value, key);
  } else if (key == "front_capacity") {
    cfg.front_capacity = parse_size(value, key);
  } else if (key == "cvt_samples") {
    cfg.cvt_samples = parse_size(value, key);
  } else if (key == "cvt_iterations") {
    cfg.cvt_iterations = parse_size(value, key);
  } else if (key == "ga_sigma_iso") {
    cfg.ga.sigma_iso = parse_real(value, key);
  } else if (key == "ga_sigma_line") {
    cfg.ga.sigma_line = parse_real(value, key);
  } else if (key == "policy_hidden") {
    cfg.policy_hidden = parse_size_list(value, key);
  } else if (key == "critic_hidden") {
    cfg.critic_hidden = parse_size_list(value, key);
  } else if (key == "replay_capacity") {
    cfg.replay_capacity = parse_size(value, key);
  } else if (key == "critic_batch") {
    cfg.critic_batch = parse_size(value, key);
  } else if (key == "critic_lr") {
    cfg.critic_lr = parse_real(value, key);
  } else if (key == "actor_lr") {
    cfg.actor_lr = parse_real(value, key);
  } else if (key == "policy_lr") {
    cfg.policy_lr = parse_real(value, key);
  } else if (key == "critic_steps") {
    cfg.critic_steps = parse_size(value, key);
  } else if (key == "pg_steps") {
    cfg.pg_steps = parse_size(value, key);
  } else if (key == "policy_noise") {
    cfg.policy_noise = parse_real(value, key);
  } else if (key == "noise_clip") {
    cfg.noise_clip = parse_real(value, key);
  } else if (key == "discount") {
    cfg.discount = parse_real(value, key);
  } else if (key == "tau") {
    cfg.tau = parse_real(value, key);
  } else if (key == "policy_delay") {
    cfg.policy_delay = parse_size(value, key);
  } else if (key == "ref_point") {
    if (trim(value).empty())
      cfg.ref_point.reset();
    else
      cfg.ref_point = parse_real_list(value, key);
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else if (key == "snapshot_every") {
    cfg.snapshot_every = parse_size(value, key);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  // Two passes so batch-size defaults follow the algorithm regardless of
  // key order, while explicit batch keys still win.
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section header
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    entries.emplace_back(key, value);
  }

  RunConfig cfg;
  bool ga_set = false, pg_set = false, actor_set = false;
  for (const auto& [key, value] : entries)
    if (key == "algorithm")
      apply_key(cfg, key, value, ga_set, pg_set, actor_set);
  apply_algorithm_defaults(cfg);
  for (const auto& [key, value] : entries) {
    if (key == "algorithm") continue;
    apply_key(cfg, key, value, ga_set, pg_set, actor_set);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

void validate(const RunConfig& cfg) {
  if (!make_env(cfg.task)) throw ConfigError("unknown task '" + cfg.task + "'");
  if (cfg.archive_cells == 0) throw ConfigError("archive_cells must be >= 1");
  if (cfg.front_capacity == 0) throw ConfigError("front_capacity must be >= 1");
  if (cfg.cvt_samples < cfg.archive_cells)
    throw ConfigError("cvt_samples must be >= archive_cells");
  if (cfg.batch_total() == 0) throw ConfigError("total batch must be >= 1");
  if (cfg.algorithm == Algorithm::mome &&
      (cfg.batch_pg != 0 || cfg.batch_actor != 0))
    throw ConfigError("mome requires batch_pg = 0 and batch_actor = 0");
  if (cfg.algorithm == Algorithm::no_actor && cfg.batch_actor != 0)
    throw ConfigError("no-actor requires batch_actor = 0");
  if (cfg.ga.sigma_iso <= 0.0 || cfg.ga.sigma_line <= 0.0)
    throw ConfigError("GA sigmas must be positive");
  if (cfg.algorithm != Algorithm::mome) {
    if (cfg.replay_capacity == 0) throw ConfigError("replay_capacity must be >= 1");
    if (cfg.critic_batch == 0) throw ConfigError("critic_batch must be >= 1");
    if (cfg.policy_delay == 0) throw ConfigError("policy_delay must be >= 1");
  }
  const auto spec = make_env(cfg.task);
  if (cfg.batch_actor > 0 && cfg.batch_actor < spec->objectives)
    throw ConfigError("batch_actor must be 0 or >= the objective count");
  if (cfg.ref_point && cfg.ref_point->size() != spec->objectives)
    throw ConfigError("ref_point length does not match the task");
}

std::string resolved_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "# resolved configuration\n";
  out << "task = " << cfg.task << "\n";
  out << "algorithm = " << algorithm_name(cfg.algorithm) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "iterations = " << cfg.iterations << "\n";
  out << "batch_ga = " << cfg.batch_ga << "\n";
  out << "batch_pg = " << cfg.batch_pg << "\n";
  out << "batch_actor = " << cfg.batch_actor << "\n";
  out << "archive_cells = " << cfg.archive_cells << "\n";
  out << "front_capacity = " << cfg.front_capacity << "\n";
  out << "cvt_samples = " << cfg.cvt_samples << "\n";
  out << "cvt_iterations = " << cfg.cvt_iterations << "\n";
  out << "ga_sigma_iso = " << fmt_double(cfg.ga.sigma_iso) << "\n";
  out << "ga_sigma_line = " << fmt_double(cfg.ga.sigma_line) << "\n";
  out << "policy_hidden = " << join_sizes(cfg.policy_hidden) << "\n";
  out << "critic_hidden = " << join_sizes(cfg.critic_hidden) << "\n";
  out << "replay_capacity = " << cfg.replay_capacity << "\n";
  out << "critic_batch = " << cfg.critic_batch << "\n";
  out << "critic_lr = " << fmt_double(cfg.critic_lr) << "\n";
  out << "actor_lr = " << fmt_double(cfg.actor_lr) << "\n";
  out << "policy_lr = " << fmt_double(cfg.policy_lr) << "\n";
  out << "critic_steps = " << cfg.critic_steps << "\n";
  out << "pg_steps = " << cfg.pg_steps << "\n";
  out << "policy_noise = " << fmt_double(cfg.policy_noise) << "\n";
  out << "noise_clip = " << fmt_double(cfg.noise_clip) << "\n";
  out << "discount = " << fmt_double(cfg.discount) << "\n";
  out << "tau = " << fmt_double(cfg.tau) << "\n";
  out << "policy_delay = " << cfg.policy_delay << "\n";
  out << "ref_point = " << (cfg.ref_point ? join_reals(*cfg.ref_point) : "")
      << "\n";
  out << "out_dir = " << cfg.out_dir << "\n";
  out << "snapshot_every = " << cfg.snapshot_every << "\n";
  out << "# rng audit: substream seed = splitmix64 hash of\n";
  out << "# (seed, stream-name, iteration, index); streams: tessellation,\n";
  out << "# init, selection, ga, pg, actor-sampler, training, per-offspring,\n";
  out << "# eviction\n";
  return out.str();
}

namespace {

struct AlgorithmFlags {
  bool networks;        // buffer + actor-critic training
  bool crowding;        // crowding selection/eviction vs uniform
  bool keep_pref;       // PG reuses parent preference
  bool one_hot;         // PG cycles canonical one-hots
};

AlgorithmFlags flags_for(Algorithm a) {
  switch (a) {
    case Algorithm::mome: return {false, true, false, false};
    case Algorithm::no_crowding: return {true, false, false, false};
    case Algorithm::keep_pref: return {true, true, true, false};
    case Algorithm::one_hot: return {true, true, false, true};
    default: return {true, true, false, false};
  }
}

std::string snapshot_name(std::uint64_t iter) {
  std::string n = std::to_string(iter);
  while (n.size() < 6) n.insert(n.begin(), '0');
  return "snapshot_" + n + ".txt";
}

}  // namespace

RunArtifacts run(const RunConfig& cfg, const RunObserver& observer) {
  validate(cfg);
  const EnvSpec spec = *make_env(cfg.task);
  const auto flags = flags_for(cfg.algorithm);
  const std::size_t m = spec.objectives;

  std::filesystem::create_directories(cfg.out_dir);
  const auto out_path = [&](const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
  };

  RunArtifacts artifacts;
  artifacts.resolved_config = out_path("config.resolved");
  {
    std::ofstream out(artifacts.resolved_config);
    out << resolved_config_text(cfg);
  }

  MlpLayout policy_layout;
  policy_layout.input_dim = spec.state_dim;
  policy_layout.hidden = cfg.policy_hidden;
  policy_layout.output_dim = spec.action_dim;
  policy_layout.output_activation = OutputActivation::tanh;

  Tessellation tess = build_cvt(spec.feature_dim, cfg.archive_cells,
                                cfg.cvt_samples, cfg.cvt_iterations, cfg.seed);
  MoArchive archive(std::move(tess), cfg.front_capacity);

  const pareto::ReferencePoint ref =
      cfg.ref_point ? *cfg.ref_point : spec.ref_point;
  // In-run sparsity normalization uses the task's analytic reward bounds;
  // cross-run normalization is available post hoc via the CLI.
  metrics::NormalizationBounds bounds{spec.ref_point, spec.ideal_point};

  std::optional<ReplayBuffer> buffer;
  std::optional<RewardNormalizer> normalizer;
  std::optional<PreferenceCriticPair> pair;
  if (flags.networks) {
    buffer.emplace(cfg.replay_capacity);
    normalizer.emplace(m);
    Rng net_rng = substream(cfg.seed, "init", 1, 0);
    pair.emplace(spec.state_dim, spec.action_dim, m, cfg.policy_hidden,
                 cfg.critic_hidden, net_rng);
  }
  TrainConfig train;
  train.gamma = cfg.discount;
  train.policy_noise = cfg.policy_noise;
  train.noise_clip = cfg.noise_clip;
  train.tau = cfg.tau;
  train.critic_lr = cfg.critic_lr;
  train.actor_lr = cfg.actor_lr;
  train.batch_size = cfg.critic_batch;
  train.policy_delay = cfg.policy_delay;

  std::ofstream csv(out_path("metrics.csv"));
  csv << metrics::csv_header() << "\n";
  artifacts.metrics_csv = out_path("metrics.csv");

  const auto ingest = [&](const std::vector<Solution>& offspring,
                          const std::vector<EvaluationResult>& results,
                          Rng* evict_rng) {
    for (std::size_t i = 0; i < offspring.size(); ++i) {
      if (flags.networks) {
        for (const Transition& t : results[i].transitions) {
          normalizer->update(t.reward);
          buffer->push(t);
        }
      }
      archive.insert(offspring[i],
                     flags.crowding ? EvictionRule::crowding
                                    : EvictionRule::uniform,
                     evict_rng);
    }
  };

  std::uint64_t env_steps = 0;

  // Initialisation: a full batch of random genotypes.
  std::vector<Genotype> init_genotypes;
  init_genotypes.reserve(cfg.batch_total());
  for (std::size_t i = 0; i < cfg.batch_total(); ++i) {
    Rng g_rng = substream(cfg.seed, "init", 0, i);
    init_genotypes.push_back(
        to_genotype(policy_layout, init_params(policy_layout, g_rng)));
  }
  auto init_results = evaluate_batch(spec, policy_layout, init_genotypes);
  std::vector<Solution> init_solutions;
  init_solutions.reserve(init_genotypes.size());
  for (std::size_t i = 0; i < init_genotypes.size(); ++i) {
    init_solutions.push_back(Solution{std::move(init_genotypes[i]),
                                      init_results[i].fitness,
                                      init_results[i].feature, Origin::random,
                                      std::nullopt});
    env_steps += init_results[i].env_steps;
  }
  {
    Rng evict_rng = substream(cfg.seed, "eviction", 0);
    ingest(init_solutions, init_results, &evict_rng);
  }

  const auto emit_row = [&](std::uint64_t iteration,
                            std::span<const Solution> offspring,
                            std::span<const Solution> pg_parents) {
    metrics::MetricsRow row =
        metrics::compute_row(iteration, env_steps, archive, ref, bounds);
    csv << metrics::csv_row(row) << "\n";
    if (observer) {
      IterationReport report;
      report.iteration = iteration;
      report.archive = &archive;
      report.row = row;
      report.offspring = offspring;
      report.pg_parents = pg_parents;
      report.buffer_size = flags.networks ? buffer->size() : 0;
      report.critic_steps = flags.networks ? pair->critic_steps : 0;
      observer(report);
    }
  };
  emit_row(0, init_solutions, {});

  for (std::uint64_t iter = 1; iter <= cfg.iterations; ++iter) {
    Rng select_rng = substream(cfg.seed, "selection", iter);
    const std::size_t n_parents = 2 * cfg.batch_ga + cfg.batch_pg;
    const std::vector<Solution> parents =
        flags.crowding ? crowding_select(archive, n_parents, select_rng)
                       : uniform_select(archive, n_parents, select_rng);

    std::vector<Solution> offspring;
    offspring.reserve(cfg.batch_total());
    std::vector<Solution> pg_parents(parents.begin(),
                                     parents.begin() + cfg.batch_pg);

    // Preference-conditioned policy-gradient offspring.
    if (cfg.batch_pg > 0) {
      Rng pref_rng = substream(cfg.seed, "pg", iter);
      std::vector<Preference> prefs;
      std::vector<Genotype> pg_genotypes;
      std::vector<std::uint64_t> seeds;
      for (std::size_t j = 0; j < cfg.batch_pg; ++j) {
        if (flags.one_hot)
          prefs.push_back(one_hot_preference(m, j % m));
        else if (flags.keep_pref && pg_parents[j].pref)
          prefs.push_back(*pg_parents[j].pref);
        else
          prefs.push_back(sample_preference(pref_rng, m));
        pg_genotypes.push_back(pg_parents[j].genotype);
        seeds.push_back(substream_seed(cfg.seed, "per-offspring", iter, j));
      }
      auto children =
          pg_variation_batch(pg_genotypes, prefs, *pair, *buffer, cfg.pg_steps,
                             cfg.policy_lr, cfg.critic_batch, seeds);
      for (std::size_t j = 0; j < children.size(); ++j)
        offspring.push_back(Solution{std::move(children[j]), {}, {},
                                     Origin::pg, prefs[j]});
    }

    // Iso+LineDD offspring from consecutive parent pairs.
    for (std::size_t j = 0; j < cfg.batch_ga; ++j) {
      Rng ga_rng = substream(cfg.seed, "ga", iter, j);
      const Solution& p1 = parents[cfg.batch_pg + 2 * j];
      const Solution& p2 = parents[cfg.batch_pg + 2 * j + 1];
      offspring.push_back(Solution{
          iso_line_dd(p1.genotype, p2.genotype, cfg.ga, ga_rng), {}, {},
          Origin::ga, std::nullopt});
    }

    // Actor-injection offspring.
    if (cfg.batch_actor > 0) {
      Rng actor_rng = substream(cfg.seed, "actor-sampler", iter);
      const auto prefs = actor_preference_batch(cfg.batch_actor, m, actor_rng);
      for (const auto& w : prefs)
        offspring.push_back(Solution{
            inject_actor(pair->actor_layout, pair->actor, w), {}, {},
            Origin::actor_injection, w});
    }

    std::vector<Genotype> genotypes;
    genotypes.reserve(offspring.size());
    for (const auto& s : offspring) genotypes.push_back(s.genotype);
    const auto results = evaluate_batch(spec, policy_layout, genotypes);
    for (std::size_t i = 0; i < offspring.size(); ++i) {
      offspring[i].fitness = results[i].fitness;
      offspring[i].feature = results[i].feature;
      env_steps += results[i].env_steps;
    }

    // Transitions land in the buffer before training, and offspring join
    // the archive after training (evaluate -> train -> add).
    if (flags.networks) {
      for (const auto& r : results) {
        for (const Transition& t : r.transitions) {
          normalizer->update(t.reward);
          buffer->push(t);
        }
      }
      if (cfg.critic_steps > 0) {
        Rng train_rng = substream(cfg.seed, "training", iter);
        train_networks(*pair, *buffer, train_rng, *normalizer, train,
                       cfg.critic_steps);
      }
    }
    {
      Rng evict_rng = substream(cfg.seed, "eviction", iter);
      for (const auto& s : offspring)
        archive.insert(s,
                       flags.crowding ? EvictionRule::crowding
                                      : EvictionRule::uniform,
                       &evict_rng);
    }

    emit_row(iter, offspring, pg_parents);

    if (cfg.snapshot_every > 0 && iter % cfg.snapshot_every == 0 &&
        iter != cfg.iterations) {
      const std::string path = out_path(snapshot_name(iter));
      save_snapshot(archive, path);
      artifacts.snapshot_paths.push_back(path);
    }
  }

  const std::string final_path = out_path("snapshot_final.txt");
  save_snapshot(archive, final_path);
  artifacts.snapshot_paths.push_back(final_path);
  return artifacts;
}

}  // namespace moqd
