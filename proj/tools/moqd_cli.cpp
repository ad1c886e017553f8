// Command-line front end: run experiments, inspect snapshots, compute
// metrics, and apply cross-run sparsity normalization.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "moqd/metrics.hpp"
#include "moqd/runner.hpp"
#include "moqd/snapshot.hpp"

namespace {

moqd::FitnessVector parse_ref(const std::string& s) {
  moqd::FitnessVector ref;
  std::string cur;
  auto flush = [&] {
    auto v = moqd::parse_double(cur);
    if (!v) throw moqd::ConfigError("bad --ref value '" + cur + "'");
    ref.push_back(*v);
    cur.clear();
  };
  for (char c : s) {
    if (c == ',')
      flush();
    else
      cur += c;
  }
  flush();
  return ref;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> iterations,
            std::optional<std::string> out_dir) {
  moqd::RunConfig cfg = moqd::parse_config_file(config_path);
  if (seed) cfg.seed = *seed;
  if (iterations) cfg.iterations = *iterations;
  if (out_dir) cfg.out_dir = *out_dir;
  const auto artifacts = moqd::run(cfg);
  std::cout << "metrics: " << artifacts.metrics_csv << "\n";
  std::cout << "config: " << artifacts.resolved_config << "\n";
  for (const auto& p : artifacts.snapshot_paths)
    std::cout << "snapshot: " << p << "\n";
  return 0;
}

int cmd_metrics(const std::string& snapshot_path, const std::string& ref_str) {
  const moqd::MoArchive archive = moqd::load_snapshot(snapshot_path);
  const moqd::FitnessVector ref = parse_ref(ref_str);

  const bool empty = archive.total_solutions() == 0;
  double moqd_sp = 0.0, global_sp = 0.0;
  if (!empty) {
    const auto bounds = moqd::metrics::compute_bounds({&archive});
    moqd_sp = moqd::metrics::moqd_sparsity(archive, bounds);
    global_sp = moqd::metrics::global_sparsity(archive, bounds);
  }
  std::cout << "moqd_score "
            << moqd::fmt_double(empty ? 0.0 : moqd::metrics::moqd_score(archive, ref))
            << "\n";
  std::cout << "moqd_sparsity " << moqd::fmt_double(moqd_sp) << "\n";
  std::cout << "global_hypervolume "
            << moqd::fmt_double(
                   empty ? 0.0 : moqd::metrics::global_hypervolume(archive, ref))
            << "\n";
  std::cout << "global_sparsity " << moqd::fmt_double(global_sp) << "\n";
  const auto mss = moqd::metrics::max_sum_scores(archive);
  std::cout << "max_sum_scores " << (mss ? moqd::fmt_double(*mss) : "-") << "\n";
  std::cout << "coverage " << moqd::fmt_double(moqd::metrics::coverage(archive))
            << "\n";
  return 0;
}

int cmd_normalize(const std::vector<std::string>& paths) {
  std::vector<moqd::MoArchive> archives;
  archives.reserve(paths.size());
  for (const auto& p : paths) archives.push_back(moqd::load_snapshot(p));

  std::vector<const moqd::MoArchive*> ptrs;
  for (const auto& a : archives) ptrs.push_back(&a);
  const auto bounds = moqd::metrics::compute_bounds(ptrs);

  std::cout << "objective,min,max\n";
  for (std::size_t j = 0; j < bounds.min.size(); ++j)
    std::cout << j << ',' << moqd::fmt_double(bounds.min[j]) << ','
              << moqd::fmt_double(bounds.max[j]) << "\n";
  std::cout << "snapshot,moqd_sparsity,global_sparsity\n";
  for (std::size_t i = 0; i < archives.size(); ++i) {
    std::cout << paths[i] << ','
              << moqd::fmt_double(moqd::metrics::moqd_sparsity(archives[i], bounds))
              << ','
              << moqd::fmt_double(moqd::metrics::global_sparsity(archives[i], bounds))
              << "\n";
  }
  return 0;
}

int cmd_inspect(const std::string& snapshot_path, std::size_t cell) {
  const moqd::MoArchive archive = moqd::load_snapshot(snapshot_path);
  if (cell >= archive.cells())
    throw moqd::ConfigError("cell index " + std::to_string(cell) +
                            " out of range (archive has " +
                            std::to_string(archive.cells()) + " cells)");
  const auto& front = archive.front(cell);
  std::cout << "cell " << cell << ": " << front.size() << " member"
            << (front.size() == 1 ? "" : "s") << "\n";
  for (const auto& s : front.members()) {
    std::cout << "  fitness";
    for (double v : s.fitness) std::cout << ' ' << moqd::fmt_double(v);
    std::cout << " | feature";
    for (double v : s.feature) std::cout << ' ' << moqd::fmt_double(v);
    std::cout << " | origin " << moqd::origin_name(s.origin);
    std::cout << " | pref";
    if (s.pref)
      for (double v : s.pref->weights) std::cout << ' ' << moqd::fmt_double(v);
    else
      std::cout << " -";
    std::cout << " | params " << s.genotype.params.size() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-objective quality-diversity experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::optional<std::string> out_dir;
  auto* run_cmd = app.add_subcommand("run", "execute a configured experiment");
  run_cmd->add_option("config", config_path, "config file")->required();
  run_cmd->add_option("--seed", seed, "override the root seed");
  run_cmd->add_option("--iterations", iterations, "override the iteration count");
  run_cmd->add_option("--out", out_dir, "override the output directory");

  std::string snapshot_path, ref_str;
  auto* metrics_cmd =
      app.add_subcommand("metrics", "print the six metrics of a snapshot");
  metrics_cmd->add_option("snapshot", snapshot_path, "archive snapshot")
      ->required();
  metrics_cmd->add_option("--ref", ref_str, "reference point, e.g. -100,-200")
      ->required();

  std::vector<std::string> normalize_paths;
  auto* normalize_cmd = app.add_subcommand(
      "normalize", "cross-run bounds and normalized sparsity metrics");
  normalize_cmd->add_option("snapshots", normalize_paths, "archive snapshots")
      ->required()
      ->expected(-1);

  std::string inspect_path;
  std::size_t inspect_cell = 0;
  auto* inspect_cmd = app.add_subcommand("inspect", "print one cell's front");
  inspect_cmd->add_option("snapshot", inspect_path, "archive snapshot")
      ->required();
  inspect_cmd->add_option("--cell", inspect_cell, "cell index")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, seed, iterations, out_dir);
    if (metrics_cmd->parsed()) return cmd_metrics(snapshot_path, ref_str);
    if (normalize_cmd->parsed()) return cmd_normalize(normalize_paths);
    if (inspect_cmd->parsed()) return cmd_inspect(inspect_path, inspect_cell);
  } catch (const moqd::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
