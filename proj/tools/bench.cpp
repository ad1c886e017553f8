// Serial-vs-OpenMP benchmark for the data-parallel kernels. Each kernel is
// run on both paths, outputs are checked for exact equality, and wall times
// are reported.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "moqd/envs.hpp"
#include "moqd/metrics.hpp"
#include "moqd/morl.hpp"
#include "moqd/pareto.hpp"
#include "moqd/rng.hpp"
#include "moqd/snapshot.hpp"
#include "moqd/tessellation.hpp"

using namespace moqd;

namespace {

double ms_of(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms,
            bool equal) {
  std::printf("%-22s serial %9.1f ms   parallel %9.1f ms   speedup %.2fx   %s\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms,
              equal ? "outputs identical" : "OUTPUT MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp threads: %d\n\n", omp_get_max_threads());
#else
  std::printf("built without openmp; both paths run serially\n\n");
#endif

  const EnvSpec spec = *make_env("pointvel2");
  MlpLayout policy;
  policy.input_dim = spec.state_dim;
  policy.hidden = {64, 64};
  policy.output_dim = spec.action_dim;
  policy.output_activation = OutputActivation::tanh;

  // Batch rollout evaluation.
  std::vector<Genotype> genotypes;
  for (std::size_t i = 0; i < 256; ++i) {
    Rng rng = substream(7, "init", 0, i);
    genotypes.push_back(to_genotype(policy, init_params(policy, rng)));
  }
  std::vector<EvaluationResult> eval_s, eval_p;
  const double t_eval_s =
      ms_of([&] { eval_s = evaluate_batch_serial(spec, policy, genotypes); });
  const double t_eval_p =
      ms_of([&] { eval_p = evaluate_batch(spec, policy, genotypes); });
  bool eval_eq = eval_s.size() == eval_p.size();
  for (std::size_t i = 0; eval_eq && i < eval_s.size(); ++i)
    eval_eq = eval_s[i].fitness == eval_p[i].fitness &&
              eval_s[i].feature == eval_p[i].feature;
  report("evaluate_batch", t_eval_s, t_eval_p, eval_eq);

  // CVT construction.
  Tessellation tess_s, tess_p;
  const double t_cvt_s =
      ms_of([&] { tess_s = build_cvt_serial(2, 128, 100000, 50, 7); });
  const double t_cvt_p = ms_of([&] { tess_p = build_cvt(2, 128, 100000, 50, 7); });
  report("build_cvt", t_cvt_s, t_cvt_p, tess_s.centroids == tess_p.centroids);

  // Monte-Carlo hypervolume.
  {
    Rng rng(11);
    std::vector<FitnessVector> front;
    for (int i = 0; i < 10; ++i) {
      const double x = rng.uniform(0.1, 1.0);
      front.push_back({x, 1.1 - x});
    }
    const FitnessVector ref{0.0, 0.0}, bound{1.2, 1.2};
    double hv_s = 0.0, hv_p = 0.0;
    const double t_mc_s = ms_of(
        [&] { hv_s = pareto::hypervolume_mc_serial(front, ref, bound, 4000000, 3); });
    const double t_mc_p =
        ms_of([&] { hv_p = pareto::hypervolume_mc(front, ref, bound, 4000000, 3); });
    report("hypervolume_mc", t_mc_s, t_mc_p, hv_s == hv_p);
  }

  // Policy-gradient variation of an offspring batch.
  {
    Rng net_rng(23);
    PreferenceCriticPair pair(spec.state_dim, spec.action_dim, spec.objectives,
                              {64, 64}, {64, 64}, net_rng);
    ReplayBuffer buffer(100000);
    for (const auto& r : eval_s)
      for (const auto& t : r.transitions) buffer.push(t);

    std::vector<Genotype> parents(genotypes.begin(), genotypes.begin() + 16);
    std::vector<Preference> prefs;
    std::vector<std::uint64_t> seeds;
    Rng pref_rng(29);
    for (std::size_t i = 0; i < parents.size(); ++i) {
      prefs.push_back(sample_preference(pref_rng, spec.objectives));
      seeds.push_back(substream_seed(29, "per-offspring", 1, i));
    }
    std::vector<Genotype> pg_s, pg_p;
    const double t_pg_s = ms_of([&] {
      pg_s = pg_variation_batch_serial(parents, prefs, pair, buffer, 20, 1e-3,
                                       64, seeds);
    });
    const double t_pg_p = ms_of([&] {
      pg_p = pg_variation_batch(parents, prefs, pair, buffer, 20, 1e-3, 64,
                                seeds);
    });
    bool pg_eq = pg_s.size() == pg_p.size();
    for (std::size_t i = 0; pg_eq && i < pg_s.size(); ++i)
      pg_eq = pg_s[i].params == pg_p[i].params;
    report("pg_variation_batch", t_pg_s, t_pg_p, pg_eq);
  }

  // MOQD score over a populated archive.
  {
    Tessellation tess = build_cvt(2, 128, 20000, 20, 5);
    MoArchive archive(std::move(tess), 50);
    Rng rng(31);
    for (int i = 0; i < 20000; ++i) {
      Solution s;
      const double x = rng.uniform();
      s.fitness = {x, 1.0 - x};
      s.feature = {rng.uniform(), rng.uniform()};
      s.genotype.params = {0.0};
      archive.insert(s);
    }
    const FitnessVector ref{-0.1, -0.1};
    double score_s = 0.0, score_p = 0.0;
    const double t_sc_s =
        ms_of([&] { score_s = metrics::moqd_score_serial(archive, ref); });
    const double t_sc_p = ms_of([&] { score_p = metrics::moqd_score(archive, ref); });
    report("moqd_score", t_sc_s, t_sc_p, score_s == score_p);
  }

  return 0;
}
