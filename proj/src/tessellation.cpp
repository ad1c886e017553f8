#include "moqd/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "moqd/rng.hpp"

namespace moqd {

namespace {

constexpr double kMoveTol = 1e-6;

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

std::size_t nearest(const std::vector<std::vector<double>>& centroids,
                    std::span<const double> p) {
  std::size_t best = 0;
  double best_d = sq_dist(centroids[0], p);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = sq_dist(centroids[c], p);
    if (d < best_d) {  // strict: ties keep the lowest index
      best_d = d;
      best = c;
    }
  }
  return best;
}

Tessellation build_impl(std::size_t d, std::size_t k, std::size_t n_samples,
                        std::size_t n_iters, std::uint64_t seed,
                        bool parallel) {
  if (k == 0) throw std::invalid_argument("build_cvt: k must be >= 1");
  if (k > n_samples)
    throw std::invalid_argument("build_cvt: k exceeds the sample count");
  if (d == 0) throw std::invalid_argument("build_cvt: d must be >= 1");

  Rng rng = substream(seed, "tessellation");
  std::vector<std::vector<double>> samples(n_samples, std::vector<double>(d));
  for (auto& s : samples)
    for (auto& x : s) x = rng.uniform();

  // Initial centroids: the first k samples.
  std::vector<std::vector<double>> centroids(samples.begin(),
                                             samples.begin() + k);

  std::vector<std::size_t> assign(n_samples, 0);
  std::vector<std::vector<double>> sums(k, std::vector<double>(d));
  std::vector<std::size_t> counts(k, 0);

  for (std::size_t iter = 0; iter < n_iters; ++iter) {
    // Assignment is the dominant cost and is data-parallel; each sample
    // writes only its own slot, so the result is thread-count agnostic.
    if (parallel) {
#pragma omp parallel for schedule(static)
      for (std::size_t i = 0; i < n_samples; ++i)
        assign[i] = nearest(centroids, samples[i]);
    } else {
      for (std::size_t i = 0; i < n_samples; ++i)
        assign[i] = nearest(centroids, samples[i]);
    }

    // Accumulate in fixed sample order to keep the update bit-deterministic.
    for (auto& s : sums) std::fill(s.begin(), s.end(), 0.0);
    std::fill(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t i = 0; i < n_samples; ++i) {
      const std::size_t c = assign[i];
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) sums[c][j] += samples[i][j];
    }

    // Reseed empty clusters to the sample farthest from its own centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far_i = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n_samples; ++i) {
        if (counts[assign[i]] <= 1) continue;  // do not empty another cluster
        const double dist = sq_dist(centroids[assign[i]], samples[i]);
        if (dist > far_d) {
          far_d = dist;
          far_i = i;
        }
      }
      const std::size_t old = assign[far_i];
      --counts[old];
      for (std::size_t j = 0; j < d; ++j) sums[old][j] -= samples[far_i][j];
      assign[far_i] = c;
      counts[c] = 1;
      for (std::size_t j = 0; j < d; ++j) sums[c][j] = samples[far_i][j];
    }

    double max_move_sq = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double move_sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double next = sums[c][j] / static_cast<double>(counts[c]);
        const double diff = next - centroids[c][j];
        move_sq += diff * diff;
        centroids[c][j] = next;
      }
      max_move_sq = std::max(max_move_sq, move_sq);
    }
    if (max_move_sq < kMoveTol * kMoveTol) break;
  }

  return Tessellation{d, std::move(centroids)};
}

}  // namespace

Tessellation build_cvt(std::size_t d, std::size_t k, std::size_t n_samples,
                       std::size_t n_iters, std::uint64_t seed) {
  return build_impl(d, k, n_samples, n_iters, seed, true);
}

Tessellation build_cvt_serial(std::size_t d, std::size_t k,
                              std::size_t n_samples, std::size_t n_iters,
                              std::uint64_t seed) {
  return build_impl(d, k, n_samples, n_iters, seed, false);
}

std::size_t locate(const Tessellation& tess, std::span<const double> feature) {
  if (feature.size() != tess.dim)
    throw std::invalid_argument("locate: feature length mismatch");
  return nearest(tess.centroids, feature);
}

}  // namespace moqd
