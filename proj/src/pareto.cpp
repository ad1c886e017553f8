#include "moqd/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "moqd/rng.hpp"

namespace moqd::pareto {

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dominates: fitness length mismatch");
  bool strictly_better = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strictly_better = true;
  }
  return strictly_better;
}

std::vector<std::size_t> non_dominated_filter(
    const std::vector<FitnessVector>& set) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < set.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < set.size() && !dominated; ++j)
      dominated = (j != i) && dominates(set[j], set[i]);
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

namespace {

// Ascending by objective j, full-vector lexicographic tie-break so the order
// does not depend on how the caller arranged a front of distinct vectors.
std::vector<std::size_t> objective_order(const std::vector<FitnessVector>& front,
                                         std::size_t j) {
  std::vector<std::size_t> order(front.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (front[a][j] != front[b][j]) return front[a][j] < front[b][j];
    return front[a] < front[b];
  });
  return order;
}

}  // namespace

std::vector<double> crowding_distances(const std::vector<FitnessVector>& front) {
  const std::size_t n = front.size();
  if (n == 0) return {};
  if (n <= 2) return std::vector<double>(n, 1.0);

  const std::size_t m = front[0].size();
  std::vector<double> score(n, 0.0);
  std::vector<char> boundary(n, 0);

  for (std::size_t j = 0; j < m; ++j) {
    auto order = objective_order(front, j);
    const double range = front[order.back()][j] - front[order.front()][j];
    if (range <= 0.0) continue;  // zero-range objective contributes nothing
    boundary[order.front()] = 1;
    boundary[order.back()] = 1;
    for (std::size_t i = 1; i + 1 < n; ++i)
      score[order[i]] += (front[order[i + 1]][j] - front[order[i - 1]][j]) / range;
  }

  double max_interior = 0.0;
  bool has_interior = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!boundary[i]) {
      has_interior = true;
      max_interior = std::max(max_interior, score[i]);
    }
  }
  if (!has_interior || max_interior <= 0.0)
    return std::vector<double>(n, 1.0);

  const double cap = 2.0 * max_interior;
  for (std::size_t i = 0; i < n; ++i)
    if (boundary[i]) score[i] = cap;
  return score;
}

namespace {

void check_hv_inputs(const std::vector<FitnessVector>& front,
                     const ReferencePoint& ref) {
  if (ref.size() != 2 && ref.size() != 3)
    throw std::invalid_argument(
        "hypervolume: exact path supports 2 or 3 objectives");
  for (const auto& f : front)
    if (f.size() != ref.size())
      throw std::invalid_argument("hypervolume: fitness length mismatch");
}

// Points must already be strictly above ref in both components.
double staircase_area_2d(std::vector<std::pair<double, double>> pts, double rx,
                         double ry) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second > b.second;
  });
  double area = 0.0;
  double y_prev = ry;
  for (const auto& [x, y] : pts) {
    if (y > y_prev) {
      area += (x - rx) * (y - y_prev);
      y_prev = y;
    }
  }
  return area;
}

}  // namespace

double hypervolume(const std::vector<FitnessVector>& front,
                   const ReferencePoint& ref) {
  check_hv_inputs(front, ref);
  const std::size_t m = ref.size();

  if (m == 2) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& f : front)
      if (f[0] > ref[0] && f[1] > ref[1]) pts.emplace_back(f[0], f[1]);
    return staircase_area_2d(std::move(pts), ref[0], ref[1]);
  }

  // m == 3: slice along the third objective into 2-D staircase problems.
  std::vector<FitnessVector> pts;
  for (const auto& f : front)
    if (f[0] > ref[0] && f[1] > ref[1] && f[2] > ref[2]) pts.push_back(f);
  if (pts.empty()) return 0.0;

  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a[2] > b[2];
  });
  std::vector<double> levels;
  for (const auto& p : pts)
    if (levels.empty() || p[2] < levels.back()) levels.push_back(p[2]);

  double volume = 0.0;
  std::vector<std::pair<double, double>> active;
  std::size_t next_pt = 0;
  for (std::size_t t = 0; t < levels.size(); ++t) {
    while (next_pt < pts.size() && pts[next_pt][2] >= levels[t]) {
      active.emplace_back(pts[next_pt][0], pts[next_pt][1]);
      ++next_pt;
    }
    const double lower = (t + 1 < levels.size()) ? levels[t + 1] : ref[2];
    volume += staircase_area_2d(active, ref[0], ref[1]) * (levels[t] - lower);
  }
  return volume;
}

namespace {

constexpr std::size_t kMcChunk = 1 << 16;

// Dominated-sample count within one deterministic chunk of the stream.
std::uint64_t mc_chunk_count(const std::vector<FitnessVector>& front,
                             const ReferencePoint& ref,
                             const FitnessVector& bound, std::size_t n_in_chunk,
                             std::uint64_t seed, std::size_t chunk_index) {
  const std::size_t m = ref.size();
  Rng rng(substream_seed(seed, "hv-mc", 0, chunk_index));
  std::vector<double> x(m);
  std::uint64_t hits = 0;
  for (std::size_t s = 0; s < n_in_chunk; ++s) {
    for (std::size_t i = 0; i < m; ++i)
      x[i] = ref[i] + rng.uniform() * (bound[i] - ref[i]);
    for (const auto& f : front) {
      bool covers = true;
      for (std::size_t i = 0; i < m; ++i) {
        if (f[i] < x[i]) {
          covers = false;
          break;
        }
      }
      if (covers) {
        ++hits;
        break;
      }
    }
  }
  return hits;
}

double mc_impl(const std::vector<FitnessVector>& front,
               const ReferencePoint& ref, const FitnessVector& bound,
               std::size_t n_samples, std::uint64_t seed, bool parallel) {
  const std::size_t m = ref.size();
  if (bound.size() != m)
    throw std::invalid_argument("hypervolume_mc: bound length mismatch");
  for (const auto& f : front) {
    if (f.size() != m)
      throw std::invalid_argument("hypervolume_mc: fitness length mismatch");
    for (std::size_t i = 0; i < m; ++i)
      if (bound[i] < f[i])
        throw std::invalid_argument(
            "hypervolume_mc: bound_point must dominate every front member");
  }
  if (n_samples == 0) return 0.0;

  double box = 1.0;
  for (std::size_t i = 0; i < m; ++i) box *= std::max(0.0, bound[i] - ref[i]);
  if (box <= 0.0 || front.empty()) return 0.0;

  const std::size_t n_chunks = (n_samples + kMcChunk - 1) / kMcChunk;
  std::vector<std::uint64_t> counts(n_chunks, 0);
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::size_t n = std::min(kMcChunk, n_samples - c * kMcChunk);
      counts[c] = mc_chunk_count(front, ref, bound, n, seed, c);
    }
  } else {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::size_t n = std::min(kMcChunk, n_samples - c * kMcChunk);
      counts[c] = mc_chunk_count(front, ref, bound, n, seed, c);
    }
  }
  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;  // fixed order, thread-agnostic
  return box * static_cast<double>(total) / static_cast<double>(n_samples);
}

}  // namespace

double hypervolume_mc(const std::vector<FitnessVector>& front,
                      const ReferencePoint& ref, const FitnessVector& bound,
                      std::size_t n_samples, std::uint64_t seed) {
  return mc_impl(front, ref, bound, n_samples, seed, true);
}

double hypervolume_mc_serial(const std::vector<FitnessVector>& front,
                             const ReferencePoint& ref,
                             const FitnessVector& bound, std::size_t n_samples,
                             std::uint64_t seed) {
  return mc_impl(front, ref, bound, n_samples, seed, false);
}

double sparsity(const std::vector<FitnessVector>& front) {
  const std::size_t n = front.size();
  if (n < 2) return 0.0;
  const std::size_t m = front[0].size();
  double total = 0.0;
  std::vector<double> vals(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) vals[i] = front[i][j];
    std::sort(vals.begin(), vals.end());
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double gap = vals[i + 1] - vals[i];
      total += gap * gap;
    }
  }
  return total / static_cast<double>(n - 1);
}

}  // namespace moqd::pareto
