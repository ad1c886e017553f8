#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace moqd {

/// Centroidal Voronoi tessellation of the unit hypercube [0,1]^d.
struct Tessellation {
  std::size_t dim = 0;
  std::vector<std::vector<double>> centroids;  // k points of length dim

  std::size_t cells() const { return centroids.size(); }
};

/// Lloyd's k-means over n_samples uniform points in [0,1]^d, run for n_iters
/// iterations or until the largest centroid motion drops below 1e-6.
/// Deterministic given the seed, and independent of the thread count.
/// Throws std::invalid_argument if k == 0 or k > n_samples.
Tessellation build_cvt(std::size_t d, std::size_t k, std::size_t n_samples,
                       std::size_t n_iters, std::uint64_t seed);

/// Serial reference path for build_cvt; identical output.
Tessellation build_cvt_serial(std::size_t d, std::size_t k,
                              std::size_t n_samples, std::size_t n_iters,
                              std::uint64_t seed);

/// Index of the Euclidean-nearest centroid; ties go to the lowest index.
/// Throws std::invalid_argument on feature length mismatch.
std::size_t locate(const Tessellation& tess, std::span<const double> feature);

}  // namespace moqd
