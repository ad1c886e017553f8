#include "moqd/variation.hpp"

#include <stdexcept>

#include "moqd/pareto.hpp"

namespace moqd {

Genotype iso_line_dd(const Genotype& parent1, const Genotype& parent2,
                     const GaParams& params, Rng& rng) {
  if (parent1.layout_id != parent2.layout_id ||
      parent1.params.size() != parent2.params.size())
    throw std::invalid_argument("iso_line_dd: parent layout mismatch");
  Genotype child = parent1;
  const double u = rng.normal();
  for (std::size_t i = 0; i < child.params.size(); ++i) {
    child.params[i] += params.sigma_iso * rng.normal() +
                       params.sigma_line * u *
                           (parent2.params[i] - parent1.params[i]);
  }
  return child;
}

namespace {

std::vector<Solution> select_impl(const MoArchive& archive, std::size_t n,
                                  Rng& rng, bool crowding) {
  const auto cells = archive.cells_nonempty();
  if (cells.empty())
    throw std::invalid_argument("selection from an empty archive");

  // Crowding scores per front are reused across draws within one call.
  std::vector<std::vector<double>> scores(cells.size());

  std::vector<Solution> picked;
  picked.reserve(n);
  for (std::size_t draw = 0; draw < n; ++draw) {
    const std::size_t ci = rng.uniform_index(cells.size());
    const auto& front = archive.front(cells[ci]);
    std::size_t member = 0;
    if (!crowding || front.size() == 1) {
      member = rng.uniform_index(front.size());
    } else {
      if (scores[ci].empty())
        scores[ci] = pareto::crowding_distances(front.fitnesses());
      const auto& w = scores[ci];
      double total = 0.0;
      for (double v : w) total += v;
      double r = rng.uniform() * total;
      member = w.size() - 1;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (r < w[i]) {
          member = i;
          break;
        }
        r -= w[i];
      }
    }
    picked.push_back(front.members()[member]);
  }
  return picked;
}

}  // namespace

std::vector<Solution> crowding_select(const MoArchive& archive, std::size_t n,
                                      Rng& rng) {
  return select_impl(archive, n, rng, true);
}

std::vector<Solution> uniform_select(const MoArchive& archive, std::size_t n,
                                     Rng& rng) {
  return select_impl(archive, n, rng, false);
}

}  // namespace moqd
