#include "moqd/types.hpp"

#include <charconv>
#include <cstdlib>

namespace moqd {

const char* origin_name(Origin o) {
  switch (o) {
    case Origin::random: return "random";
    case Origin::ga: return "ga";
    case Origin::pg: return "pg";
    case Origin::actor_injection: return "actor_injection";
  }
  return "unknown";
}

std::optional<Origin> origin_from_name(std::string_view s) {
  if (s == "random") return Origin::random;
  if (s == "ga") return Origin::ga;
  if (s == "pg") return Origin::pg;
  if (s == "actor_injection") return Origin::actor_injection;
  return std::nullopt;
}

bool is_valid_preference(const Preference& p, std::size_t m) {
  if (p.weights.size() != m) return false;
  double sum = 0.0;
  for (double w : p.weights) {
    if (!std::isfinite(w) || w < 0.0) return false;
    sum += w;
  }
  return std::abs(sum - 1.0) <= 1e-9;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return v;
}

}  // namespace moqd
