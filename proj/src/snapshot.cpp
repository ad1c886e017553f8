#include "moqd/snapshot.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "moqd/neural.hpp"
#include "moqd/pareto.hpp"

namespace moqd {

namespace {

constexpr const char* kMagic = "moqd-snapshot 1";

[[noreturn]] void fail(const char* kind, std::size_t line, const std::string& what) {
  throw SnapshotError(std::string(kind) + " at line " + std::to_string(line) +
                      ": " + what);
}

struct Reader {
  std::istream& in;
  std::size_t line_no = 0;
  std::string line;
  std::istringstream tokens;

  bool next_line() {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty()) {
        tokens.clear();
        tokens.str(line);
        return true;
      }
    }
    return false;
  }

  std::string token(const char* what) {
    std::string t;
    if (!(tokens >> t)) fail("parse error", line_no, std::string("missing ") + what);
    return t;
  }

  std::size_t uint_token(const char* what) {
    const std::string t = token(what);
    std::size_t v = 0;
    for (char c : t) {
      if (c < '0' || c > '9')
        fail("parse error", line_no, std::string("bad unsigned ") + what + " '" + t + "'");
      v = v * 10 + static_cast<std::size_t>(c - '0');
    }
    return v;
  }

  double double_token(const char* what) {
    const std::string t = token(what);
    auto v = parse_double(t);
    if (!v) fail("parse error", line_no, std::string("bad number ") + what + " '" + t + "'");
    return *v;
  }

  void expect_key(const char* key) {
    const std::string t = token(key);
    if (t != key)
      fail("parse error", line_no, std::string("expected '") + key + "', got '" + t + "'");
  }

  void expect_end() {
    std::string extra;
    if (tokens >> extra)
      fail("parse error", line_no, "trailing token '" + extra + "'");
  }
};

}  // namespace

void write_snapshot(const MoArchive& archive, std::ostream& out) {
  const auto& tess = archive.tessellation();
  std::size_t m = 0;
  for (std::size_t i = 0; i < archive.cells() && m == 0; ++i)
    if (archive.front(i).size() > 0) m = archive.front(i).members()[0].fitness.size();

  out << kMagic << "\n";
  out << "k " << archive.cells() << "\n";
  out << "d " << tess.dim << "\n";
  out << "m " << m << "\n";
  out << "capacity " << archive.capacity() << "\n";
  for (std::size_t i = 0; i < tess.centroids.size(); ++i) {
    out << "c " << i;
    for (double v : tess.centroids[i]) out << ' ' << fmt_double(v);
    out << "\n";
  }
  out << "n " << archive.total_solutions() << "\n";
  for (std::size_t cell = 0; cell < archive.cells(); ++cell) {
    for (const auto& sol : archive.front(cell).members()) {
      out << "s " << cell << ' ' << origin_name(sol.origin) << ' '
          << (sol.genotype.layout_id.empty() ? "-" : sol.genotype.layout_id);
      if (sol.pref) {
        for (double w : sol.pref->weights) out << ' ' << fmt_double(w);
      } else {
        out << " -";
      }
      for (double v : sol.fitness) out << ' ' << fmt_double(v);
      for (double v : sol.feature) out << ' ' << fmt_double(v);
      out << ' ' << sol.genotype.params.size();
      for (double v : sol.genotype.params) out << ' ' << fmt_double(v);
      out << "\n";
    }
  }
}

MoArchive read_snapshot(std::istream& in) {
  Reader r{in};
  if (!r.next_line() || r.line != kMagic)
    fail("parse error", r.line_no == 0 ? 1 : r.line_no, "missing snapshot magic");

  auto header_uint = [&](const char* key) {
    if (!r.next_line()) fail("parse error", r.line_no + 1, "truncated header");
    r.expect_key(key);
    const std::size_t v = r.uint_token(key);
    r.expect_end();
    return v;
  };
  const std::size_t k = header_uint("k");
  const std::size_t d = header_uint("d");
  const std::size_t m = header_uint("m");
  const std::size_t capacity = header_uint("capacity");
  if (k == 0) fail("validation error", r.line_no, "k must be >= 1");
  if (capacity == 0) fail("validation error", r.line_no, "capacity must be >= 1");

  Tessellation tess;
  tess.dim = d;
  for (std::size_t i = 0; i < k; ++i) {
    if (!r.next_line()) fail("parse error", r.line_no + 1, "truncated centroid list");
    r.expect_key("c");
    if (r.uint_token("centroid index") != i)
      fail("parse error", r.line_no, "centroid index out of order");
    std::vector<double> c(d);
    for (auto& v : c) v = r.double_token("centroid value");
    r.expect_end();
    tess.centroids.push_back(std::move(c));
  }

  if (!r.next_line()) fail("parse error", r.line_no + 1, "truncated: missing record count");
  r.expect_key("n");
  const std::size_t n = r.uint_token("record count");
  r.expect_end();

  std::vector<std::size_t> cells;
  std::vector<Solution> solutions;
  std::vector<std::size_t> lines;
  for (std::size_t rec = 0; rec < n; ++rec) {
    if (!r.next_line()) fail("parse error", r.line_no + 1, "truncated: missing solution record");
    r.expect_key("s");
    const std::size_t cell = r.uint_token("cell index");
    if (cell >= k) fail("validation error", r.line_no, "cell index out of range");

    Solution sol;
    const std::string origin = r.token("origin");
    if (auto o = origin_from_name(origin))
      sol.origin = *o;
    else
      fail("parse error", r.line_no, "unknown origin '" + origin + "'");

    const std::string layout_id = r.token("layout id");
    if (layout_id != "-") sol.genotype.layout_id = layout_id;

    const std::string pref0 = r.token("preference");
    if (pref0 != "-") {
      Preference p;
      auto w0 = parse_double(pref0);
      if (!w0) fail("parse error", r.line_no, "bad preference value '" + pref0 + "'");
      p.weights.push_back(*w0);
      for (std::size_t i = 1; i < m; ++i)
        p.weights.push_back(r.double_token("preference value"));
      sol.pref = std::move(p);
    }

    sol.fitness.resize(m);
    for (auto& v : sol.fitness) v = r.double_token("fitness value");
    if (!all_finite(sol.fitness))
      fail("validation error", r.line_no, "non-finite fitness");

    sol.feature.resize(d);
    for (auto& v : sol.feature) v = r.double_token("feature value");
    for (double v : sol.feature)
      if (!(v >= 0.0 && v <= 1.0))
        fail("validation error", r.line_no, "feature outside [0,1]");

    const std::size_t nparams = r.uint_token("parameter count");
    sol.genotype.params.resize(nparams);
    for (auto& v : sol.genotype.params) v = r.double_token("parameter value");
    r.expect_end();

    if (!sol.genotype.layout_id.empty()) {
      auto layout = MlpLayout::from_id(sol.genotype.layout_id);
      if (!layout) fail("parse error", r.line_no, "bad layout id '" + sol.genotype.layout_id + "'");
      if (layout->param_count() != nparams)
        fail("validation error", r.line_no, "genotype length does not match its layout");
    }

    if (locate(tess, sol.feature) != cell)
      fail("validation error", r.line_no, "solution feature maps to a different cell");

    cells.push_back(cell);
    lines.push_back(r.line_no);
    solutions.push_back(std::move(sol));
  }
  if (r.next_line()) fail("parse error", r.line_no, "unexpected trailing content");

  // Per-front invariants: capacity, mutual non-dominance, distinct fitness.
  std::vector<std::vector<std::size_t>> by_cell(k);
  for (std::size_t i = 0; i < solutions.size(); ++i) by_cell[cells[i]].push_back(i);
  for (std::size_t cell = 0; cell < k; ++cell) {
    const auto& idx = by_cell[cell];
    if (idx.size() > capacity)
      fail("validation error", lines[idx[capacity]], "front exceeds capacity");
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = 0; b < idx.size(); ++b) {
        if (a == b) continue;
        if (pareto::dominates(solutions[idx[a]].fitness, solutions[idx[b]].fitness))
          fail("validation error", lines[idx[b]], "front member is dominated");
        if (a < b && solutions[idx[a]].fitness == solutions[idx[b]].fitness)
          fail("validation error", lines[idx[b]], "duplicate fitness in front");
      }
    }
  }

  MoArchive archive(std::move(tess), capacity);
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const auto outcome = archive.insert(solutions[i]);
    if (outcome.kind != InsertKind::added)
      fail("validation error", lines[i], "inconsistent archive record");
  }
  return archive;
}

void save_snapshot(const MoArchive& archive, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SnapshotError("cannot open '" + path + "' for writing");
  write_snapshot(archive, out);
  out.flush();
  if (!out) throw SnapshotError("write failed for '" + path + "'");
}

MoArchive load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SnapshotError("cannot open '" + path + "'");
  return read_snapshot(in);
}

std::string snapshot_to_string(const MoArchive& archive) {
  std::ostringstream out;
  write_snapshot(archive, out);
  return out.str();
}

}  // namespace moqd
