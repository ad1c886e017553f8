#include "moqd/snapshot.hpp"

#include <sstream>

#include "doctest.h"
#include "moqd/rng.hpp"

using namespace moqd;

namespace {

MoArchive random_archive(std::uint64_t seed, std::size_t n_inserts) {
  Tessellation tess;
  tess.dim = 2;
  tess.centroids = {{0.2, 0.2}, {0.8, 0.2}, {0.2, 0.8}, {0.8, 0.8}};
  MoArchive archive(std::move(tess), 4);
  Rng rng(seed);
  for (std::size_t i = 0; i < n_inserts; ++i) {
    Solution s;
    s.fitness = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
    s.feature = {rng.uniform(), rng.uniform()};
    s.origin = static_cast<Origin>(rng.uniform_index(4));
    if (rng.uniform() < 0.5) {
      const double w = rng.uniform();
      s.pref = Preference{{w, 1.0 - w}};
    }
    s.genotype.layout_id = "";
    for (int p = 0; p < 7; ++p) s.genotype.params.push_back(rng.normal());
    archive.insert(s);
  }
  return archive;
}

}  // namespace

TEST_CASE("snapshot round trip is byte-lossless") {
  const auto archive = random_archive(31, 200);
  REQUIRE(archive.total_solutions() > 0);
  const std::string text = snapshot_to_string(archive);
  std::istringstream in(text);
  const MoArchive loaded = read_snapshot(in);
  CHECK(snapshot_to_string(loaded) == text);
}

TEST_CASE("empty archive round trips") {
  Tessellation tess;
  tess.dim = 1;
  tess.centroids = {{0.5}};
  const MoArchive archive(std::move(tess), 3);
  const std::string text = snapshot_to_string(archive);
  std::istringstream in(text);
  const MoArchive loaded = read_snapshot(in);
  CHECK(loaded.cells() == 1);
  CHECK(loaded.total_solutions() == 0);
  CHECK(snapshot_to_string(loaded) == text);
}

TEST_CASE("truncated snapshot raises a parse error") {
  const auto archive = random_archive(32, 80);
  const std::string text = snapshot_to_string(archive);
  std::istringstream in(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_snapshot(in), SnapshotError);
  try {
    std::istringstream again(text.substr(0, text.size() / 2));
    read_snapshot(again);
  } catch (const SnapshotError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("wrong-cell record raises a validation error") {
  const std::string text =
      "moqd-snapshot 1\n"
      "k 2\nd 1\nm 2\ncapacity 3\n"
      "c 0 0.25\nc 1 0.75\n"
      "n 1\n"
      "s 1 ga - - 1 2 0.1 1 0\n";  // feature 0.1 belongs to cell 0
  std::istringstream in(text);
  CHECK_THROWS_AS(read_snapshot(in), SnapshotError);
  try {
    std::istringstream again(text);
    read_snapshot(again);
  } catch (const SnapshotError& e) {
    CHECK(std::string(e.what()).find("validation error") != std::string::npos);
  }
}

TEST_CASE("dominated front member raises a validation error") {
  const std::string text =
      "moqd-snapshot 1\n"
      "k 1\nd 1\nm 2\ncapacity 3\n"
      "c 0 0.5\n"
      "n 2\n"
      "s 0 ga - - 2 2 0.5 1 0\n"
      "s 0 ga - - 1 1 0.5 1 0\n";
  std::istringstream in(text);
  CHECK_THROWS_AS(read_snapshot(in), SnapshotError);
}

TEST_CASE("garbled numbers raise a parse error naming the line") {
  const std::string text =
      "moqd-snapshot 1\n"
      "k 1\nd 1\nm 2\ncapacity 3\n"
      "c 0 0.5\n"
      "n 1\n"
      "s 0 ga - - 1 oops 0.5 1 0\n";
  std::istringstream in(text);
  try {
    read_snapshot(in);
    FAIL("expected SnapshotError");
  } catch (const SnapshotError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("parse error") != std::string::npos);
    CHECK(msg.find("line 8") != std::string::npos);
  }
}
