// Large-scale doubling checks: the exact ball-cover decision against a
// brute-force subset oracle, scale grids, per-subset and per-family
// doubling verdicts, and the layered-cover front end with its two
// quantification readings.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "coarse/doubling.hpp"
#include "coarse/family.hpp"
#include "coarse/gen.hpp"
#include "coarse/metric_space.hpp"
#include "coarse/rational.hpp"
#include "coarse/tree.hpp"
#include "coarse/util.hpp"
#include "coarse/witness.hpp"

using coarse::DoublingParams;
using coarse::DoublingReading;
using coarse::MetricSpace;
using coarse::Rational;
using coarse::Rng;
using coarse::RootedTree;
using coarse::SubsetFamily;

namespace {

// Brute-force oracle: try every set of at most n centers (all points are
// candidates) and ask whether some choice covers the target with open
// r-balls.  Bitmask per center, exhaustive subset enumeration.
bool oracle_coverable(const MetricSpace& m, const std::vector<int>& target,
                      int n, const Rational& r) {
  if (target.empty()) return true;
  REQUIRE(target.size() <= 32);
  std::vector<std::uint32_t> masks(m.size(), 0);
  for (std::size_t c = 0; c < m.size(); ++c)
    for (std::size_t t = 0; t < target.size(); ++t)
      if (m.dist(c, static_cast<std::size_t>(target[t])) < r)
        masks[c] |= 1u << t;
  const std::uint32_t full =
      target.size() == 32 ? ~0u : ((1u << target.size()) - 1u);
  std::vector<std::size_t> pick;
  auto rec = [&](auto&& self, std::size_t start, int left,
                 std::uint32_t acc) -> bool {
    if (acc == full) return true;
    if (left == 0) return false;
    for (std::size_t c = start; c < m.size(); ++c)
      if (self(self, c + 1, left - 1, acc | masks[c])) return true;
    return false;
  };
  return rec(rec, 0, n, 0);
}

MetricSpace unit_path_space(int points) {
  std::vector<std::string> labels;
  std::vector<coarse::WeightedEdge> edges;
  for (int i = 0; i < points; ++i) labels.push_back("x" + std::to_string(i));
  for (int i = 0; i + 1 < points; ++i)
    edges.push_back({labels[i], labels[i + 1], Rational(1)});
  return MetricSpace::from_graph(labels, edges);
}

// Root with three children, every deeper internal vertex with two, down to
// the requested depth.
RootedTree tripling_tree(int depth) {
  std::vector<std::pair<std::string, std::string>> edges;
  int next = 1;
  std::vector<int> frontier = {0};
  for (int d = 0; d < depth; ++d) {
    std::vector<int> grown;
    int fan = d == 0 ? 3 : 2;
    for (int v : frontier)
      for (int c = 0; c < fan; ++c) {
        edges.emplace_back("t" + std::to_string(v), "t" + std::to_string(next));
        grown.push_back(next++);
      }
    frontier = std::move(grown);
  }
  return RootedTree("t0", edges);
}

std::vector<int> all_points(const MetricSpace& m) {
  std::vector<int> pts(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) pts[i] = static_cast<int>(i);
  return pts;
}

}  // namespace

TEST_CASE("scale grids enumerate exactly the decision boundaries") {
  MetricSpace m = unit_path_space(6);  // realized distances 1..5
  auto grid = coarse::exhaustive_grid(m, Rational(1));
  // 1..5 and the halves 3/2, 2, 5/2 that are >= 1: {1,3/2,2,5/2,3,4,5}
  std::vector<Rational> want = {Rational(1), Rational(3) / 2, Rational(2),
                                Rational(5) / 2, Rational(3), Rational(4),
                                Rational(5)};
  CHECK(grid == want);
  auto geo = coarse::geometric_grid(Rational(1), m.diameter());
  CHECK(geo == std::vector<Rational>{Rational(1), Rational(2), Rational(4)});
  // A threshold past the diameter leaves an empty grid.
  CHECK(coarse::geometric_grid(Rational(6), m.diameter()).empty());
  CHECK(coarse::exhaustive_grid(m, Rational(6)).empty());
  CHECK(coarse::default_r_grid(m, Rational(1), true) == want);
  CHECK(coarse::default_r_grid(m, Rational(1), false) == geo);
}

TEST_CASE("exact ball-cover decision agrees with the brute-force oracle") {
  Rng rng(307);
  std::vector<MetricSpace> spaces;
  spaces.push_back(unit_path_space(13));
  for (int i = 0; i < 4; ++i)
    spaces.push_back(coarse::random_tree(rng.next(), 8 + static_cast<int>(rng.below(7))).to_space());
  for (const auto& m : spaces) {
    auto grid = coarse::exhaustive_grid(m, Rational(1));
    // random but reproducible subset to restrict targets to
    std::vector<int> u;
    for (std::size_t p = 0; p < m.size(); ++p)
      if (rng.chance(0.7)) u.push_back(static_cast<int>(p));
    if (u.empty()) u.push_back(0);
    for (const Rational& r : grid) {
      Rational two_r = 2 * r;
      for (std::size_t x = 0; x < m.size(); ++x) {
        std::vector<int> target;
        for (int p : u)
          if (m.dist(x, static_cast<std::size_t>(p)) < two_r) target.push_back(p);
        int n = 1 + static_cast<int>(rng.below(3));
        CHECK(coarse::ball_cover_decision(m, target, n, r) ==
              oracle_coverable(m, target, n, r));
      }
    }
  }
}

TEST_CASE("ball-cover search refuses silently expensive instances") {
  MetricSpace m = unit_path_space(5);
  CHECK_THROWS_AS(coarse::ball_cover_decision(m, all_points(m), 6, Rational(1)),
                  coarse::BudgetError);
  // ... unless the budget is raised explicitly.
  CHECK(coarse::ball_cover_decision(m, all_points(m), 6, Rational(1), 6));
}

TEST_CASE("a long unit path doubles with three balls but not two") {
  MetricSpace m = unit_path_space(101);
  DoublingParams three{3, Rational(1)};
  std::vector<Rational> grid = {Rational(1), Rational(2), Rational(4),
                                Rational(8), Rational(16), Rational(32)};
  auto pass = coarse::is_lsd_subset(m, all_points(m), three, grid);
  INFO(pass.summary());
  CHECK(pass.pass());

  // Two open 16-balls hold at most 62 points, but B_32 around the middle
  // point holds 63.
  DoublingParams two{2, Rational(1)};
  auto fail = coarse::is_lsd_subset(m, all_points(m), two, {Rational(16)});
  REQUIRE(!fail.pass());
  CHECK(fail.violations[0].kind == "ball-cover");
  bool names_center = false;
  for (const auto& v : fail.violations)
    for (const auto& s : v.subjects)
      if (s == "x50") names_center = true;
  CHECK(names_center);
}

TEST_CASE("a branching tree defeats two balls at scale four") {
  RootedTree t = tripling_tree(6);
  MetricSpace m = t.to_space();
  DoublingParams two{2, Rational(4)};
  auto rep = coarse::is_lsd_subset(m, all_points(m), two, {Rational(4)});
  CHECK_FALSE(rep.pass());
  // Past the diameter a single ball is the whole space.
  DoublingParams one{1, Rational(16)};
  CHECK(coarse::is_lsd_subset(m, all_points(m), one, {Rational(16)}).pass());
}

TEST_CASE("doubling verdicts are monotone in the ball count") {
  Rng rng(311);
  for (int trial = 0; trial < 10; ++trial) {
    MetricSpace m = coarse::random_tree(rng.next(), 6 + static_cast<int>(rng.below(12))).to_space();
    std::vector<int> u;
    for (std::size_t p = 0; p < m.size(); ++p)
      if (rng.chance(0.6)) u.push_back(static_cast<int>(p));
    if (u.empty()) u.push_back(0);
    auto grid = coarse::geometric_grid(Rational(1), m.diameter());
    if (grid.empty()) continue;
    int n = 1 + static_cast<int>(rng.below(2));
    DoublingParams lo{n, Rational(1)};
    DoublingParams hi{n + 1, Rational(1)};
    if (coarse::is_lsd_subset(m, u, lo, grid).pass())
      CHECK(coarse::is_lsd_subset(m, u, hi, grid).pass());
  }
}

TEST_CASE("subset doubling guards its inputs") {
  MetricSpace m = unit_path_space(6);
  DoublingParams p{1, Rational(2)};
  CHECK_THROWS_AS(coarse::is_lsd_subset(m, {}, p, {Rational(2)}),
                  coarse::PreconditionError);
  CHECK_THROWS_AS(coarse::is_lsd_subset(m, {0, 9}, p, {Rational(2)}),
                  coarse::PreconditionError);
  // Grid scales below the threshold are a caller bug, not a weaker check.
  CHECK_THROWS_AS(coarse::is_lsd_subset(m, {0, 1}, p, {Rational(1)}),
                  coarse::PreconditionError);
  DoublingParams bad{0, Rational(1)};
  CHECK_THROWS_AS(coarse::is_lsd_subset(m, {0}, bad, {Rational(1)}),
                  coarse::PreconditionError);
  // Empty grid: nothing to check, vacuous pass.
  CHECK(coarse::is_lsd_subset(m, all_points(m), p, {}).pass());
}

TEST_CASE("weak family verdicts name the failing member") {
  MetricSpace m = unit_path_space(101);
  SubsetFamily f;
  f.sets.push_back({0, 1, 2});          // member 0: short interval, fine
  f.sets.push_back(all_points(m));      // member 1: the whole path, fails at 2 balls
  DoublingParams two{2, Rational(1)};
  auto rep = coarse::is_weakly_uniformly_lsd(m, f, two, {Rational(16)});
  REQUIRE_FALSE(rep.pass());
  for (const auto& v : rep.violations) CHECK(v.subjects[0] == "member 1");
}

TEST_CASE("uniform doubling searches the union scale and records it") {
  // Two singletons two steps apart: each is trivially coverable by one
  // ball, their union needs the doubled scale.
  MetricSpace m = unit_path_space(3);
  SubsetFamily f;
  f.sets = {{0}, {2}};
  DoublingParams p{1, Rational(1)};
  auto grid = coarse::geometric_grid(Rational(1), m.diameter());
  auto weak = coarse::is_weakly_uniformly_lsd(m, f, p, grid);
  CHECK(weak.pass());
  auto uni = coarse::is_uniformly_lsd(m, f, p, 2, grid);
  CHECK(uni.pass());
  REQUIRE(!uni.notes.empty());
  bool doubled = false;
  for (const auto& n : uni.notes)
    if (n.find("union {0,1}") != std::string::npos &&
        n.find("R'=2") != std::string::npos)
      doubled = true;
  CHECK(doubled);
}

TEST_CASE("families of bounded mesh are uniformly doubling with one ball") {
  Rng rng(313);
  for (int trial = 0; trial < 8; ++trial) {
    MetricSpace m = coarse::random_tree(rng.next(), 5 + static_cast<int>(rng.below(15))).to_space();
    SubsetFamily f;
    for (std::size_t p = 0; p < m.size(); ++p) {
      if (f.sets.empty() || rng.chance(0.5)) f.sets.push_back({});
      f.sets.back().push_back(static_cast<int>(p));
    }
    f.normalize();
    Rational d = coarse::family_mesh(m, f);
    DoublingParams p{1, d + 1};
    auto grid = coarse::geometric_grid(d + 1, m.diameter());
    auto rep = coarse::is_uniformly_lsd(m, f, p, 2, grid);
    INFO(rep.summary());
    CHECK(rep.pass());
  }
}

TEST_CASE("layered covers check under both doubling readings") {
  RootedTree t = coarse::path_tree(20);
  MetricSpace m = t.to_space();
  coarse::CoverWitness w = coarse::tree_asdim1_witness(t, Rational(1));
  DoublingParams p{3, Rational(1)};
  auto grid = coarse::geometric_grid(Rational(1), m.diameter());

  auto joint = coarse::verify_doubling_cover(m, w, p, 2, grid,
                                             DoublingReading::union_family,
                                             /*weak=*/false);
  INFO(joint.summary());
  CHECK(joint.pass());
  CHECK(!joint.notes.empty());

  auto layered = coarse::verify_doubling_cover(m, w, p, 2, grid,
                                               DoublingReading::per_family,
                                               /*weak=*/true);
  CHECK(layered.pass());

  // A witness that fails plain cover verification fails here too.
  coarse::CoverWitness broken = w;
  broken.entries[0].family.sets[0].clear();
  broken.entries[0].family.normalize();
  bool dropped_everything = true;
  for (const auto& e : broken.entries)
    if (!e.family.sets.empty()) dropped_everything = false;
  if (!dropped_everything) {
    auto rep = coarse::verify_doubling_cover(m, broken, p, 2, grid,
                                             DoublingReading::per_family,
                                             /*weak=*/true);
    CHECK_FALSE(rep.pass());
  }
}
