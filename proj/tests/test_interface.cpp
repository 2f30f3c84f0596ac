#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "iflab/interface.hpp"
#include "nlohmann/json.hpp"
#include "oracles.hpp"

using namespace iflab;

namespace {

std::set<oracle::Tri> as_tris(const std::vector<P3>& faces) {
  std::set<oracle::Tri> out;
  for (const P3& f : faces) out.insert(oracle::tri(f));
  return out;
}

int total_wall_excess(const Classification& cls) {
  int sum = 0;
  for (const Wall& w : cls.walls) sum += wall_excess(w.faces);
  return sum;
}

}  // namespace

TEST_CASE("extraction matches the reference on fixtures") {
  std::vector<SpinConfig> cfgs = {
      oracle::fixture_flat(6),      oracle::fixture_single_bump(6),
      oracle::fixture_column(6, 4), oracle::fixture_nested(6),
      oracle::fixture_mushroom(6),  oracle::fixture_diagonal(6),
  };
  for (const SpinConfig& cfg : cfgs) {
    Interface I = extract_interface(cfg);
    CHECK(as_tris(I.faces) == oracle::reference_interface(cfg));
  }
}

TEST_CASE("extraction matches the reference on spin soups") {
  for (int n : {5, 8}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      SpinConfig cfg = oracle::fixture_soup(n, seed, 0.12, 2);
      Interface I = extract_interface(cfg);
      CHECK(as_tris(I.faces) == oracle::reference_interface(cfg));

      // bubbles and overhang pockets resolve to the two-phase configuration
      SpinConfig tp = two_phase_config(I, cfg.beta);
      CHECK(extract_interface(tp) == I);
      std::set<oracle::Tri> want = oracle::reference_plus_cells(cfg);
      for (std::size_t i = 0; i < cfg.region.cell_count(); ++i) {
        P3 c = cfg.region.cell_at(i);
        CHECK((tp.at(c) == +1) == (want.count(oracle::tri(c)) == 1));
      }
    }
  }
}

TEST_CASE("flat interface is one ceiling and no walls") {
  Region r = Region::centered(8, 8, 16);
  Interface I = flat_interface(r);
  CHECK(I.size() == 256);
  CHECK(I == extract_interface(oracle::fixture_flat(8)));
  CHECK(top_height2(I.faces) == 0);

  Classification cls = classify(I);
  CHECK(cls.walls.empty());
  REQUIRE(cls.ceilings.size() == 1);
  CHECK(cls.ceilings[0].height == 0);
  CHECK(int(cls.ceilings[0].faces.size()) == 256);
}

TEST_CASE("frozen fixture geometry") {
  Interface flat = flat_interface(Region::centered(8, 8, 16));

  SUBCASE("single bump") {
    Interface I = extract_interface(oracle::fixture_single_bump(8));
    CHECK(I.size() == 260);
    CHECK(excess_area(I, flat) == 4);
    CHECK(top_height2(I.faces) == 2);
    Classification cls = classify(I);
    REQUIRE(cls.walls.size() == 1);
    CHECK(wall_excess(cls.walls[0].faces) == 4);
    CHECK(cls.ceilings.size() == 2);
  }

  SUBCASE("nested plinth") {
    Interface I = extract_interface(oracle::fixture_nested(8));
    CHECK(I.size() == 272);
    CHECK(excess_area(I, flat) == 16);
    Classification cls = classify(I);
    REQUIRE(cls.walls.size() == 2);
    CHECK(total_wall_excess(cls) == 16);
    CHECK(cls.ceilings.size() == 3);
  }

  SUBCASE("mushroom overhang") {
    Interface I = extract_interface(oracle::fixture_mushroom(8));
    CHECK(I.size() == 268);
    CHECK(excess_area(I, flat) == 12);
    CHECK(top_height2(I.faces) == 4);
    Classification cls = classify(I);
    REQUIRE(cls.walls.size() == 1);
    CHECK(wall_excess(cls.walls[0].faces) == 12);
    CHECK(cls.ceilings.size() == 2);
  }

  SUBCASE("diagonal pair") {
    Interface I = extract_interface(oracle::fixture_diagonal(8));
    CHECK(I.size() == 266);
    CHECK(excess_area(I, flat) == 10);
    CHECK(top_height2(I.faces) == 4);
    Classification cls = classify(I);
    REQUIRE(cls.walls.size() == 1);
    CHECK(wall_excess(cls.walls[0].faces) == 10);
    CHECK(cls.ceilings.size() == 2);
  }

  SUBCASE("column of five") {
    Interface I = extract_interface(oracle::fixture_column(8, 5));
    CHECK(I.size() == 276);
    CHECK(excess_area(I, flat) == 20);
    CHECK(top_height2(I.faces) == 10);
    CHECK(top_height2(I.faces) == oracle::reference_top2(as_tris(I.faces)));
    Classification cls = classify(I);
    REQUIRE(cls.walls.size() == 1);
    CHECK(wall_excess(cls.walls[0].faces) == 20);
    CHECK(cls.ceilings.size() == 2);
  }
}

TEST_CASE("frozen soup geometry") {
  // seed -> interface size, wall count, total excess
  struct Row {
    std::uint64_t seed;
    int size, walls, excess;
  };
  Interface flat = flat_interface(Region::centered(8, 8, 16));
  for (Row row : {Row{1, 648, 10, 392}, Row{2, 600, 12, 344}, Row{3, 738, 10, 482}}) {
    SpinConfig cfg = oracle::fixture_soup(8, row.seed, 0.12, 2);
    Interface I = extract_interface(cfg);
    CHECK(I.size() == row.size);
    CHECK(excess_area(I, flat) == row.excess);
    Classification cls = classify(I);
    CHECK(int(cls.walls.size()) == row.walls);
    // wall excesses account for the whole excess area
    CHECK(total_wall_excess(cls) == row.excess);
  }
}

TEST_CASE("wall inequalities hold on every sampled wall") {
  std::vector<SpinConfig> cfgs = {
      oracle::fixture_single_bump(8), oracle::fixture_nested(8),
      oracle::fixture_mushroom(8),    oracle::fixture_diagonal(8),
      oracle::fixture_column(8, 5),
  };
  for (std::uint64_t seed = 1; seed <= 6; ++seed)
    cfgs.push_back(oracle::fixture_soup(8, seed, 0.15, 3));

  for (const SpinConfig& cfg : cfgs) {
    Classification cls = classify(extract_interface(cfg));
    for (const Wall& w : cls.walls) {
      int m = wall_excess(w.faces);
      CHECK(2 * m >= int(w.faces.size()));
      CHECK(m >= projection_edge_count(w.faces) + projection_face_count(w.faces));
    }
  }
}

TEST_CASE("standard wall representation round trips") {
  std::vector<SpinConfig> cfgs = {
      oracle::fixture_flat(8),        oracle::fixture_single_bump(8),
      oracle::fixture_nested(8),      oracle::fixture_mushroom(8),
      oracle::fixture_diagonal(8),    oracle::fixture_column(8, 5),
  };
  for (std::uint64_t seed = 1; seed <= 6; ++seed)
    cfgs.push_back(oracle::fixture_soup(8, seed, 0.12, 2));

  for (const SpinConfig& cfg : cfgs) {
    Interface I = extract_interface(cfg);
    WallCollection coll = standard_wall_representation(I);
    Classification cls = classify(I);
    REQUIRE(coll.walls.size() == cls.walls.size());
    for (std::size_t i = 0; i < coll.walls.size(); ++i) {
      // standardization translates each wall down by its own floor height,
      // nothing else; pits may still dip below level zero
      CHECK(coll.walls[i].index == cls.walls[i].index);
      std::vector<P3> shifted = cls.walls[i].faces;
      for (P3& f : shifted) f.z -= 2 * cls.walls[i].floor_height;
      CHECK(coll.walls[i].faces == shifted);
    }
    for (std::size_t i = 1; i < coll.walls.size(); ++i)
      CHECK(coll.walls[i - 1].index < coll.walls[i].index);
    CHECK(reconstruct(coll) == I);
  }
}

TEST_CASE("reconstruct rejects malformed collections") {
  Interface I = extract_interface(oracle::fixture_single_bump(8));
  WallCollection coll = standard_wall_representation(I);
  REQUIRE(coll.walls.size() == 1);

  WallCollection dup = coll;
  dup.walls.push_back(coll.walls[0]);  // same index twice
  CHECK_THROWS_AS(reconstruct(dup), std::runtime_error);

  WallCollection empty_wall = coll;
  empty_wall.walls[0].faces.clear();
  CHECK_THROWS_AS(reconstruct(empty_wall), std::runtime_error);

  WallCollection skewed = coll;
  for (P3& f : skewed.walls[0].faces) f.z += 2;  // floor no longer at zero
  CHECK_THROWS_AS(reconstruct(skewed), std::runtime_error);
}

TEST_CASE("closeness groups walls by projection distance") {
  Region r = Region::centered(10, 10, 16);
  auto bumps = [&](std::vector<P3> cells) {
    SpinConfig cfg = ground_state(r, 1.0);
    for (const P3& c : cells) cfg.set(c, +1);
    return standard_wall_representation(extract_interface(cfg));
  };

  // bumps two cells apart: projection edges at distance 1 <= sqrt(1)+sqrt(1)
  WallCollection close = bumps({{1, 1, 1}, {5, 1, 1}});
  REQUIRE(close.walls.size() == 2);
  CHECK(groups_of_walls(close).size() == 1);

  // four cells apart: distance 3 > 2
  WallCollection far = bumps({{1, 1, 1}, {9, 1, 1}});
  REQUIRE(far.walls.size() == 2);
  auto groups = groups_of_walls(far);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].wall_ids.size() == 1);
  CHECK(groups[1].wall_ids.size() == 1);
  CHECK(groups[0].index < groups[1].index);
}

TEST_CASE("nesting recovers the plinth order") {
  Interface I = extract_interface(oracle::fixture_nested(8));
  WallCollection coll = standard_wall_representation(I);
  REQUIRE(coll.walls.size() == 2);

  // both walls of the plinth sit in one group
  CHECK(groups_of_walls(coll).size() == 1);

  // the face over the tip is inside both walls, innermost first
  std::vector<int> nest = nested_walls(P3{1, 1, 0}, coll);
  REQUIRE(nest.size() == 2);
  CHECK(coll.walls[std::size_t(nest[0])].faces.size() <
        coll.walls[std::size_t(nest[1])].faces.size());

  // a face far away is inside neither
  CHECK(nested_walls(P3{11, 11, 0}, coll).empty());

  for (const StandardWall& w : coll.walls) {
    CHECK(interior_to(P3{1, 1, 0}, w.faces));
    CHECK(!interior_to(P3{11, 11, 0}, w.faces));
  }
}

TEST_CASE("interface json is deterministic and complete") {
  Interface I = extract_interface(oracle::fixture_nested(8));
  Classification cls = classify(I);
  std::string a = interface_json(I, cls);
  std::string b = interface_json(I, cls);
  CHECK(a == b);

  auto j = nlohmann::json::parse(a);
  CHECK(j["faces"].size() == 272);
  CHECK(j["walls"].size() == 2);
  CHECK(j["ceilings"].size() == 3);
  CHECK(j["region"]["hi"][0] == 8);
}
