#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fuzz.hpp"
#include "iflab/maps.hpp"
#include "nlohmann/json.hpp"
#include "oracles.hpp"

using namespace iflab;

namespace {

const P3 kX{1, 1, 0};
const Region kBox = Region::centered(10, 10, 24);

// straight pillar of `cells` cells at the root, alone in the box
Interface straight(int cells) {
  std::vector<P3> col;
  for (int k = 1; k <= cells; ++k) col.push_back({1, 1, 2 * k - 1});
  return extract_interface(fuzz::planted(kBox, col));
}

// interface realizing the increment sequence on top of a one-cell column
Interface spine_of(const std::vector<Increment>& seq) {
  SpinePart sp = recompose_spine(P3{1, 1, 1}, seq, trivial_remainder());
  return extract_interface(fuzz::planted(kBox, sp.cells));
}

int pillar_height_at(const Interface& I) { return extract_pillar(I, kX).height(); }

}  // namespace

TEST_CASE("grafting trivial spines rebuilds straight columns") {
  Interface stub = straight(1);
  for (int k = 1; k <= 4; ++k) {
    std::vector<Increment> seq(std::size_t(k), trivial_increment());
    Interface J = graft_spine(stub, P3{1, 1, 1}, seq, trivial_remainder());
    CHECK(J == straight(k + 1));
  }

  // a spine poking out of the box is refused
  std::vector<Increment> tall(40, trivial_increment());
  CHECK_THROWS_AS(graft_spine(stub, P3{1, 1, 1}, tall, trivial_remainder()),
                  std::runtime_error);
}

TEST_CASE("psi guards its arguments") {
  MapParams par;
  par.T = 4;
  CHECK_THROWS_AS(psi_i(flat_interface(kBox), kX, 0, par), std::invalid_argument);
  CHECK_THROWS_AS(psi_i(straight(3), kX, 0, par), std::invalid_argument);

  Interface I = straight(7);  // six increments
  CHECK_THROWS_AS(psi_i(I, kX, -1, par), std::out_of_range);
  CHECK_THROWS_AS(psi_i(I, kX, 4, par), std::out_of_range);  // tau + i > T
  CHECK_NOTHROW(psi_i(I, kX, 3, par));
}

TEST_CASE("psi is the identity on straight spines") {
  MapParams par;
  par.T = 4;
  Interface I = straight(6);
  for (int i = 0; i <= 3; ++i) {
    MapReport rep;
    Interface J = psi_i(I, kX, i, par, &rep);
    CHECK(J == I);
    CHECK(rep.identity);
    CHECK(rep.valid);
    CHECK(rep.excess_delta == 0);
    CHECK(rep.height_preserved);
  }
}

TEST_CASE("psi straightens a lateral step") {
  auto alphabet = enumerate_increments(10, 3);
  REQUIRE(alphabet.size() == 9);
  const Increment step = alphabet[1];  // a 10-face lateral, excess 2
  REQUIRE(step.excess() == 2);

  MapParams par;
  par.T = 4;
  std::vector<Increment> seq = {trivial_increment(), step, trivial_increment(),
                                trivial_increment()};
  Interface I = spine_of(seq);

  MapReport rep;
  Interface J = psi_i(I, kX, 1, par, &rep);
  CHECK(!rep.identity);
  CHECK(rep.j0 == 2);
  CHECK(rep.marked == std::vector<int>{2});
  CHECK(rep.marked_excess == 2);
  CHECK(rep.excess_delta == 2);
  CHECK(rep.valid);
  CHECK(rep.gain_ok);
  CHECK(rep.count_ok);
  CHECK(rep.height_preserved);
  CHECK(rep.prefix_preserved);
  CHECK(pillar_height_at(J) == pillar_height_at(I));

  // the output really is the straight spine of the same height
  CHECK(J == straight(5));

  // targeting a trivial position leaves the step alone
  MapReport rep0;
  CHECK(psi_i(I, kX, 0, par, &rep0) == I);
  CHECK(rep0.identity);
}

TEST_CASE("psi cascade marking follows the decay schedule") {
  auto alphabet = enumerate_increments(10, 3);
  const Increment step = alphabet[1];
  std::vector<Increment> seq = {step, trivial_increment(), step,
                                trivial_increment()};
  Interface I = spine_of(seq);

  // default decay: the second step at distance two misses the threshold
  // 2 e^{c/2 * 2} = 2 e^{0.25}
  MapParams par;
  par.T = 4;
  MapReport rep;
  psi_i(I, kX, 0, par, &rep);
  CHECK(rep.marked == std::vector<int>{1});

  // no decay: equal excess reaches the threshold and joins the cascade
  par.c_bar = 0.0;
  psi_i(I, kX, 0, par, &rep);
  CHECK(rep.marked == std::vector<int>{1, 3});
  CHECK(rep.marked_excess == 4);
  CHECK(rep.excess_delta == 4);
  CHECK(rep.gain_ok);
}

TEST_CASE("psi bundles the tail above T") {
  auto alphabet = enumerate_increments(10, 3);
  const Increment step = alphabet[1];
  std::vector<Increment> seq = {step,
                                trivial_increment(),
                                trivial_increment(),
                                trivial_increment(),
                                step,
                                step,
                                step};
  Interface I = spine_of(seq);

  MapParams par;
  par.T = 4;
  MapReport rep;
  Interface J = psi_i(I, kX, 0, par, &rep);
  // the bundle above position T carries excess 6 >= 2 e^{c/2 * 4}
  REQUIRE(rep.marked.size() == 2);
  CHECK(rep.marked[0] == 1);
  CHECK(rep.marked[1] == par.T + 1);
  CHECK(rep.valid);
  CHECK(rep.gain_ok);
  CHECK(rep.count_ok);
  CHECK(rep.height_preserved);
  CHECK(pillar_height_at(J) == pillar_height_at(I));
}

TEST_CASE("base map is the identity on grounded spines") {
  MapParams par;
  par.T = 4;
  MapReport rep;
  Interface I = straight(6);
  Interface J = phi_base(I, kX, par, &rep);
  CHECK(J == I);
  CHECK(rep.identity);
  CHECK(rep.valid);
  CHECK(rep.source_height == doctest::Approx(0.5));
  CHECK(rep.base_diam == doctest::Approx(0.0));
}

TEST_CASE("base map flattens a source pushed up by a neighbouring wall") {
  Region r = Region::centered(12, 12, 24);
  std::vector<P3> cells;
  for (int k = 1; k <= 9; ++k) cells.push_back({1, 1, 2 * k - 1});  // pillar
  for (int k = 1; k <= 6; ++k) cells.push_back({7, 1, 2 * k - 1});  // wall
  Interface I = extract_interface(fuzz::planted(r, cells));

  MapParams par;
  par.T = 3;
  MapReport rep;
  Interface J = phi_base(I, kX, par, &rep);

  CHECK(!rep.identity);
  CHECK(rep.source_height == doctest::Approx(6.5));
  CHECK(rep.h_star == 7);
  CHECK(rep.valid);
  CHECK(rep.height_preserved);
  CHECK(extract_pillar(J, kX).height() == 9);
  CHECK(rep.excess_identity_ok);
  CHECK(rep.gain_ok);
  CHECK(rep.excess_delta >= 2 * (rep.h_star - 1));
  CHECK(rep.first_trivial >= rep.h_star - 1);
  CHECK(rep.count_ok);
  CHECK(fuzz::revalidates(J));
}

TEST_CASE("mix swaps spine suffixes above a common straight run") {
  MapParams par;
  par.T = 5;

  SUBCASE("straight pair of different heights") {
    Interface I1 = straight(7), I2 = straight(10);
    MapReport rep;
    auto [J1, J2] = phi_mix(I1, I2, kX, 2, 4, par, &rep);
    CHECK(rep.pair_ok);
    CHECK(!rep.identity);
    CHECK(rep.tau_junction == 2);
    CHECK(rep.gain_ok);
    CHECK(rep.height_preserved);
    CHECK(rep.valid);
    // suffixes swap, so the heights trade places
    CHECK(pillar_height_at(J1) == 10);
    CHECK(pillar_height_at(J2) == 7);

    auto [K1, K2] = phi_mix(J1, J2, kX, 2, 4, par, &rep);
    CHECK(K1 == I1);
    CHECK(K2 == I2);
  }

  SUBCASE("junction slides past a fat increment") {
    auto alphabet = enumerate_increments(10, 3);
    std::vector<Increment> seq(7, trivial_increment());
    seq[1] = alphabet[1];  // position 2 is fat
    Interface I1 = spine_of(seq), I2 = straight(9);
    MapReport rep;
    phi_mix(I1, I2, kX, 2, 6, par, &rep);
    CHECK(!rep.identity);
    CHECK(rep.tau_junction == 4);
  }

  SUBCASE("no common window means identity") {
    auto alphabet = enumerate_increments(10, 3);
    std::vector<Increment> seq(7, trivial_increment());
    seq[1] = alphabet[1];
    Interface I1 = spine_of(seq), I2 = straight(9);
    MapReport rep;
    auto [J1, J2] = phi_mix(I1, I2, kX, 2, 2, par, &rep);
    CHECK(rep.identity);
    CHECK(J1 == I1);
    CHECK(J2 == I2);
  }
}

TEST_CASE("stat swaps aligned interior windows") {
  MapParams par;
  par.K = 0.1;  // keep the alignment depth usable at small T
  auto alphabet = enumerate_increments(10, 3);

  std::vector<Increment> seq(12, trivial_increment());
  seq[4] = alphabet[1];  // position 5 carries the lateral step
  Interface I1 = straight(14), I2 = spine_of(seq);

  MapReport rep;
  auto [J1, J2] = phi_stat(I1, I2, kX, 5, 5, 10, 10, par, &rep);
  CHECK(rep.pair_ok);
  CHECK(!rep.identity);
  CHECK(rep.tau_minus == 2);
  CHECK(rep.tau_plus == 2);
  CHECK(rep.gain_ok);
  CHECK(rep.height_preserved);
  CHECK(rep.count_ok);
  CHECK(rep.valid);
  CHECK(J1 != I1);  // the step moved into member one

  auto [K1, K2] = phi_stat(J1, J2, kX, 5, 5, 10, 10, par, &rep);
  CHECK(K1 == I1);
  CHECK(K2 == I2);

  // a fat increment blocking every candidate run forces the identity; the
  // steps zigzag so the spine never drifts out of the box
  Increment step_px{}, step_mx{};
  for (const Increment& X : alphabet) {
    if (X.top == P3{3, 1, 3}) step_px = X;
    if (X.top == P3{-1, 1, 3}) step_mx = X;
  }
  REQUIRE(!step_px.cells.empty());
  REQUIRE(!step_mx.cells.empty());
  std::vector<Increment> wall;
  for (int i = 0; i < 12; ++i) wall.push_back(i % 2 ? step_mx : step_px);
  Interface I3 = spine_of(wall);
  auto [J3, J4] = phi_stat(I1, I3, kX, 5, 5, 10, 10, par, &rep);
  CHECK(rep.identity);
  CHECK(J3 == I1);
  CHECK(J4 == I3);
}

TEST_CASE("fuzzed conditioned samples keep every map honest") {
  auto alphabet = enumerate_increments(16, 4);
  std::mt19937_64 g(404);
  MapParams par;
  par.T = 6;

  SUBCASE("increment map") {
    for (int iter = 0; iter < 40; ++iter) {
      auto c = fuzz::conditioned_interface(kBox, kX, par.T, g, alphabet, par, false);
      std::uniform_int_distribution<int> pick(0, par.T - c.dec.tau);
      MapReport rep;
      Interface J = psi_i(c.I, kX, pick(g), par, &rep);
      CHECK(rep.valid);
      CHECK(rep.height_preserved);
      CHECK(rep.gain_ok);
      CHECK(rep.count_ok);
      CHECK(rep.prefix_preserved);
      CHECK(fuzz::revalidates(J));
    }
  }

  SUBCASE("base map") {
    for (int iter = 0; iter < 30; ++iter) {
      auto c = fuzz::conditioned_interface(kBox, kX, par.T, g, alphabet, par, true);
      MapReport rep;
      Interface J = phi_base(c.I, kX, par, &rep);
      CHECK(rep.valid);
      CHECK(rep.height_preserved);
      CHECK(rep.excess_identity_ok);
      if (!rep.identity) CHECK(rep.gain_ok);
      CHECK(fuzz::revalidates(J));
    }
  }

  SUBCASE("pair maps are involutions") {
    for (int iter = 0; iter < 20; ++iter) {
      auto a = fuzz::conditioned_interface(kBox, kX, par.T, g, alphabet, par, false);
      auto b = fuzz::conditioned_interface(kBox, kX, par.T, g, alphabet, par, false);

      MapReport rep;
      auto [J1, J2] = phi_mix(a.I, b.I, kX, 2, par.T - 1, par, &rep);
      if (!rep.identity) {
        CHECK(rep.valid);
        CHECK(rep.gain_ok);
        CHECK(fuzz::revalidates(J1));
        CHECK(fuzz::revalidates(J2));
      }
      auto [K1, K2] = phi_mix(J1, J2, kX, 2, par.T - 1, par, &rep);
      CHECK(K1 == a.I);
      CHECK(K2 == b.I);

      MapParams sp = par;
      sp.K = 0.5;
      auto [S1, S2] = phi_stat(a.I, b.I, kX, 3, 3, par.T, par.T, sp, &rep);
      if (!rep.identity) {
        CHECK(rep.valid);
        CHECK(rep.count_ok);
      }
      auto [R1, R2] = phi_stat(S1, S2, kX, 3, 3, par.T, par.T, sp, &rep);
      CHECK(R1 == a.I);
      CHECK(R2 == b.I);
    }
  }
}

TEST_CASE("frozen preimage counts") {
  MapParams par;
  std::vector<Increment> one = {trivial_increment()};
  ScanResult r1 = multiplicity_scan(one, 0, par, 3, 15);
  CHECK(!r1.budget_exceeded);
  CHECK(r1.scanned == 26);
  CHECK(r1.by_delta == std::map<int, long long>{{0, 1}, {2, 8}});

  std::vector<Increment> two = {trivial_increment(), trivial_increment()};
  ScanResult r2 = multiplicity_scan(two, 0, par, 4, 19);
  CHECK(!r2.budget_exceeded);
  CHECK(r2.scanned == 211);
  CHECK(r2.by_delta ==
        std::map<int, long long>{{0, 1}, {2, 8}, {4, 8}, {6, 88}});

  // a tiny cap trips the budget flag instead of lying
  ScanResult r3 = multiplicity_scan(two, 0, par, 4, 19, 4, 10);
  CHECK(r3.budget_exceeded);
}

TEST_CASE("map reports serialize with their name") {
  MapParams par;
  par.T = 4;
  MapReport rep;
  psi_i(straight(6), kX, 0, par, &rep);
  auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j["map"] == "psi");
  CHECK(j["identity"] == true);

  phi_base(straight(6), kX, par, &rep);
  j = nlohmann::json::parse(rep.to_json());
  CHECK(j["map"] == "phi_base");

  Interface I1 = straight(7), I2 = straight(8);
  par.T = 5;
  phi_mix(I1, I2, kX, 2, 4, par, &rep);
  j = nlohmann::json::parse(rep.to_json());
  CHECK(j["map"] == "phi_mix");
  CHECK(j["tau_junction"] == 2);
}
