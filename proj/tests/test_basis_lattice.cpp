#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <random>

#include "xysim/basis.hpp"
#include "xysim/lattice.hpp"

using namespace xysim;

TEST_SUITE_BEGIN("basis_lattice");

TEST_CASE("rectangular lattice counts") {
  auto l22 = build_rect_lattice(2, 2);
  CHECK(l22->n_sites() == 4);
  CHECK(l22->n_bonds() == 4);
  CHECK(l22->n_plaquettes() == 1);
  CHECK(2 * l22->triples.size() == 8);  // 8 directed length-2 paths

  auto chain = build_rect_lattice(1, 5);
  CHECK(chain->n_sites() == 5);
  CHECK(chain->n_bonds() == 4);
  CHECK(chain->n_plaquettes() == 0);

  auto l55 = build_rect_lattice(5, 5);
  CHECK(l55->n_sites() == 25);
  CHECK(l55->n_bonds() == 40);
  CHECK(l55->n_plaquettes() == 16);

  CHECK_THROWS_AS(build_rect_lattice(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_rect_lattice(3, -1), std::invalid_argument);
}

TEST_CASE("bond and plaquette structure") {
  auto lat = build_rect_lattice(4, 3);
  CHECK(lat->n_bonds() == 4 * 2 + 3 * 3);
  for (const auto& b : lat->bonds) {
    CHECK(b[0] < b[1]);
    CHECK(lat->adjacent(b[0], b[1]));
  }
  for (const auto& p : lat->plaquettes) {
    for (int k = 0; k < 4; ++k) CHECK(lat->adjacent(p[k], p[(k + 1) % 4]));
    // counterclockwise from the lower-left corner
    CHECK(lat->sites[p[1]][0] == lat->sites[p[0]][0] + 1);
    CHECK(lat->sites[p[3]][1] == lat->sites[p[0]][1] + 1);
  }
  for (const auto& t : lat->triples) {
    CHECK(t[0] < t[2]);
    CHECK(lat->adjacent(t[0], t[1]));
    CHECK(lat->adjacent(t[1], t[2]));
    const int dist = std::abs(lat->sites[t[0]][0] - lat->sites[t[2]][0]) +
                     std::abs(lat->sites[t[0]][1] - lat->sites[t[2]][1]);
    CHECK(dist == 2);
  }
  // canonical storage holds each undirected path exactly once
  auto sorted = lat->triples;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("sector enumeration order and dimensions") {
  SectorBasis b(4, 2);
  CHECK(b.dim() == 6);
  const uint64_t expect[6] = {0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100};
  for (uint64_t i = 0; i < 6; ++i) CHECK(b.unrank(i) == expect[i]);
  CHECK(b.rank(0b0011) == 0);
  CHECK(b.rank(0b1100) == 5);

  SectorBasis big(36, 18);
  CHECK(big.dim() == 9075135300ULL);

  SectorBasis empty(5, 0);
  CHECK(empty.dim() == 1);
  CHECK(empty.unrank(0) == 0);

  CHECK_THROWS_AS(SectorBasis(4, 5), std::invalid_argument);
  CHECK_THROWS_AS(SectorBasis(4, -1), std::invalid_argument);
  CHECK_THROWS_WITH_AS(SectorBasis(64, 32), doctest::Contains("limit"), std::invalid_argument);
  CHECK_THROWS_AS(b.rank(0b0111), std::invalid_argument);
}

TEST_CASE("rank against brute-force enumerate-and-sort") {
  // independent oracle: enumerate all weight-3 integers of 6 bits, sort
  std::vector<uint64_t> all;
  for (uint64_t s = 0; s < 64; ++s)
    if (std::popcount(s) == 3) all.push_back(s);
  std::sort(all.begin(), all.end());
  SectorBasis b(6, 3);
  REQUIRE(b.dim() == all.size());
  const uint64_t target = 0b010101;
  const auto it = std::find(all.begin(), all.end(), target);
  CHECK(b.rank(target) == static_cast<uint64_t>(it - all.begin()));
  for (uint64_t i = 0; i < all.size(); ++i) {
    CHECK(b.unrank(i) == all[i]);
    CHECK(b.rank(all[i]) == i);
  }
}

TEST_CASE("rank/unrank round trip property") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 19);
    const int m = static_cast<int>(rng() % (n + 1));
    SectorBasis b(n, m);
    // walk the full order: count and monotonicity
    uint64_t s = b.first();
    uint64_t count = 1;
    uint64_t prev = s;
    while (count < b.dim()) {
      s = SectorBasis::next_config(s);
      CHECK(s > prev);
      prev = s;
      ++count;
    }
    CHECK(count == b.dim());
    for (int k = 0; k < 20; ++k) {
      const uint64_t i = rng() % b.dim();
      CHECK(b.rank(b.unrank(i)) == i);
      CHECK(std::popcount(b.unrank(i)) == m);
    }
  }
}

TEST_CASE("hop delta matches rank difference") {
  std::mt19937_64 rng(11);
  SectorBasis b(18, 9);
  for (int trial = 0; trial < 400; ++trial) {
    const uint64_t r = rng() % b.dim();
    const uint64_t s = b.unrank(r);
    const int a = static_cast<int>(rng() % 18);
    const int c = static_cast<int>(rng() % 18);
    if (a == c) continue;
    const int lo = std::min(a, c), hi = std::max(a, c);
    if (((s >> lo) & 1) == ((s >> hi) & 1)) continue;
    uint64_t between = 0;
    if (hi - lo > 1) between = ((1ULL << hi) - 1) & ~((1ULL << (lo + 1)) - 1);
    const int64_t delta = b.hop_delta(s, lo, hi, between);
    const uint64_t partner = s ^ (1ULL << lo) ^ (1ULL << hi);
    if ((s >> lo) & 1)
      CHECK(b.rank(partner) == r + delta);
    else
      CHECK(b.rank(partner) == r - delta);
  }
}

TEST_SUITE_END();
