#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"

#include "gffpin/lattice.hpp"

using namespace gffpin;

TEST_CASE("box partitions into interior and boundary") {
  for (int d : {1, 2, 3}) {
    for (int N : {2, 3, 6}) {
      const Box b(d, N);
      CHECK(b.num_sites() == std::size_t(std::pow(N + 1, d)));
      CHECK(b.interior().size() == std::size_t(std::pow(N - 1, d)));
      CHECK(b.interior().size() + b.boundary().size() == b.num_sites());
      CHECK(b.tilde().size() == std::size_t(std::pow(N, d)));
      std::set<std::size_t> in(b.interior().begin(), b.interior().end());
      for (std::size_t x : b.boundary()) CHECK(in.count(x) == 0);
      for (std::size_t x : b.inner_boundary()) CHECK(in.count(x) == 1);
    }
  }
}

TEST_CASE("index and site are inverse, offsets respected") {
  const Box b(3, 4, {10, -2, 5});
  for (std::size_t i = 0; i < b.num_sites(); ++i) CHECK(b.index(b.site(i)) == i);
  CHECK(b.contains(Site{10, -2, 5}));
  CHECK_FALSE(b.contains(Site{9, -2, 5}));
  CHECK(b.is_boundary(b.index(Site{10, 0, 6})));
}

TEST_CASE("classification by distance") {
  const Box b(2, 4);
  CHECK(b.classify(Site{1, 1}).kind == SiteKind::inner_boundary);
  CHECK(b.classify(Site{0, 2}).kind == SiteKind::boundary);
  CHECK(b.classify(Site{2, 2}).kind == SiteKind::deep_interior);
  CHECK(b.classify(Site{2, 2}).dist == doctest::Approx(2.0));
}

TEST_CASE("tilde region is {1..N}^d") {
  const Box b(2, 3);
  for (std::size_t x : b.tilde()) {
    const Site s = b.site(x);
    CHECK(std::all_of(s.begin(), s.end(), [](int c) { return c >= 1 && c <= 3; }));
  }
}

TEST_CASE("neighbours are symmetric") {
  const Box b(3, 3);
  std::vector<std::size_t> n1, n2;
  for (std::size_t x = 0; x < b.num_sites(); ++x) {
    b.neighbors(x, n1);
    CHECK(n1.size() <= 6);
    for (std::size_t y : n1) {
      b.neighbors(y, n2);
      CHECK(std::find(n2.begin(), n2.end(), x) != n2.end());
    }
  }
}

TEST_CASE("coarse grid blocks are disjoint and halos contain blocks") {
  const CoarseGrid g = build_coarse_grid(2, 24, 4);
  CHECK(g.ratio() == 6);
  CHECK(g.num_blocks() == 16);  // labels 2..5 per axis
  std::set<Site> seen;
  for (const auto& j : g.blocks()) {
    for (const Site& x : g.block_sites(j)) {
      CHECK(seen.insert(x).second);
      CHECK(g.in_halo(j, x));
      CHECK(g.block_of(x) == j);
    }
    CHECK(g.halo_sites(j).size() > g.block_sites(j).size());
  }
  std::size_t total = 0;
  for (unsigned w = 0; w < 4; ++w) total += g.parity_class(w).size();
  CHECK(total == g.num_blocks());
}
