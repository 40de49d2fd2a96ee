#include "fkr/lattice.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

using namespace fkr;

TEST_CASE("cube enumeration")
{
  LatticeCube c({2, 3});
  auto s = c.sites();
  REQUIRE(s.size() == 6);
  CHECK(s.front() == Site{1, 1});
  CHECK(s.back() == Site{2, 3});
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(c.index_of(s[i]) == i);

  LatticeCube one({1});
  REQUIRE(one.sites().size() == 1);
  CHECK(one.site(0) == Site{1});

  LatticeCube cube3({4, 4, 4});
  auto s3 = cube3.sites();
  CHECK(s3.size() == 64);
  for (const auto& site : s3)
    for (auto v : site)
      CHECK((v >= 1 && v <= 4));
  CHECK(std::unique(s3.begin(), s3.end()) == s3.end());

  CHECK_THROWS_AS(LatticeCube({0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(LatticeCube(std::vector<std::int64_t>{}), std::invalid_argument);
  CHECK_THROWS_AS(c.site(6), std::out_of_range);
}

TEST_CASE("aspect ratio")
{
  CHECK(check_aspect_ratio(LatticeCube({4, 4}), 1.0).satisfied);
  CHECK_FALSE(check_aspect_ratio(LatticeCube({2, 8}), 0.5).satisfied);
  CHECK(check_aspect_ratio(LatticeCube({6, 8}), 0.5).satisfied);
  CHECK_THROWS_AS(check_aspect_ratio(LatticeCube({4}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(check_aspect_ratio(LatticeCube({4}), 1.5), std::invalid_argument);
}

TEST_CASE("effective sample size")
{
  CHECK(effective_sample_size(LatticeCube({16, 16})) == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(effective_sample_size(LatticeCube({100})) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(effective_sample_size(LatticeCube({4, 8})) == doctest::Approx(std::sqrt(32.0)).epsilon(1e-14));
}

TEST_CASE("block cover examples")
{
  auto cov = block_cover({8.0}, {2.0});
  REQUIRE(cov.size() == 2);
  REQUIRE(cov[0].blocks.size() == 2);
  REQUIRE(cov[1].blocks.size() == 2);
  CHECK(cov[0].blocks[0] == Box{{0.0}, {2.0}});
  CHECK(cov[0].blocks[1] == Box{{4.0}, {6.0}});
  CHECK(cov[1].blocks[0] == Box{{2.0}, {4.0}});
  CHECK(cov[1].blocks[1] == Box{{6.0}, {8.0}});

  auto cov2 = block_cover({8.0, 8.0}, {2.0, 2.0});
  REQUIRE(cov2.size() == 4);
  double vol = 0.0;
  for (const auto& c : cov2) {
    CHECK(c.blocks.size() == 4);
    for (const auto& b : c.blocks)
      vol += b.volume();
  }
  CHECK(vol == doctest::Approx(64.0).epsilon(1e-14));

  CHECK_THROWS_AS(block_cover({8.0}, {5.0}), std::invalid_argument);
}

TEST_CASE("cantor partition examples")
{
  auto p = cantor_partition({1.0}, 0.5, 1);
  REQUIRE(p.outer_cubes.size() == 2);
  CHECK(p.outer_cubes[0].lo[0] == doctest::Approx(0.0));
  CHECK(p.outer_cubes[0].hi[0] == doctest::Approx(0.25));
  CHECK(p.outer_cubes[1].lo[0] == doctest::Approx(0.75));
  CHECK(p.outer_cubes[1].hi[0] == doctest::Approx(1.0));

  auto p2 = cantor_partition({8.0, 8.0}, 0.5, 1);
  REQUIRE(p2.outer_cubes.size() == 4);
  for (const auto& b : p2.outer_cubes)
    CHECK(b.volume() == doctest::Approx(4.0));
  CHECK(p2.residual_volume_by_level.at(0) == doctest::Approx(48.0));

  // Two steps of the recursion by hand: keep 1/3 at each end, twice.
  auto p3 = cantor_partition({1.0}, 1.0 / 3.0, 2);
  REQUIRE(p3.outer_cubes.size() == 4);
  double total = 0.0;
  for (const auto& b : p3.outer_cubes) {
    CHECK(b.hi[0] - b.lo[0] == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    total += b.volume();
  }
  CHECK(total == doctest::Approx(4.0 / 9.0).epsilon(1e-12));

  CHECK_THROWS_AS(cantor_partition({1.0}, 0.6, 1), std::invalid_argument);
  CHECK_THROWS_AS(cantor_partition({1.0}, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(cantor_partition({1.0}, 0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(cantor_partition({1.0, 1.0}, 0.5, 12, 1000), std::length_error);
}

namespace {

struct Draw
{
  std::vector<double> A;
  std::vector<double> P;
};

Draw random_extent(std::mt19937_64& g)
{
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Draw d;
  int N = dim(g);
  for (int k = 0; k < N; ++k) {
    double a = 2.0 + 30.0 * u(g);
    d.A.push_back(a);
    d.P.push_back(a * (0.05 + 0.45 * u(g)));
  }
  return d;
}

} // namespace

TEST_CASE("block cover tiles and separates on random extents")
{
  std::mt19937_64 g(7);
  for (int trial = 0; trial < 150; ++trial) {
    auto d = random_extent(g);
    auto cov = block_cover(d.A, d.P);
    CHECK(cov.size() == (std::size_t{1} << d.A.size()));
    double prod = 1.0;
    for (double a : d.A)
      prod *= a;
    std::vector<Box> all;
    for (const auto& c : cov)
      all.insert(all.end(), c.blocks.begin(), c.blocks.end());
    double vol = 0.0;
    for (const auto& b : all)
      vol += b.volume();
    CHECK(std::abs(vol - prod) <= 1e-12 * prod);
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = i + 1; j < all.size(); ++j)
        CHECK(overlap_volume(all[i], all[j]) == 0.0);

    double pmin = *std::min_element(d.P.begin(), d.P.end());
    for (const auto& c : cov)
      for (std::size_t i = 0; i < c.blocks.size(); ++i)
        for (std::size_t j = i + 1; j < c.blocks.size(); ++j)
          CHECK(box_distance(c.blocks[i], c.blocks[j]) >= pmin);
  }
}

TEST_CASE("cantor volumes and refinement on random extents")
{
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    auto d = random_extent(g);
    double delta = 0.01 + 0.49 * u(g);
    std::size_t levels = 1 + trial % 3;
    auto p = cantor_partition(d.A, delta, levels);
    double prod = 1.0;
    for (double a : d.A)
      prod *= a;
    double N = static_cast<double>(d.A.size());
    for (std::size_t l = 0; l <= levels; ++l) {
      double expect = std::pow(1.0 - delta, N * l) * prod;
      CHECK(std::abs(p.outer_volume_by_level[l] - expect) <= 1e-12 * prod);
    }
    // every level-(l+1) cube sits inside a level-l cube
    if (levels >= 2) {
      auto coarse = cantor_partition(d.A, delta, levels - 1);
      for (const auto& fine : p.outer_cubes) {
        bool inside = std::any_of(coarse.outer_cubes.begin(), coarse.outer_cubes.end(),
                                  [&](const Box& b) { return b.contains(fine, 1e-12); });
        CHECK(inside);
      }
    }
  }
}

TEST_CASE("partition json lists lo/hi pairs")
{
  auto j = to_json(cantor_partition({1.0}, 0.5, 1));
  CHECK(j.contains("outer_cubes"));
  auto box = to_json(Box{{0.0, 1.0}, {2.0, 3.0}});
  REQUIRE(box.size() == 2);
  CHECK(box[1][0] == 1.0);
  CHECK(box[1][1] == 3.0);
}
