#include "fkr/covering.hpp"

#include <doctest.h>

#include <cmath>

using namespace fkr;

namespace {

Basis unit_basis(std::size_t j_max = 8)
{
  BasisSpec s;
  s.j_max = j_max;
  return Basis(s);
}

} // namespace

TEST_CASE("degenerate ball has a single zero centre")
{
  Basis b = unit_basis();
  for (double delta : {1.0, 0.1, 1e-4}) {
    auto cov = build_covering(LipschitzBall{0.0}, delta, b);
    REQUIRE(cov.size() == 1);
    for (double c : cov.center(0))
      CHECK(c == 0.0);
  }
  CHECK(covering_count_estimate(LipschitzBall{0.0}, 0.01, b) == 1.0);
}

TEST_CASE("covering of the unit ball at radius one half")
{
  Basis b = unit_basis();
  auto cov = build_covering(LipschitzBall{1.0}, 0.5, b);
  CHECK(cov.size() > 1);
  CHECK(std::log(static_cast<double>(cov.size())) <= cov.claimed_bound + 1e-9);
  CHECK(static_cast<double>(cov.size()) == covering_count_estimate(LipschitzBall{1.0}, 0.5, b));
  auto audit = audit_covering(cov, b, 1000, 42);
  CHECK(audit.probes == 1000);
  CHECK(audit.covered == 1000);
  CHECK(audit.max_distance < 0.5);
}

TEST_CASE("probes belong to the ball")
{
  BasisSpec s;
  for (std::uint64_t key = 0; key < 200; ++key) {
    auto g = random_ball_member(LipschitzBall{1.5}, s, key);
    double n = grid_function_sup(g) + grid_function_lipschitz(g, s);
    CHECK(n <= 1.5 + 1e-12);
  }
}

TEST_CASE("log count scales like the inverse radius")
{
  Basis b = unit_basis();
  std::vector<double> scaled;
  for (double delta : {0.4, 0.2, 0.1, 0.05}) {
    double count = covering_count_estimate(LipschitzBall{1.0}, delta, b);
    scaled.push_back(std::log(count) * delta);
  }
  for (double v : scaled) {
    CHECK(v > 0.5);
    CHECK(v < 6.0);
  }
  // the ratio settles rather than drifting with delta
  CHECK(std::abs(scaled[3] / scaled[2] - 1.0) < 0.25);
}

TEST_CASE("covering too large carries the estimate")
{
  Basis b = unit_basis();
  CoveringOptions opts;
  opts.max_centers = 100;
  try {
    build_covering(LipschitzBall{1.0}, 0.25, b, opts);
    FAIL("expected CoveringTooLarge");
  } catch (const CoveringTooLarge& e) {
    CHECK(e.estimate() > 100.0);
    CHECK(e.estimate() == covering_count_estimate(LipschitzBall{1.0}, 0.25, b));
  }
}

TEST_CASE("two dimensional covering is audited")
{
  BasisSpec s;
  s.lo = {0.0, 0.0};
  s.hi = {0.5, 0.5};
  s.j_max = 6;
  Basis b(s);
  auto cov = build_covering(LipschitzBall{1.2}, 0.5, b, {.max_centers = 2'000'000, .threads = 1});
  CHECK(cov.size() >= 1);
  auto audit = audit_covering(cov, b, 200, 7, 1);
  CHECK(audit.covered == audit.probes);
}

TEST_CASE("covering is independent of thread count")
{
  Basis b = unit_basis();
  auto one = build_covering(LipschitzBall{1.0}, 0.5, b, {.max_centers = 1'000'000, .threads = 1});
  auto many = build_covering(LipschitzBall{1.0}, 0.5, b, {.max_centers = 1'000'000, .threads = 4});
  CHECK(one.flat == many.flat);
}
