#include "fkr/hilbert.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace fkr;

namespace {

BasisSpec unit_legendre(std::size_t j_max)
{
  BasisSpec s;
  s.j_max = j_max;
  return s;
}

FunctionalElement random_element(std::mt19937_64& g, std::size_t n, double scale)
{
  std::normal_distribution<double> z(0.0, scale);
  FunctionalElement x(n);
  for (auto& c : x.coeffs)
    c = z(g);
  return x;
}

} // namespace

TEST_CASE("inner product examples")
{
  FunctionalElement e1({1.0, 0.0});
  FunctionalElement e2({0.0, 1.0});
  CHECK(inner(e1, e1) == 1.0);
  CHECK(inner(e1, e2) == 0.0);
  CHECK(inner(FunctionalElement({1.0, 2.0}), FunctionalElement({3.0, -1.0})) == 1.0);
  CHECK_THROWS_AS(inner(e1, FunctionalElement(3)), std::invalid_argument);
}

TEST_CASE("inner is symmetric and bilinear")
{
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 500; ++t) {
    auto x = random_element(g, 7, 1.0);
    auto y = random_element(g, 7, 1.0);
    auto z = random_element(g, 7, 1.0);
    double a = u(g);
    CHECK(inner(x, y) == inner(y, x));
    CHECK(inner(a * x + z, y) == doctest::Approx(a * inner(x, y) + inner(z, y)).epsilon(1e-12));
  }
}

TEST_CASE("norms of simple functions")
{
  Basis b(unit_legendre(6));
  FunctionalElement zero(6);
  CHECK(h_norm(zero) == 0.0);
  CHECK(one_norm_c0(b, zero).value == 0.0);

  // Legendre e_1 is the constant 1 on [0,1]
  FunctionalElement c(6);
  c.coeffs[0] = -1.75;
  CHECK(h_norm(c) == doctest::Approx(1.75));
  auto cn = one_norm_c0(b, c);
  CHECK(cn.value == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(cn.lipschitz == doctest::Approx(0.0).epsilon(1e-12));

  auto ramp = b.project([](std::span<const double> u) { return u[0]; });
  CHECK(h_norm(ramp) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  auto rn = one_norm_c0(b, ramp, 64);
  CHECK(rn.resolution == 64);
  CHECK(rn.sup == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rn.lipschitz == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rn.value == doctest::Approx(2.0).epsilon(1e-10));

  CHECK_THROWS_AS(one_norm_c0(b, ramp, 1), std::invalid_argument);
}

TEST_CASE("Parseval on projected functions")
{
  // ||x||^2 by direct quadrature of the expansion matches the coefficient sum
  std::mt19937_64 g(5);
  for (auto fam : {BasisFamily::legendre, BasisFamily::fourier}) {
    BasisSpec s = unit_legendre(9);
    s.family = fam;
    Basis b(s);
    for (int t = 0; t < 20; ++t) {
      auto x = random_element(g, 9, 1.0);
      auto sq = b.project([&](std::span<const double> u) { return b.eval(x, u); });
      double sum = 0.0;
      for (double c : x.coeffs)
        sum += c * c;
      CHECK(std::abs(h_norm(x) * h_norm(x) - sum) < 1e-12);
      for (std::size_t j = 0; j < 9; ++j)
        CHECK(sq.coeffs[j] == doctest::Approx(x.coeffs[j]).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("pseudo metric examples")
{
  FunctionalElement x({0.0, 5.0});
  FunctionalElement y({0.0, -5.0});
  CHECK(pseudo_dist(PseudoMetricSpec::projection(1), x, y) == 0.0);
  CHECK(h_norm(x - y) == 10.0);
  CHECK(pseudo_dist(PseudoMetricSpec::projection(2), x, y) == h_norm(x - y));
  CHECK(pseudo_dist(PseudoMetricSpec::full(), x, y) == h_norm(x - y));
  CHECK(pseudo_dist(PseudoMetricSpec::projection(2), x, x) == 0.0);
  CHECK_THROWS_AS(pseudo_dist(PseudoMetricSpec::projection(3), x, y), std::invalid_argument);
}

TEST_CASE("pseudo metric is dominated by the H norm")
{
  std::mt19937_64 g(9);
  std::uniform_int_distribution<std::size_t> jpick(0, 12);
  for (int t = 0; t < 10000; ++t) {
    auto x = random_element(g, 12, 3.0);
    auto y = random_element(g, 12, 3.0);
    std::size_t J = jpick(g);
    CHECK(pseudo_dist(PseudoMetricSpec::projection(J), x, y) <= h_norm(x - y) + 1e-12);
  }
}

TEST_CASE("Gram matrices are the identity")
{
  for (auto fam : {BasisFamily::legendre, BasisFamily::fourier})
    for (auto meas : {MeasureKind::lebesgue, MeasureKind::probability}) {
      BasisSpec s;
      s.family = fam;
      s.measure = meas;
      s.j_max = 12;
      CHECK(Basis(s).gram_error() < 1e-10);
      s.lo = {-1.0, 0.0};
      s.hi = {2.0, 0.5};
      CHECK(Basis(s).gram_error() < 1e-10);
    }
}

TEST_CASE("basis spec validation and json")
{
  BasisSpec s = unit_legendre(0);
  CHECK_THROWS_AS(Basis{s}, std::invalid_argument);
  s.j_max = 4;
  s.lo = {1.0};
  s.hi = {1.0};
  CHECK_THROWS_AS(Basis{s}, std::invalid_argument);

  BasisSpec t;
  t.family = BasisFamily::fourier;
  t.measure = MeasureKind::probability;
  t.lo = {0.0, -1.0};
  t.hi = {2.0, 1.0};
  t.j_max = 5;
  CHECK(basis_spec_from_json(to_json(t)) == t);
  CHECK(pseudo_metric_from_json(to_json(PseudoMetricSpec::projection(3))) == PseudoMetricSpec::projection(3));
  auto bad = to_json(t);
  bad["colour"] = "red";
  CHECK_THROWS_AS(basis_spec_from_json(bad), std::invalid_argument);
}
