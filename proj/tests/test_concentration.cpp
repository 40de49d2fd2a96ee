#include "fkr/concentration.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fkr;

namespace {

// P(|K - n/2| >= t) for K ~ Binomial(n, 1/2), summed in log space.
double fair_binomial_tail(int n, double t)
{
  double p = 0.0;
  for (int k = 0; k <= n; ++k)
    if (std::abs(k - 0.5 * n) >= t - 1e-12)
      p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  return p;
}

TailRecipe rademacher()
{
  TailRecipe r;
  r.summands = SummandKind::iid_rademacher;
  return r;
}

BoundSpec full_spec(BoundKind k)
{
  BoundSpec s;
  s.which = k;
  s.B = 1.0;
  s.gamma = 1.0;
  s.norm_g = 2.0;
  return s;
}

} // namespace

TEST_CASE("bound evaluations by direct substitution")
{
  LatticeCube c55({55});
  BoundSpec cor = full_spec(BoundKind::cor32);
  double L = std::log(55.0);
  CHECK(rate_functional(c55) == doctest::Approx(55.0 / (L * L)).epsilon(1e-14));
  CHECK(bound_eval(cor, 1.0, c55) == doctest::Approx(std::exp(-55.0 / (L * L))).epsilon(1e-14));
  cor.B = 2.0;
  CHECK(bound_eval(cor, 1.0, c55) == doctest::Approx(std::exp(-27.5 / (L * L))).epsilon(1e-14));

  BoundSpec p41 = full_spec(BoundKind::prop41);
  p41.norm_g = 10.0;
  CHECK(bound_eval(p41, 1.0, LatticeCube({100})) == doctest::Approx(std::exp(-10.0)).epsilon(1e-14));
  CHECK(bound_eval(p41, 1.0, LatticeCube({100, 100})) == doctest::Approx(std::exp(-10.0)).epsilon(1e-14));

  BoundSpec t33 = full_spec(BoundKind::thm33_general);
  t33.gamma = 2.0;
  LatticeCube c({40, 40});
  double eR = 0.7 * rate_functional(c);
  CHECK(bound_shape(t33, 0.7, c).argument == doctest::Approx(std::sqrt(eR)).epsilon(1e-14));

  BoundSpec missing;
  missing.which = BoundKind::prop41;
  missing.B = 1.0;
  CHECK_THROWS_AS(bound_eval(missing, 1.0, c), std::invalid_argument);
  BoundSpec g1 = full_spec(BoundKind::thm33_gamma1);
  g1.gamma = 0.5;
  CHECK_THROWS_AS(bound_eval(g1, 1.0, c), std::invalid_argument);
  CHECK_THROWS_AS(bound_eval(cor, 0.0, c), std::invalid_argument);
}

TEST_CASE("gamma one forms coincide with the general forms")
{
  std::mt19937_64 g(13);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int t = 0; t < 200; ++t) {
    LatticeCube c({8 + t, 8 + t});
    double eps = u(g);
    auto a = full_spec(BoundKind::thm33_general), b = full_spec(BoundKind::thm33_gamma1);
    a.A1 = b.A1 = u(g);
    CHECK(bound_eval(a, eps, c) == bound_eval(b, eps, c));
    auto p = full_spec(BoundKind::thm42_general), q = full_spec(BoundKind::thm42_gamma1);
    CHECK(bound_eval(p, eps, c) == doctest::Approx(bound_eval(q, eps, c)).epsilon(1e-12));
  }
}

TEST_CASE("tail bounds are positive and decreasing past the exponent knee")
{
  const BoundKind kinds[] = {BoundKind::cor32,        BoundKind::thm33_general, BoundKind::thm33_gamma1,
                             BoundKind::prop41,       BoundKind::thm42_general, BoundKind::thm42_gamma1};
  for (BoundKind k : kinds)
    for (std::size_t N : {1, 2}) {
      auto s = full_spec(k);
      if (k == BoundKind::thm33_general || k == BoundKind::thm42_general)
        s.gamma = 1.5;
      std::vector<LatticeCube> ladder;
      for (std::int64_t e : {64, 128, 256, 512})
        ladder.push_back(N == 1 ? LatticeCube({e * e}) : LatticeCube({e, e}));
      // compare logs: the values themselves underflow on the larger rungs
      auto log_bound = [&](double eps, const LatticeCube& c) {
        auto sh = bound_shape(s, eps, c);
        return std::log(s.A1 * sh.bracket) - s.A2 * sh.argument;
      };
      for (std::size_t r = 0; r < ladder.size(); ++r)
        for (double eps = 0.1; eps <= 2.0; eps += 0.1) {
          if (bound_shape(s, eps, ladder[r]).argument < 700.0)
            CHECK(bound_eval(s, eps, ladder[r]) > 0.0);
          if (bound_shape(s, eps, ladder[r]).argument < 4.0)
            continue;
          double lv = log_bound(eps, ladder[r]);
          CHECK(std::isfinite(lv));
          CHECK(log_bound(eps + 0.1, ladder[r]) < lv);
          if (r + 1 < ladder.size())
            CHECK(log_bound(eps, ladder[r + 1]) < lv);
        }
    }
}

TEST_CASE("log-Laplace right-hand side grows with beta and is positive")
{
  LatticeCube c({32, 32});
  double prev = 0.0;
  for (double beta = 1e-4; beta < 1e-2; beta *= 1.5) {
    double v = prop31_rhs(1.0, 1.0, beta, 1.0, c);
    CHECK(v > prev);
    prev = v;
  }
  BoundSpec s;
  s.which = BoundKind::prop31_laplace;
  s.B = 1.0;
  CHECK(bound_eval(s, 1e-3, c) == prop31_rhs(1.0, 1.0, 1e-3, 1.0, c));
}

TEST_CASE("Rademacher tail matches the exact binomial law")
{
  std::vector<double> eps{0.05, 0.1, 0.2, 0.3, 0.5, 1.01};
  std::vector<LatticeCube> ladder{LatticeCube({20}), LatticeCube({100})};
  auto rep = empirical_tail(rademacher(), eps, ladder, 10000, 3, 1);
  std::size_t inside = 0, cells = 0;
  for (std::size_t r = 0; r < ladder.size(); ++r) {
    int n = static_cast<int>(ladder[r].size());
    for (std::size_t e = 0; e + 1 < eps.size(); ++e) {
      // |S| / n >= eps with S = 2K - n
      double exact = fair_binomial_tail(n, eps[e] * n / 2.0);
      CHECK(binomial_two_sided_tail(n, 0.5, eps[e] * n / 2.0) == doctest::Approx(exact).epsilon(1e-10));
      inside += rep.cell(r, e).ci.contains(exact);
      CHECK(std::abs(rep.cell(r, e).p_hat - exact) <= 4.0 * std::sqrt(exact * (1.0 - exact) / 10000.0));
      ++cells;
    }
    // beyond the summand bound the event is impossible
    CHECK(rep.cell(r, eps.size() - 1).p_hat == 0.0);
  }
  CHECK(inside >= cells - 1);
  double exact = fair_binomial_tail(100, 25.0);
  CHECK(rep.cell(1, 4).ci.contains(exact));
}

TEST_CASE("MA(1) tails shrink with eps and lattice size")
{
  TailRecipe r;
  r.gen.q = 1;
  r.gen.basis.j_max = 4;
  std::vector<double> eps{0.02, 0.05, 0.1, 0.15, 0.2};
  std::vector<LatticeCube> ladder{LatticeCube({8, 8}), LatticeCube({16, 16})};
  auto rep = empirical_tail(r, eps, ladder, 2000, 5, 1);
  for (std::size_t k = 0; k < ladder.size(); ++k)
    for (std::size_t e = 1; e < eps.size(); ++e)
      CHECK(rep.cell(k, e).p_hat <= rep.cell(k, e - 1).p_hat);
  for (std::size_t e = 1; e + 1 < eps.size(); ++e)
    CHECK(rep.cell(1, e).p_hat < rep.cell(0, e).p_hat);

  auto again = empirical_tail(r, eps, ladder, 2000, 5, 4);
  CHECK(again.values == rep.values);
}

TEST_CASE("statistic and bound families must agree")
{
  CHECK_NOTHROW(check_statistic_matches(TailStatistic::real_sum, BoundKind::cor32));
  CHECK_NOTHROW(check_statistic_matches(TailStatistic::kernel_weighted_sum, BoundKind::prop41));
  CHECK_NOTHROW(check_statistic_matches(TailStatistic::hilbert_norm_sum, BoundKind::thm33_gamma1));
  CHECK_THROWS_AS(check_statistic_matches(TailStatistic::real_sum, BoundKind::thm33_general), std::invalid_argument);
  CHECK_THROWS_AS(check_statistic_matches(TailStatistic::hilbert_norm_sum, BoundKind::cor32), std::invalid_argument);
}

TEST_CASE("slope diagnostic on synthetic tails")
{
  TailReport rep;
  rep.ladder = {LatticeCube({64})};
  rep.eps_grid = {0.1, 0.2, 0.3, 0.4, 0.5};
  double R = rate_functional(rep.ladder[0]);
  for (std::size_t e = 0; e < rep.eps_grid.size(); ++e) {
    TailCell c;
    c.eps = rep.eps_grid[e];
    c.p_hat = std::exp(-2.0 * c.eps * R);
    rep.cells.push_back(c);
  }
  auto fit = slope_diagnostic(rep, 1.0);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  for (auto& c : rep.cells)
    c.p_hat = 0.3;
  CHECK(slope_diagnostic(rep, 1.0).slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  rep.cells[0].p_hat = rep.cells[1].p_hat = 0.0;
  CHECK_THROWS_AS(slope_diagnostic(rep, 1.0), std::invalid_argument);
}

TEST_CASE("admissible beta region")
{
  LatticeCube c({32, 32});
  // the displayed max/min expression at N = 2, C' = c1 = 1, |I| = 1024
  double N = 2.0, n = 1024.0;
  double ct = std::min(0.25, 1.0 / 8.0);
  double left = std::max(ct / std::pow(n, N / (N + 1.0)), 1.0 / n);
  double a = std::pow(std::pow(ct, (N + 1.0) / (N * N)) / std::pow(2.0, N + 3.0), N * N / (N + 1.0));
  double b = (1.0 / std::pow(2.0, N + 2.0)) / std::pow(n, (N - 1.0) / N);
  double bound = std::max(left, std::min(a, b));

  auto reg = prop31_region(c, 1.0, 1.0);
  CHECK(reg.beta_b_max == doctest::Approx(bound).epsilon(1e-14));
  CHECK_NOTHROW(check_beta_admissible(0.99 * bound, 1.0, c, 1.0, 1.0));
  CHECK_THROWS_AS(check_beta_admissible(1.01 * bound, 1.0, c, 1.0, 1.0), std::invalid_argument);
  try {
    check_beta_admissible(1.01 * bound, 1.0, c, 1.0, 1.0);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("region bound") != std::string::npos);
  }
  CHECK_THROWS_AS(check_beta_admissible(1e-6, 1.0, LatticeCube({4, 4}), 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(check_beta_admissible(1e-6, 1.0, LatticeCube({16, 32}), 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("log-Laplace estimates")
{
  LatticeCube c({16, 16});
  std::vector<double> betas{0.0, 0.002, -0.002, 0.01, -0.01};
  auto rep = empirical_log_laplace(rademacher(), betas, c, 4000, 9, 1.0, 1.0, 1.0, 1, false);
  REQUIRE(rep.estimates.size() == betas.size());
  CHECK(rep.estimates[0].log_laplace == 0.0);
  CHECK(rep.estimates[0].jackknife_se == 0.0);
  double n = static_cast<double>(c.size());
  for (std::size_t i = 1; i < betas.size(); ++i)
    CHECK(rep.estimates[i].log_laplace <= betas[i] * betas[i] * n);
  for (std::size_t i = 1; i < betas.size(); i += 2) {
    auto& p = rep.estimates[i];
    auto& m = rep.estimates[i + 1];
    CHECK(std::abs(p.log_laplace - m.log_laplace) <= 3.0 * (p.jackknife_se + m.jackknife_se));
  }
  CHECK(log_mean_exp(rep.sums, 0.0).log_laplace == 0.0);
  CHECK_THROWS_AS(empirical_log_laplace(rademacher(), {1.0}, c, 4000, 9, 1.0, 1.0, 1.0, 1, true),
                  std::invalid_argument);
}

TEST_CASE("log_mean_exp against direct evaluation")
{
  std::vector<double> x{0.5, -1.0, 2.0, 0.25};
  double direct = std::log((std::exp(0.3 * 0.5) + std::exp(-0.3) + std::exp(0.6) + std::exp(0.075)) / 4.0);
  CHECK(log_mean_exp(x, 0.3).log_laplace == doctest::Approx(direct).epsilon(1e-14));
  // no overflow for large arguments
  std::vector<double> big{1000.0, 1000.0};
  CHECK(log_mean_exp(big, 1.0).log_laplace == doctest::Approx(1000.0).epsilon(1e-14));
}

TEST_CASE("covariance inequality examples")
{
  DiscreteJoint indep;
  indep.support = {{0.0, 1.0}, {0.0, 2.0}};
  indep.prob = {0.3 * 0.4, 0.3 * 0.6, 0.7 * 0.4, 0.7 * 0.6};
  auto r = ibragimov_check(indep);
  CHECK(r.lhs == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(r.holds);

  DiscreteJoint same;
  same.support = {{0.0, 1.0}, {0.0, 1.0}};
  same.prob = {0.5, 0.0, 0.0, 0.5};
  auto s = ibragimov_check(same);
  CHECK(s.lhs == doctest::Approx(0.25));
  CHECK(s.alpha == doctest::Approx(0.25));
  CHECK(s.rhs == doctest::Approx(0.25));
  CHECK(s.holds);
}

namespace {

// alpha of a two-variable joint by enumerating all 2^a x 2^b event pairs.
double brute_alpha_pair(const DiscreteJoint& j)
{
  std::size_t a = j.support[0].size(), b = j.support[1].size();
  double best = 0.0;
  for (std::size_t ea = 0; ea < (std::size_t{1} << a); ++ea)
    for (std::size_t eb = 0; eb < (std::size_t{1} << b); ++eb) {
      double pa = 0.0, pb = 0.0, pab = 0.0;
      for (std::size_t u = 0; u < a; ++u)
        for (std::size_t v = 0; v < b; ++v) {
          double p = j.prob[u * b + v];
          bool ia = (ea >> u) & 1, ib = (eb >> v) & 1;
          pa += ia ? p : 0.0;
          pb += ib ? p : 0.0;
          pab += (ia && ib) ? p : 0.0;
        }
      best = std::max(best, std::abs(pab - pa * pb));
    }
  return best;
}

DiscreteJoint random_joint(std::mt19937_64& g, std::size_t k, std::size_t max_support)
{
  std::uniform_int_distribution<std::size_t> sz(1, max_support);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DiscreteJoint j;
  std::size_t cells = 1;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> s(sz(g));
    for (auto& v : s)
      v = 3.0 * u(g);
    j.support.push_back(s);
    cells *= s.size();
  }
  j.prob.resize(cells);
  double total = 0.0;
  for (auto& p : j.prob) {
    p = u(g) < 0.4 ? 0.0 : u(g);
    total += p;
  }
  if (total == 0.0) {
    j.prob[0] = 1.0;
    total = 1.0;
  }
  for (auto& p : j.prob)
    p /= total;
  return j;
}

} // namespace

TEST_CASE("covariance inequality on random joints")
{
  std::mt19937_64 g(123);
  for (int t = 0; t < 300; ++t) {
    auto j = random_joint(g, 2, 4);
    CHECK(std::abs(split_alpha(j, 1) - brute_alpha_pair(j)) <= 1e-12);
  }
  for (int t = 0; t < 1000; ++t) {
    auto j = random_joint(g, 3, 3);
    CHECK(ibragimov_check(j).holds);
  }
}

TEST_CASE("Wilson interval endpoints solve the score equation")
{
  std::mt19937_64 gen(11);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + gen() % 5000;
    const std::size_t x = gen() % (n + 1);
    const Interval ci = wilson_interval(x, n);
    const double p = static_cast<double>(x) / static_cast<double>(n);
    auto score = [&](double pi) {
      return std::abs(p - pi) - kZ95 * std::sqrt(pi * (1.0 - pi) / static_cast<double>(n));
    };
    CHECK(ci.lo <= p);
    CHECK(ci.hi >= p);
    if (x > 0)
      CHECK(std::abs(score(ci.lo)) < 1e-9);
    if (x < n)
      CHECK(std::abs(score(ci.hi)) < 1e-9);
  }
  // zero hits must still cover arbitrarily small probabilities
  for (std::size_t n : {1, 7, 2000, 10000, 1000000}) {
    CHECK(wilson_interval(0, n).lo == 0.0);
    CHECK(wilson_interval(0, n).contains(1e-300));
    CHECK(wilson_interval(n, n).hi == 1.0);
  }
}
