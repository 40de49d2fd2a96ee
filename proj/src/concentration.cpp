#include "fkr/concentration.hpp"

#include "fkr/parallel.hpp"
#include "fkr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fkr {

std::string to_string(BoundKind b)
{
  switch (b) {
  case BoundKind::cor32: return "cor32";
  case BoundKind::thm33_general: return "thm33_general";
  case BoundKind::thm33_gamma1: return "thm33_gamma1";
  case BoundKind::prop41: return "prop41";
  case BoundKind::thm42_general: return "thm42_general";
  case BoundKind::thm42_gamma1: return "thm42_gamma1";
  case BoundKind::prop31_laplace: return "prop31_laplace";
  }
  throw std::invalid_argument("unknown bound kind");
}

BoundKind bound_kind_from_string(const std::string& s)
{
  for (auto b : {BoundKind::cor32, BoundKind::thm33_general, BoundKind::thm33_gamma1, BoundKind::prop41,
                 BoundKind::thm42_general, BoundKind::thm42_gamma1, BoundKind::prop31_laplace})
    if (to_string(b) == s)
      return b;
  throw std::invalid_argument("unknown bound '" + s + "'");
}

bool is_hilbert_bound(BoundKind b)
{
  return b == BoundKind::thm33_general || b == BoundKind::thm33_gamma1 || b == BoundKind::thm42_general ||
         b == BoundKind::thm42_gamma1;
}

bool needs_alpha_certificate(BoundKind b)
{
  return b == BoundKind::cor32 || b == BoundKind::thm33_general || b == BoundKind::thm33_gamma1 ||
         b == BoundKind::prop31_laplace;
}

double rate_functional(const LatticeCube& cube)
{
  const double n = static_cast<double>(cube.size());
  const double l = std::log(n);
  return effective_sample_size(cube) / (l * l);
}

namespace {

double require(const std::optional<double>& v, const char* name, BoundKind b)
{
  if (!v)
    throw std::invalid_argument("bound " + to_string(b) + " needs parameter '" + name + "'");
  if (!(*v > 0.0))
    throw std::invalid_argument(std::string("bound parameter '") + name + "' must be positive");
  return *v;
}

void require_gamma1(double gamma, BoundKind b)
{
  if (gamma < 1.0)
    throw std::invalid_argument("bound " + to_string(b) + " requires gamma >= 1");
}

} // namespace

BoundShape bound_shape(const BoundSpec& s, double eps, const LatticeCube& cube)
{
  if (!(eps > 0.0))
    throw std::invalid_argument("eps must be positive");
  const double R = rate_functional(cube);
  const double E = effective_sample_size(cube);
  BoundShape out;
  switch (s.which) {
  case BoundKind::cor32: {
    const double B = require(s.B, "B", s.which);
    out.argument = (eps / B) * R;
    break;
  }
  case BoundKind::thm33_general: {
    const double g = require(s.gamma, "gamma", s.which);
    const double p1 = 2.0 * g / (2.0 + 3.0 * g);
    const double p2 = 2.0 * (1.0 + g - g * g) / ((2.0 + 3.0 * g) * (1.0 + g));
    const double p3 = g * (3.0 + 5.0 * g) / ((2.0 + 3.0 * g) * (1.0 + g));
    out.bracket = std::pow(eps, -2.0) + std::pow(R * eps, p1) + std::pow(R, p2) * std::pow(eps, -p3);
    out.argument = std::pow(eps * R, p1);
    break;
  }
  case BoundKind::thm33_gamma1: {
    require_gamma1(require(s.gamma, "gamma", s.which), s.which);
    out.bracket = std::pow(eps, -2.0) + std::pow(R * eps, 2.0 / 5.0) + std::pow(R, 1.0 / 5.0) * std::pow(eps, -(4.0 / 5.0));
    out.argument = std::pow(eps * R, 2.0 / 5.0);
    break;
  }
  case BoundKind::prop41: {
    const double B = require(s.B, "B", s.which);
    const double gn = require(s.norm_g, "norm_g", s.which);
    out.argument = eps * eps * E / (gn * B * B);
    break;
  }
  case BoundKind::thm42_general: {
    const double g = require(s.gamma, "gamma", s.which);
    const double gn = require(s.norm_g, "norm_g", s.which);
    const double m = std::pow(eps * eps * E / gn, g / (2.0 + 2.0 * g));
    out.bracket = std::pow(eps, -2.0) + m +
                  std::pow(m, (4.0 + 5.0 * g) / (4.0 + 2.0 * g)) * std::pow(eps, -3.0 * g / (2.0 + g)) *
                      std::pow(E / gn, (1.0 - g) / (2.0 + g));
    out.argument = m;
    break;
  }
  case BoundKind::thm42_gamma1: {
    require_gamma1(require(s.gamma, "gamma", s.which), s.which);
    const double gn = require(s.norm_g, "norm_g", s.which);
    const double w = eps * eps * E / gn;
    out.bracket = std::pow(eps, -2.0) + std::pow(w, 1.0 / 4.0) + std::pow(w, 9.0 / 24.0) * std::pow(eps, -1.0);
    out.argument = std::pow(w, 1.0 / 4.0);
    break;
  }
  case BoundKind::prop31_laplace:
    throw std::invalid_argument("prop31_laplace does not factor into bracket and exponent");
  }
  return out;
}

double prop31_rhs(double A1, double A2, double beta, double B, const LatticeCube& cube)
{
  if (!(beta > 0.0))
    throw std::invalid_argument("beta must be positive");
  const double n = static_cast<double>(cube.size());
  const double N = static_cast<double>(cube.dim());
  const double bb = beta * B;
  const double t1 = A1 * bb * bb * n * (1.0 + std::pow(n, (N - 1.0) / N) * std::log(n));
  const double t2 = A1 * bb * n * std::exp(-A2 * std::pow(bb, -1.0 / N));
  const double t3 = A1 * std::pow(bb, (N + 1.0) / N) * n *
                    std::exp(-A2 * std::pow(bb, 1.0 - (N + 1.0) / (N * N)) * std::pow(n, (N - 1.0) / N));
  return t1 + t2 + t3;
}

double bound_eval(const BoundSpec& s, double eps, const LatticeCube& cube)
{
  if (!(s.A1 > 0.0) || !(s.A2 > 0.0))
    throw std::invalid_argument("bound constants A1, A2 must be positive");
  if (s.which == BoundKind::prop31_laplace)
    return prop31_rhs(s.A1, s.A2, eps, require(s.B, "B", s.which), cube);
  const BoundShape sh = bound_shape(s, eps, cube);
  return s.A1 * sh.bracket * std::exp(-s.A2 * sh.argument);
}

std::string to_string(TailStatistic s)
{
  switch (s) {
  case TailStatistic::real_sum: return "real_sum";
  case TailStatistic::hilbert_norm_sum: return "hilbert_norm_sum";
  case TailStatistic::kernel_weighted_sum: return "kernel_weighted_sum";
  }
  return "real_sum";
}

TailStatistic tail_statistic_from_string(const std::string& s)
{
  if (s == "real_sum")
    return TailStatistic::real_sum;
  if (s == "hilbert_norm_sum")
    return TailStatistic::hilbert_norm_sum;
  if (s == "kernel_weighted_sum")
    return TailStatistic::kernel_weighted_sum;
  throw std::invalid_argument("unknown statistic '" + s + "'");
}

void check_statistic_matches(TailStatistic s, BoundKind b)
{
  bool ok = false;
  switch (s) {
  case TailStatistic::real_sum: ok = b == BoundKind::cor32 || b == BoundKind::prop41; break;
  case TailStatistic::hilbert_norm_sum: ok = is_hilbert_bound(b); break;
  case TailStatistic::kernel_weighted_sum:
    ok = b == BoundKind::prop41 || b == BoundKind::thm42_general || b == BoundKind::thm42_gamma1;
    break;
  }
  if (!ok)
    throw std::invalid_argument("statistic " + to_string(s) + " does not match bound " + to_string(b));
}

namespace {

// Unnormalised sum for one replicate; size 1 for real statistics.
std::vector<double> replicate_sum(const TailRecipe& rc, const LatticeCube& cube, std::uint64_t seed,
                                  std::size_t rung, std::size_t r)
{
  if (rc.summands == SummandKind::iid_rademacher || rc.summands == SummandKind::iid_bernoulli) {
    CounterRng rng(derive_key(seed, {static_cast<std::int64_t>(rung), static_cast<std::int64_t>(r)}));
    if (rc.summands == SummandKind::iid_rademacher) {
      std::int64_t s = 0;
      for (std::size_t i = 0; i < cube.size(); ++i)
        s += rng.rademacher();
      return {static_cast<double>(s)};
    }
    std::size_t k = 0;
    for (std::size_t i = 0; i < cube.size(); ++i)
      k += rng.uniform() < rc.bernoulli_p ? 1 : 0;
    return {static_cast<double>(k) - static_cast<double>(cube.size()) * rc.bernoulli_p};
  }
  GeneratorSpec g = rc.gen;
  g.seed = derive_key(seed, {static_cast<std::int64_t>(rung), 0x67656e});
  GenerateOptions opts;
  opts.replicate = r;
  opts.with_response = rc.statistic == TailStatistic::kernel_weighted_sum;
  const FieldSample s = generate(g, rc.psi, cube, rc.noise_scale, opts);
  const std::size_t J = s.J;
  switch (rc.statistic) {
  case TailStatistic::real_sum: {
    if (rc.coefficient >= J)
      throw std::invalid_argument("coefficient index exceeds j_max");
    std::vector<double> v(s.sites());
    for (std::size_t i = 0; i < s.sites(); ++i)
      v[i] = s.x(i)[rc.coefficient];
    return {pairwise_sum(v)};
  }
  case TailStatistic::hilbert_norm_sum: {
    std::vector<double> sum(J, 0.0);
    for (std::size_t i = 0; i < s.sites(); ++i)
      for (std::size_t j = 0; j < J; ++j)
        sum[j] += s.x(i)[j];
    return sum;
  }
  case TailStatistic::kernel_weighted_sum: {
    if (rc.point.size() != J)
      throw std::invalid_argument("kernel-weighted statistic needs a point in the generator basis");
    std::vector<double> sum(J, 0.0);
    for (std::size_t i = 0; i < s.sites(); ++i) {
      const double w = rc.estimator.kernel(pseudo_dist(rc.estimator.metric, s.x(i), rc.point.coeffs) / rc.estimator.h);
      if (w == 0.0)
        continue;
      for (std::size_t j = 0; j < J; ++j)
        sum[j] += w * s.y(i)[j];
    }
    return sum;
  }
  }
  return {};
}

} // namespace

TailReport empirical_tail(const TailRecipe& recipe, const std::vector<double>& eps_grid,
                          const std::vector<LatticeCube>& ladder, std::size_t replicates,
                          std::uint64_t seed, unsigned threads)
{
  if (ladder.empty() || eps_grid.empty())
    throw std::invalid_argument("tail estimation needs a ladder and an eps grid");
  if (replicates < 1)
    throw std::invalid_argument("replicates must be positive");
  if (recipe.statistic == TailStatistic::kernel_weighted_sum && !recipe.estimator.kernel.vanishes_at_one())
    throw NotLipschitz("kernel-weighted statistics need a kernel with K(1) = 0");
  TailReport rep;
  rep.statistic = to_string(recipe.statistic);
  rep.ladder = ladder;
  rep.eps_grid = eps_grid;
  rep.replicates = replicates;
  for (std::size_t rung = 0; rung < ladder.size(); ++rung) {
    const LatticeCube& cube = ladder[rung];
    std::vector<std::vector<double>> sums(replicates);
    parallel_for(replicates, threads, [&](std::size_t r) { sums[r] = replicate_sum(recipe, cube, seed, rung, r); });
    const std::size_t dim = sums[0].size();
    std::vector<double> centre(dim, 0.0);
    if (recipe.statistic == TailStatistic::kernel_weighted_sum) {
      // E S_n is unknown in closed form; use the Monte Carlo mean
      std::vector<double> col(replicates);
      for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t r = 0; r < replicates; ++r)
          col[r] = sums[r][j];
        centre[j] = pairwise_sum(col) / static_cast<double>(replicates);
      }
    }
    const double n = static_cast<double>(cube.size());
    std::vector<double> values(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
      double sq = 0.0;
      for (std::size_t j = 0; j < dim; ++j)
        sq += (sums[r][j] - centre[j]) * (sums[r][j] - centre[j]);
      values[r] = std::sqrt(sq) / n;
    }
    for (double eps : eps_grid) {
      TailCell c;
      c.rung = rung;
      c.eps = eps;
      c.replicates = replicates;
      // relative slack absorbs rounding when |S| / n equals eps exactly
      c.hits = static_cast<std::size_t>(
          std::count_if(values.begin(), values.end(), [&](double v) { return v >= eps * (1.0 - 1e-12); }));
      c.p_hat = static_cast<double>(c.hits) / static_cast<double>(replicates);
      c.ci = wilson_interval(c.hits, replicates);
      rep.cells.push_back(c);
    }
    rep.values.push_back(std::move(values));
  }
  return rep;
}

void attach_bound(TailReport& report, const BoundSpec& spec)
{
  for (TailCell& c : report.cells)
    c.bound = bound_eval(spec, c.eps, report.ladder[c.rung]);
}

LinearFit slope_diagnostic(const TailReport& report, double B, std::optional<std::size_t> rung)
{
  if (!(B > 0.0))
    throw std::invalid_argument("B must be positive");
  std::vector<double> x, y;
  for (const TailCell& c : report.cells) {
    if (rung && c.rung != *rung)
      continue;
    if (c.p_hat <= 0.0 || c.p_hat >= 1.0)
      continue;
    x.push_back(c.eps * rate_functional(report.ladder[c.rung]) / B);
    y.push_back(std::log(c.p_hat));
  }
  if (x.size() < 4)
    throw std::invalid_argument("slope diagnostic needs at least 4 cells with 0 < P_hat < 1 (have " +
                                std::to_string(x.size()) + ")");
  return fit_line(x, y);
}

BetaRegion prop31_region(const LatticeCube& cube, double c_prime, double c1)
{
  if (!(c_prime > 0.0) || c_prime > 1.0 || !(c1 > 0.0))
    throw std::invalid_argument("region constants need 0 < C' <= 1 and c1 > 0");
  const double N = static_cast<double>(cube.dim());
  const double n = static_cast<double>(cube.size());
  BetaRegion r;
  r.c_tilde = std::min(std::pow(2.0, -N), c1 * std::pow(c_prime, N / (N + 1.0)) * std::pow(2.0, -(N + 1.0)));
  r.left = std::max(r.c_tilde / std::pow(n, N / (N + 1.0)), 1.0 / n);
  const double a = std::pow(c_prime * std::pow(r.c_tilde, (N + 1.0) / (N * N)) / std::pow(2.0, N + 3.0), N * N / (N + 1.0));
  const double b = (c1 * c_prime / std::pow(2.0, N + 2.0)) / std::pow(n, (N - 1.0) / N);
  r.right = std::min(a, b);
  r.beta_b_max = std::max(r.left, r.right);
  r.edge_condition = static_cast<double>(cube.min_edge()) >= std::pow(2.0, N + 1.0);
  r.aspect_condition = check_aspect_ratio(cube, c_prime).satisfied;
  return r;
}

void check_beta_admissible(double beta, double B, const LatticeCube& cube, double c_prime, double c1)
{
  const BetaRegion r = prop31_region(cube, c_prime, c1);
  if (!r.edge_condition)
    throw std::invalid_argument("inadmissible: min n_i >= 2^{N+1} violated");
  if (!r.aspect_condition)
    throw std::invalid_argument("inadmissible: aspect ratio min n_i >= C' max n_i violated");
  if (!(beta > 0.0))
    throw std::invalid_argument("inadmissible: beta must be positive");
  if (beta * B > r.beta_b_max)
    throw std::invalid_argument("inadmissible: beta*B = " + format_double(beta * B) +
                                " exceeds the region bound " + format_double(r.beta_b_max));
}

LaplaceEstimate log_mean_exp(std::span<const double> x, double beta)
{
  LaplaceEstimate e;
  e.beta = beta;
  if (beta == 0.0 || x.empty())
    return e;
  const std::size_t R = x.size();
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x)
    m = std::max(m, beta * v);
  std::vector<double> w(R);
  for (std::size_t r = 0; r < R; ++r)
    w[r] = std::exp(beta * x[r] - m);
  const double total = pairwise_sum(w);
  e.log_laplace = m + std::log(total / static_cast<double>(R));
  if (R > 1) {
    std::vector<double> loo(R);
    for (std::size_t r = 0; r < R; ++r)
      loo[r] = m + std::log((total - w[r]) / static_cast<double>(R - 1));
    const double mean_loo = pairwise_sum(loo) / static_cast<double>(R);
    double ss = 0.0;
    for (double v : loo)
      ss += (v - mean_loo) * (v - mean_loo);
    e.jackknife_se = std::sqrt(static_cast<double>(R - 1) / static_cast<double>(R) * ss);
  }
  return e;
}

LaplaceReport empirical_log_laplace(const TailRecipe& recipe, const std::vector<double>& beta_grid,
                                    const LatticeCube& cube, std::size_t replicates, std::uint64_t seed,
                                    double B, double c_prime, double c1, unsigned threads, bool check_region)
{
  if (recipe.statistic != TailStatistic::real_sum)
    throw std::invalid_argument("log-Laplace estimation needs real summands");
  LaplaceReport rep;
  rep.cube = cube;
  rep.B = B;
  rep.region = prop31_region(cube, c_prime, c1);
  if (check_region)
    for (double beta : beta_grid)
      if (beta != 0.0)
        check_beta_admissible(std::abs(beta), B, cube, c_prime, c1);
  rep.sums.resize(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) { rep.sums[r] = replicate_sum(recipe, cube, seed, 0, r)[0]; });
  for (double beta : beta_grid)
    rep.estimates.push_back(log_mean_exp(rep.sums, beta));
  return rep;
}

double split_alpha(const DiscreteJoint& joint, std::size_t j)
{
  const std::size_t k = joint.support.size();
  if (j < 1 || j >= k)
    throw std::invalid_argument("split index out of range");
  std::size_t s1 = 1, s2 = 1;
  for (std::size_t i = 0; i < j; ++i)
    s1 *= joint.support[i].size();
  for (std::size_t i = j; i < k; ++i)
    s2 *= joint.support[i].size();
  // lexicographic order with the last variable fastest: index = a * s2 + b
  std::vector<double> pa(s1, 0.0), pb(s2, 0.0);
  for (std::size_t a = 0; a < s1; ++a)
    for (std::size_t b = 0; b < s2; ++b) {
      pa[a] += joint.prob[a * s2 + b];
      pb[b] += joint.prob[a * s2 + b];
    }
  const bool first_small = s1 <= s2;
  const std::size_t small = first_small ? s1 : s2;
  const std::size_t large = first_small ? s2 : s1;
  if (small > 20)
    throw std::invalid_argument("joint law too large for exhaustive alpha computation");
  std::vector<double> D(small * large);
  for (std::size_t a = 0; a < s1; ++a)
    for (std::size_t b = 0; b < s2; ++b) {
      const double d = joint.prob[a * s2 + b] - pa[a] * pb[b];
      if (first_small)
        D[a * large + b] = d;
      else
        D[b * large + a] = d;
    }
  // For a fixed event A on the small side the best B collects the positive
  // (or the negative) parts, which have equal mass: sup_B = sum_b |D(A,b)| / 2.
  double best = 0.0;
  std::vector<double> col(large);
  for (std::size_t mask = 1; mask < (std::size_t{1} << small); ++mask) {
    std::fill(col.begin(), col.end(), 0.0);
    for (std::size_t a = 0; a < small; ++a)
      if (mask >> a & 1U)
        for (std::size_t b = 0; b < large; ++b)
          col[b] += D[a * large + b];
    double s = 0.0;
    for (double v : col)
      s += std::abs(v);
    best = std::max(best, 0.5 * s);
  }
  return best;
}

IbragimovResult ibragimov_check(const DiscreteJoint& joint)
{
  const std::size_t k = joint.support.size();
  if (k < 2)
    throw std::invalid_argument("need at least two variables");
  if (k > 6)
    throw std::invalid_argument("at most 6 variables supported for exhaustive enumeration");
  std::size_t total = 1;
  for (const auto& s : joint.support) {
    if (s.empty() || s.size() > 8)
      throw std::invalid_argument("support sizes must lie in 1..8 for exhaustive enumeration");
    for (double v : s)
      if (v < 0.0)
        throw std::invalid_argument("variables must be non-negative");
    total *= s.size();
  }
  if (joint.prob.size() != total)
    throw std::invalid_argument("probability table size does not match supports");
  for (double p : joint.prob)
    if (p < 0.0)
      throw std::invalid_argument("probabilities must be non-negative");

  std::vector<std::size_t> stride(k, 1);
  for (std::size_t i = k - 1; i-- > 0;)
    stride[i] = stride[i + 1] * joint.support[i + 1].size();
  double e_prod = 0.0;
  std::vector<double> means(k, 0.0), sup(k, 0.0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    const double p = joint.prob[idx];
    double prod = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double v = joint.support[i][(idx / stride[i]) % joint.support[i].size()];
      prod *= v;
      means[i] += p * v;
      if (p > 0.0)
        sup[i] = std::max(sup[i], v);
    }
    e_prod += p * prod;
  }
  IbragimovResult res;
  res.lhs = std::abs(e_prod - std::accumulate(means.begin(), means.end(), 1.0, std::multiplies<>()));
  for (std::size_t j = 1; j < k; ++j)
    res.alpha = std::max(res.alpha, split_alpha(joint, j));
  res.rhs = static_cast<double>(k - 1) * res.alpha * std::accumulate(sup.begin(), sup.end(), 1.0, std::multiplies<>());
  res.holds = res.lhs <= res.rhs + 1e-12;
  return res;
}

nlohmann::json to_json(const TailReport& r)
{
  nlohmann::json j;
  j["statistic"] = r.statistic;
  j["replicates"] = r.replicates;
  j["eps_grid"] = r.eps_grid;
  auto ladder = nlohmann::json::array();
  for (const auto& c : r.ladder)
    ladder.push_back(c.edges());
  j["ladder"] = std::move(ladder);
  return j;
}

} // namespace fkr
