#include "fkr/covering.hpp"

#include "fkr/parallel.hpp"
#include "fkr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fkr {

CoveringTooLarge::CoveringTooLarge(double estimate, std::size_t cap)
  : std::runtime_error("covering too large: about " + std::to_string(estimate) +
                       " centres exceed the cap of " + std::to_string(cap) +
                       "; use a larger delta or a smaller R"),
    estimate_(estimate)
{
}

FunctionalElement Covering::center_element(std::size_t i) const
{
  auto c = center(i);
  return FunctionalElement(std::vector<double>(c.begin(), c.end()));
}

double Covering::explicit_constant() const
{
  if (lemma_scale <= 0.0)
    return 0.0;
  return std::log(static_cast<double>(size())) / lemma_scale;
}

namespace {

struct GridPlan
{
  bool degenerate = false;
  double quantum = 0.0;
  std::vector<std::size_t> nodes;
  std::size_t total_nodes = 1;
  std::int64_t kmin = 0;
  std::int64_t kmax = 0;
};

GridPlan plan_grid(const LipschitzBall& ball, double delta, const Basis& basis)
{
  if (!(delta > 0.0))
    throw std::invalid_argument("covering radius must be positive");
  if (ball.R < 0.0)
    throw std::invalid_argument("ball radius must be non-negative");
  GridPlan p;
  const double root_nu = std::sqrt(basis.measure_total());
  if (ball.R * root_nu < delta) {
    // every member has H-norm at most R sqrt(nu(D)) < delta
    p.degenerate = true;
    return p;
  }
  const std::size_t d = basis.dim();
  p.quantum = delta / (2.0 * root_nu);
  const double mesh = delta / (2.0 * ball.R * root_nu * std::sqrt(static_cast<double>(d)));
  const auto& spec = basis.spec();
  for (std::size_t k = 0; k < d; ++k) {
    const auto cells = static_cast<std::size_t>(std::ceil((spec.hi[k] - spec.lo[k]) / mesh - 1e-12));
    p.nodes.push_back(std::max<std::size_t>(cells, 1) + 1);
    p.total_nodes *= p.nodes.back();
  }
  p.kmin = static_cast<std::int64_t>(std::floor(-ball.R / p.quantum));
  p.kmax = static_cast<std::int64_t>(std::floor(ball.R / p.quantum));
  return p;
}

double path_count(std::size_t nodes, std::int64_t levels)
{
  std::vector<double> cur(static_cast<std::size_t>(levels), 1.0), next(cur.size());
  for (std::size_t i = 1; i < nodes; ++i) {
    for (std::size_t k = 0; k < cur.size(); ++k) {
      double s = cur[k];
      if (k > 0)
        s += cur[k - 1];
      if (k + 1 < cur.size())
        s += cur[k + 1];
      next[k] = s;
    }
    std::swap(cur, next);
  }
  double total = 0.0;
  for (double c : cur)
    total += c;
  return total;
}

} // namespace

double covering_count_estimate(const LipschitzBall& ball, double delta, const Basis& basis)
{
  const GridPlan p = plan_grid(ball, delta, basis);
  if (p.degenerate)
    return 1.0;
  const std::int64_t levels = p.kmax - p.kmin + 1;
  if (basis.dim() == 1)
    return path_count(p.total_nodes, levels);
  return static_cast<double>(levels) * std::pow(3.0, static_cast<double>(p.total_nodes - 1));
}

Covering build_covering(const LipschitzBall& ball, double delta, const Basis& basis,
                        const CoveringOptions& opts)
{
  const GridPlan plan = plan_grid(ball, delta, basis);
  const std::size_t d = basis.dim();
  const auto& spec = basis.spec();
  Covering cov;
  cov.delta = delta;
  cov.R = ball.R;
  cov.coeff_count = basis.size();
  double lambda = 1.0;
  for (std::size_t k = 0; k < d; ++k)
    lambda *= spec.hi[k] - spec.lo[k] + 2.0;
  cov.lemma_scale = lambda * std::pow(std::sqrt(basis.measure_total()) * ball.R / delta, static_cast<double>(d));

  if (plan.degenerate) {
    cov.flat.assign(basis.size(), 0.0);
    cov.claimed_bound = 0.0;
    return cov;
  }
  cov.nodes_per_axis = plan.nodes;
  cov.quantum = plan.quantum;
  cov.level_min = plan.kmin;
  cov.level_max = plan.kmax;
  const std::int64_t levels = plan.kmax - plan.kmin + 1;
  cov.claimed_bound = std::log(static_cast<double>(levels)) +
                      static_cast<double>(plan.total_nodes - 1) * std::log(3.0);

  if (d == 1) {
    const double exact = path_count(plan.total_nodes, levels);
    if (exact > static_cast<double>(opts.max_centers))
      throw CoveringTooLarge(exact, opts.max_centers);
  }

  // Backtracking over node levels; each node may differ by at most one level
  // from its predecessor along every axis.
  const std::size_t T = plan.total_nodes;
  std::vector<std::size_t> stride(d, 1);
  for (std::size_t k = d - 1; k-- > 0;)
    stride[k] = stride[k + 1] * plan.nodes[k + 1];
  std::vector<std::vector<std::size_t>> preds(T);
  for (std::size_t i = 0; i < T; ++i)
    for (std::size_t k = 0; k < d; ++k)
      if ((i / stride[k]) % plan.nodes[k] > 0)
        preds[i].push_back(i - stride[k]);

  std::vector<std::int16_t> assignments;
  std::vector<std::int64_t> level(T, 0);
  std::size_t count = 0;
  auto range_at = [&](std::size_t i, std::int64_t& lo, std::int64_t& hi) {
    lo = plan.kmin;
    hi = plan.kmax;
    for (auto p : preds[i]) {
      lo = std::max(lo, level[p] - 1);
      hi = std::min(hi, level[p] + 1);
    }
  };
  std::vector<std::int64_t> hi_at(T);
  std::size_t i = 0;
  {
    std::int64_t lo, hi;
    range_at(0, lo, hi);
    level[0] = lo;
    hi_at[0] = hi;
  }
  for (;;) {
    if (level[i] > hi_at[i]) {
      if (i == 0)
        break;
      --i;
      ++level[i];
      continue;
    }
    if (i + 1 == T) {
      if (++count > opts.max_centers)
        throw CoveringTooLarge(covering_count_estimate(ball, delta, basis), opts.max_centers);
      for (std::size_t n = 0; n < T; ++n)
        assignments.push_back(static_cast<std::int16_t>(level[n]));
      ++level[i];
      continue;
    }
    ++i;
    std::int64_t lo, hi;
    range_at(i, lo, hi);
    level[i] = lo;
    hi_at[i] = hi;
  }

  // Projection is linear in the node values: W[node][j].
  std::vector<std::vector<double>> A(d);
  for (std::size_t k = 0; k < d; ++k)
    A[k] = basis.hat_integrals(k, plan.nodes[k]);
  const std::size_t J = basis.size();
  std::vector<double> W(T * J);
  for (std::size_t node = 0; node < T; ++node)
    for (std::size_t j = 0; j < J; ++j) {
      double w = basis.density() * basis.scale();
      for (std::size_t k = 0; k < d; ++k) {
        const std::size_t ik = (node / stride[k]) % plan.nodes[k];
        w *= A[k][ik * basis.univariate_count(k) + basis.multi_index(j)[k]];
      }
      W[node * J + j] = w;
    }

  cov.flat.assign(count * J, 0.0);
  parallel_for(count, opts.threads, [&](std::size_t c) {
    double* out = cov.flat.data() + c * J;
    const std::int16_t* lv = assignments.data() + c * T;
    for (std::size_t node = 0; node < T; ++node) {
      const double v = (static_cast<double>(lv[node]) + 0.5) * plan.quantum;
      for (std::size_t j = 0; j < J; ++j)
        out[j] += v * W[node * J + j];
    }
  });
  return cov;
}

double grid_function_sup(const GridFunction& g)
{
  double s = 0.0;
  for (double v : g.values)
    s = std::max(s, std::abs(v));
  return s;
}

double grid_function_lipschitz(const GridFunction& g, const BasisSpec& domain)
{
  const std::size_t d = g.nodes_per_axis.size();
  std::vector<std::size_t> stride(d, 1);
  for (std::size_t k = d - 1; k-- > 0;)
    stride[k] = stride[k + 1] * g.nodes_per_axis[k + 1];
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double h = (domain.hi[k] - domain.lo[k]) / static_cast<double>(g.nodes_per_axis[k] - 1);
    double m = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i)
      if ((i / stride[k]) % g.nodes_per_axis[k] + 1 < g.nodes_per_axis[k])
        m = std::max(m, std::abs(g.values[i + stride[k]] - g.values[i]) / h);
    sum_sq += m * m;
  }
  return std::sqrt(sum_sq);
}

GridFunction random_ball_member(const LipschitzBall& ball, const BasisSpec& domain, std::uint64_t key)
{
  CounterRng rng(key);
  GridFunction g;
  std::size_t total = 1;
  for (std::size_t k = 0; k < domain.dim(); ++k) {
    g.nodes_per_axis.push_back(2 + rng.below(11));
    total *= g.nodes_per_axis.back();
  }
  g.values.resize(total);
  const auto style = rng.below(3);
  double walk = rng.uniform(-1.0, 1.0);
  for (double& v : g.values) {
    if (style == 0)
      v = rng.uniform(-1.0, 1.0);
    else if (style == 1)
      v = walk += rng.uniform(-0.5, 0.5);
    else
      v = rng.rademacher();
  }
  const double norm = grid_function_sup(g) + grid_function_lipschitz(g, domain);
  if (norm > 0.0) {
    // a third of the probes sit on the boundary of the ball
    const double target = rng.below(3) == 0 ? ball.R : ball.R * rng.uniform_pos();
    for (double& v : g.values)
      v *= target / norm;
  }
  return g;
}

CoverageAudit audit_covering(const Covering& cov, const Basis& basis, std::size_t probes,
                             std::uint64_t seed, unsigned threads)
{
  std::vector<double> best(probes, std::numeric_limits<double>::infinity());
  const std::size_t J = cov.coeff_count;
  parallel_for(probes, threads, [&](std::size_t p) {
    const GridFunction g = random_ball_member({cov.R}, basis.spec(), derive_key(seed, {0x70726f6265, static_cast<std::int64_t>(p)}));
    const FunctionalElement x = basis.project_grid_function(g.nodes_per_axis, g.values);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cov.size(); ++c) {
      const double* ctr = cov.flat.data() + c * J;
      double s = 0.0;
      for (std::size_t j = 0; j < J && s < m; ++j) {
        const double diff = x.coeffs[j] - ctr[j];
        s += diff * diff;
      }
      m = std::min(m, s);
    }
    best[p] = std::sqrt(m);
  });
  CoverageAudit a;
  a.probes = probes;
  for (double b : best) {
    a.max_distance = std::max(a.max_distance, b);
    if (b < cov.delta)
      ++a.covered;
  }
  return a;
}

} // namespace fkr
