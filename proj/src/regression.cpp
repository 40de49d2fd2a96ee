#include "fkr/regression.hpp"

#include "fkr/parallel.hpp"
#include "fkr/rng.hpp"
#include "fkr/stats.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

namespace fkr {

std::string to_string(KernelKind k)
{
  switch (k) {
  case KernelKind::quadratic: return "quadratic";
  case KernelKind::triangle_zero: return "triangle_zero";
  case KernelKind::indicator: return "indicator";
  }
  throw std::invalid_argument("unknown kernel kind");
}

KernelKind kernel_kind_from_string(const std::string& s)
{
  if (s == "quadratic")
    return KernelKind::quadratic;
  if (s == "triangle_zero")
    return KernelKind::triangle_zero;
  if (s == "indicator")
    return KernelKind::indicator;
  throw std::invalid_argument("unknown kernel kind '" + s + "'");
}

double KernelSpec::operator()(double u) const
{
  if (u < 0.0 || u > 1.0)
    return 0.0;
  switch (kind) {
  case KernelKind::quadratic: return 1.0 - u * u;
  case KernelKind::triangle_zero: return 1.0 - u;
  case KernelKind::indicator: return 1.0; // closed ball: u = 1 included
  }
  return 0.0;
}

double KernelSpec::derivative(double u) const
{
  switch (kind) {
  case KernelKind::quadratic: return -2.0 * u;
  case KernelKind::triangle_zero: return -1.0;
  case KernelKind::indicator: return 0.0;
  }
  return 0.0;
}

double KernelSpec::lipschitz_const() const
{
  switch (kind) {
  case KernelKind::quadratic: return 2.0;
  case KernelKind::triangle_zero: return 1.0;
  case KernelKind::indicator: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double KernelSpec::k_at_one() const { return kind == KernelKind::indicator ? 1.0 : 0.0; }

double kernel_eval(const KernelSpec& k, double u)
{
  if (u < 0.0)
    throw std::invalid_argument("kernel argument must be non-negative");
  return k(u);
}

double kernel_pseudo_norm(const KernelSpec& k, double h, const PseudoMetricSpec&)
{
  if (!(h > 0.0))
    throw std::invalid_argument("bandwidth must be positive");
  if (!k.vanishes_at_one())
    throw NotLipschitz("kernel '" + to_string(k.kind) + "' is not Lipschitz on R+ (K(1) != 0)");
  return k.lipschitz_const() / h;
}

void validate(const EstimatorConfig& c)
{
  if (!(c.h > 0.0))
    throw std::invalid_argument("bandwidth h must be positive");
  if (!(c.min_denominator > 0.0))
    throw std::invalid_argument("min_denominator must be positive");
}

DenominatorUnderflow::DenominatorUnderflow(double f)
  : std::runtime_error("denominator underflow: f_hat = " + format_double(f) +
                       " is below min_denominator"),
    f_hat_(f)
{
}

namespace {

void check_plugin(double F)
{
  if (!(F > 0.0) || !std::isfinite(F))
    throw MissingSmallBall("small-ball value F_x(h) missing or not positive (" + format_double(F) + ")");
}

} // namespace

PointEstimate estimate_at(const EstimatorConfig& c, const FieldSample& s, std::span<const double> x, double F)
{
  validate(c);
  check_plugin(F);
  if (x.size() != s.J)
    throw std::invalid_argument("basis mismatch between point and sample");
  PointEstimate e;
  e.g = FunctionalElement(s.J);
  const double norm = 1.0 / (static_cast<double>(s.sites()) * F);
  double ksum = 0.0;
  for (std::size_t i = 0; i < s.sites(); ++i) {
    const double w = c.kernel(pseudo_dist(c.metric, s.x(i), x) / c.h);
    if (w == 0.0)
      continue;
    ksum += w;
    auto y = s.y(i);
    for (std::size_t j = 0; j < s.J; ++j)
      e.g.coeffs[j] += w * y[j];
  }
  e.f = ksum * norm;
  if (e.f >= c.min_denominator) {
    // ratio of raw sums; the common factor (|I| F)^{-1} cancels
    e.psi = FunctionalElement(s.J);
    for (std::size_t j = 0; j < s.J; ++j)
      e.psi.coeffs[j] = e.g.coeffs[j] / ksum;
  } else {
    e.underflow = true;
  }
  for (double& v : e.g.coeffs)
    v *= norm;
  return e;
}

double f_hat(const EstimatorConfig& c, const FieldSample& s, std::span<const double> x, double F)
{
  return estimate_at(c, s, x, F).f;
}

FunctionalElement g_hat(const EstimatorConfig& c, const FieldSample& s, std::span<const double> x, double F)
{
  return estimate_at(c, s, x, F).g;
}

FunctionalElement psi_hat(const EstimatorConfig& c, const FieldSample& s, std::span<const double> x, double F)
{
  PointEstimate e = estimate_at(c, s, x, F);
  if (e.underflow)
    throw DenominatorUnderflow(e.f);
  return std::move(e.psi);
}

double in_sample_small_ball(const FieldSample& s, std::span<const double> x, double h,
                            const PseudoMetricSpec& metric)
{
  std::size_t hits = 0;
  for (std::size_t i = 0; i < s.sites(); ++i)
    if (pseudo_dist(metric, s.x(i), x) <= h)
      ++hits;
  return static_cast<double>(hits) / static_cast<double>(s.sites());
}

double SmallBallTable::at(double h) const
{
  if (sorted_distances.empty())
    throw std::logic_error("small-ball table has no distances");
  const auto it = std::upper_bound(sorted_distances.begin(), sorted_distances.end(), h);
  return static_cast<double>(it - sorted_distances.begin()) / static_cast<double>(sorted_distances.size());
}

std::vector<double> draw_marginal(const GeneratorSpec& spec, std::size_t N, std::size_t count,
                                  std::uint64_t seed, unsigned threads)
{
  const std::size_t J = spec.basis.j_max;
  std::vector<double> out(count * J);
  GeneratorSpec g = spec;
  g.seed = derive_key(seed, {0x6d617267});
  const LatticeCube one(std::vector<std::int64_t>(N, 1));
  parallel_for(count, threads, [&](std::size_t r) {
    GenerateOptions opts;
    opts.replicate = r;
    opts.with_response = false;
    const FieldSample s = generate(g, PsiSpec{}, one, 0.0, opts);
    std::copy(s.X.begin(), s.X.end(), out.begin() + static_cast<std::ptrdiff_t>(r * J));
  });
  return out;
}

SmallBallTable small_ball_from_draws(const FunctionalElement& x, const std::vector<double>& h_grid,
                                     std::span<const double> draws, std::size_t J,
                                     const PseudoMetricSpec& metric)
{
  if (J == 0 || draws.size() % J != 0)
    throw std::invalid_argument("draw matrix shape mismatch");
  const std::size_t R = draws.size() / J;
  SmallBallTable t;
  t.x = x;
  t.h_grid = h_grid;
  t.replicates = R;
  t.sorted_distances.resize(R);
  for (std::size_t r = 0; r < R; ++r)
    t.sorted_distances[r] = pseudo_dist(metric, draws.subspan(r * J, J), x.coeffs);
  std::sort(t.sorted_distances.begin(), t.sorted_distances.end());
  for (double h : h_grid) {
    t.F_hat.push_back(t.at(h));
    t.zero_flag.push_back(t.F_hat.back() == 0.0);
  }
  for (std::size_t u = 1; u <= 20; ++u)
    t.u_grid.push_back(static_cast<double>(u) / 20.0);
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    std::vector<double> row;
    for (double u : t.u_grid)
      row.push_back(t.F_hat[i] > 0.0 ? t.at(h_grid[i] * u) / t.F_hat[i] : std::nan(""));
    t.tau_hat.push_back(std::move(row));
  }
  return t;
}

SmallBallTable estimate_small_ball(const FunctionalElement& x, const std::vector<double>& h_grid,
                                   const GeneratorSpec& spec, std::size_t N,
                                   const PseudoMetricSpec& metric, std::size_t replicates,
                                   std::uint64_t seed, unsigned threads)
{
  if (replicates < 100)
    throw std::invalid_argument("small-ball estimation needs at least 100 replicates");
  for (double h : h_grid)
    if (!(h > 0.0))
      throw std::invalid_argument("small-ball radii must be positive");
  if (x.size() != spec.basis.j_max)
    throw std::invalid_argument("basis mismatch between point and generator");
  const auto draws = draw_marginal(spec, N, replicates, seed, threads);
  return small_ball_from_draws(x, h_grid, draws, spec.basis.j_max, metric);
}

double gaussian_small_ball(std::span<const double> x, std::span<const double> sd, double h)
{
  if (!(h > 0.0))
    throw std::invalid_argument("radius must be positive");
  if (x.size() != sd.size())
    throw std::invalid_argument("dimension mismatch");
  if (x.size() == 1)
    return normal_cdf((x[0] + h) / sd[0]) - normal_cdf((x[0] - h) / sd[0]);
  if (x.size() != 2)
    throw std::invalid_argument("analytic small-ball probability available for J = 1 or 2 only");
  // t = x1 + h sin(theta) removes the square-root endpoint singularity
  auto integrand = [&](double theta) {
    const double t = x[0] + h * std::sin(theta);
    const double w = h * std::cos(theta);
    const double dens = std::exp(-0.5 * (t / sd[0]) * (t / sd[0])) / (sd[0] * std::sqrt(2.0 * std::numbers::pi));
    const double strip = normal_cdf((x[1] + w) / sd[1]) - normal_cdf((x[1] - w) / sd[1]);
    return dens * strip * h * std::cos(theta);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, -std::numbers::pi / 2, std::numbers::pi / 2, 20, 1e-13);
}

std::vector<double> gaussian_marginal_sd(const GeneratorSpec& spec)
{
  const bool gaussian = spec.kind == GeneratorKind::gauss_exp ||
                        (spec.kind == GeneratorKind::functional_ma && spec.innovation == InnovationKind::gaussian);
  if (!gaussian)
    throw std::invalid_argument("generator marginals are not Gaussian");
  std::vector<double> sd(spec.basis.j_max);
  for (std::size_t j = 0; j < sd.size(); ++j)
    sd[j] = coefficient_scale(spec, j + 1);
  return sd;
}

MxResult m_x(const KernelSpec& k, const std::function<double(double)>& tau)
{
  double err = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double u) { return k.derivative(u) * tau(u); }, 0.0, 1.0, 20, 1e-12, &err);
  MxResult r;
  r.value = k.k_at_one() - integral;
  r.error_estimate = err;
  r.positive = r.value > 0.0;
  return r;
}

SupErrorReport sup_error(const EstimatorConfig& c, const FieldSample& s, const Covering& cov,
                         const PsiSpec& psi, std::span<const double> small_ball, unsigned threads)
{
  if (small_ball.size() != cov.size())
    throw MissingSmallBall("need one small-ball value per covering centre");
  if (cov.coeff_count != s.J)
    throw std::invalid_argument("basis mismatch between covering and sample");
  SupErrorReport rep;
  rep.centers.resize(cov.size());
  parallel_for(cov.size(), threads, [&](std::size_t i) {
    const auto v = cov.center(i);
    CenterError& ce = rep.centers[i];
    if (!(small_ball[i] > 0.0)) {
      // no plugin mass at this centre: the denominator is zero by construction
      ce.underflow = true;
      ce.no_small_ball = true;
      ce.error = std::nan("");
      return;
    }
    const PointEstimate e = estimate_at(c, s, v, small_ball[i]);
    ce.f = e.f;
    ce.underflow = e.underflow;
    if (e.underflow) {
      ce.error = std::nan("");
      return;
    }
    std::vector<double> truth(s.J);
    psi.apply(v, truth);
    double sq = 0.0;
    for (std::size_t j = 0; j < s.J; ++j)
      sq += (e.psi.coeffs[j] - truth[j]) * (e.psi.coeffs[j] - truth[j]);
    ce.error = std::sqrt(sq);
  });
  for (const CenterError& ce : rep.centers) {
    if (ce.underflow)
      ++rep.underflow_count;
    else
      rep.sup_error = std::max(rep.sup_error, ce.error);
  }
  rep.underflow_fraction = static_cast<double>(rep.underflow_count) / static_cast<double>(cov.size());
  if (rep.underflow_count == cov.size())
    throw AllCentersUnderflow("denominator underflow at every covering centre");
  return rep;
}

nlohmann::json to_json(const EstimatorConfig& c)
{
  return {{"kernel", to_string(c.kernel.kind)}, {"h", c.h}, {"metric", to_json(c.metric)},
          {"min_denominator", c.min_denominator}};
}

EstimatorConfig estimator_config_from_json(const nlohmann::json& j)
{
  EstimatorConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "kernel")
      c.kernel.kind = kernel_kind_from_string(value.get<std::string>());
    else if (key == "h")
      c.h = value.get<double>();
    else if (key == "metric")
      c.metric = pseudo_metric_from_json(value);
    else if (key == "min_denominator")
      c.min_denominator = value.get<double>();
    else
      throw std::invalid_argument("unknown estimator key '" + key + "'");
  }
  validate(c);
  return c;
}

} // namespace fkr
