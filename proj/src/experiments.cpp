#include "fkr/experiments.hpp"

#include "fkr/parallel.hpp"
#include "fkr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fkr {

// ---------------------------------------------------------------- tail ladders

double summand_bound(const TailRecipe& recipe, std::size_t N)
{
  switch (recipe.summands) {
  case SummandKind::iid_rademacher: return 1.0;
  case SummandKind::iid_bernoulli: return std::max(recipe.bernoulli_p, 1.0 - recipe.bernoulli_p);
  case SummandKind::generator: break;
  }
  const DependenceCertificate cert = certificate(recipe.gen, N, recipe.psi, recipe.noise_scale);
  switch (recipe.statistic) {
  case TailStatistic::real_sum: {
    if (recipe.gen.kind != GeneratorKind::functional_ma ||
        recipe.gen.innovation != InnovationKind::truncated_gaussian)
      throw std::invalid_argument("summands are not almost surely bounded; supply B explicitly");
    double a1 = 0.0;
    for (double a : ma_weights(recipe.gen.q, N))
      a1 += std::abs(a);
    return a1 * recipe.gen.truncation * coefficient_scale(recipe.gen, recipe.coefficient + 1);
  }
  case TailStatistic::hilbert_norm_sum:
    if (!(cert.bound_x > 0.0))
      throw std::invalid_argument("||X|| is not almost surely bounded; supply B explicitly");
    return cert.bound_x;
  case TailStatistic::kernel_weighted_sum:
    if (!(cert.bound_y > 0.0))
      throw std::invalid_argument("||Y|| is not almost surely bounded; supply B explicitly");
    return cert.bound_y;
  }
  throw std::invalid_argument("unknown statistic");
}

namespace {

DependenceCertificate recipe_certificate(const TailRecipe& recipe, std::size_t N)
{
  if (recipe.summands != SummandKind::generator) {
    DependenceCertificate c;
    c.applies_to = recipe.summands == SummandKind::iid_rademacher ? "iid_rademacher" : "iid_bernoulli";
    c.alpha_status = AlphaStatus::certified;
    c.c0 = 1.0;
    c.c1 = 1.0;
    c.range = 0;
    c.alpha_note = "independent summands";
    c.phi_certified = true;
    c.tail_certified = true;
    c.kappa0 = std::exp(1.0);
    c.kappa1 = 1.0;
    c.gamma = 1.0;
    c.bound_x = summand_bound(recipe, N);
    c.bound_y = c.bound_x;
    return c;
  }
  return certificate(recipe.gen, N, recipe.psi, recipe.noise_scale);
}

void gate(const DependenceCertificate& cert, BoundKind b)
{
  if (needs_alpha_certificate(b) && cert.alpha_status != AlphaStatus::certified)
    throw CertificateMismatch("bound " + to_string(b) + " needs a certified alpha-mixing rate but the " +
                              cert.applies_to + " generator is " + to_string(cert.alpha_status) +
                              (cert.alpha_note.empty() ? "" : " (" + cert.alpha_note + ")"));
  if (!needs_alpha_certificate(b) && !cert.phi_certified)
    throw CertificateMismatch("bound " + to_string(b) + " needs a certified weak-dependence coefficient sum but the " +
                              cert.applies_to + " generator has none");
}

} // namespace

BoundSpec fit_bound(const TailReport& report, BoundSpec shape, std::size_t rung, double p_min)
{
  if (rung >= report.ladder.size())
    throw std::invalid_argument("fit rung outside the ladder");
  const LatticeCube& cube = report.ladder[rung];
  shape.A1 = 1.0;
  shape.A2 = 1.0;
  std::vector<double> x, y;
  for (std::size_t e = 0; e < report.eps_grid.size(); ++e) {
    const TailCell& c = report.cell(rung, e);
    if (c.p_hat <= 0.0 || c.p_hat >= 1.0)
      continue;
    const BoundShape s = bound_shape(shape, c.eps, cube);
    x.push_back(s.argument);
    y.push_back(std::log(c.p_hat / s.bracket));
  }
  if (x.size() < 2)
    throw std::runtime_error("fit rung has fewer than two cells with 0 < P_hat < 1");
  const LinearFit f = fit_line(x, y);
  shape.A2 = std::max(-f.slope, 1e-6);
  double a1 = 0.0;
  for (std::size_t e = 0; e < report.eps_grid.size(); ++e) {
    const TailCell& c = report.cell(rung, e);
    if (c.p_hat <= p_min)
      continue;
    const BoundShape s = bound_shape(shape, c.eps, cube);
    a1 = std::max(a1, c.ci.hi / (s.bracket * std::exp(-shape.A2 * s.argument)));
  }
  if (!(a1 > 0.0))
    throw std::runtime_error("fit rung has no cell with P_hat above the dominance floor");
  shape.A1 = a1;
  return shape;
}

TailLadderResult run_tail_ladder(const TailLadderSpec& spec)
{
  if (spec.ladder.empty())
    throw std::invalid_argument("empty ladder");
  if (spec.bound == BoundKind::prop31_laplace)
    throw std::invalid_argument("the log-Laplace bound is checked by the laplace ladder");
  const std::size_t N = spec.ladder[0].dim();
  for (const LatticeCube& c : spec.ladder) {
    if (c.dim() != N)
      throw std::invalid_argument("ladder mixes lattice dimensions");
    if (!check_aspect_ratio(c, spec.c_prime).satisfied)
      throw std::invalid_argument("ladder cube violates the aspect ratio with C' = " + format_double(spec.c_prime));
  }
  check_statistic_matches(spec.recipe.statistic, spec.bound);
  TailLadderResult out;
  out.cert = recipe_certificate(spec.recipe, N);
  gate(out.cert, spec.bound);

  BoundSpec shape;
  shape.which = spec.bound;
  out.B = spec.B ? *spec.B : summand_bound(spec.recipe, N);
  shape.B = out.B;
  if (spec.gamma) {
    shape.gamma = spec.gamma;
  } else if (is_hilbert_bound(spec.bound)) {
    if (!out.cert.tail_certified)
      throw CertificateMismatch("no certified tail exponent for " + out.cert.applies_to + "; supply gamma");
    shape.gamma = out.cert.gamma;
  }
  if (spec.norm_g)
    shape.norm_g = spec.norm_g;
  else if (spec.recipe.statistic == TailStatistic::kernel_weighted_sum)
    shape.norm_g = kernel_pseudo_norm(spec.recipe.estimator.kernel, spec.recipe.estimator.h, spec.recipe.estimator.metric);
  else
    shape.norm_g = 1.0;

  out.report = empirical_tail(spec.recipe, spec.eps_grid, spec.ladder, spec.replicates, spec.seed, spec.threads);
  out.fitted = fit_bound(out.report, shape, spec.fit_rung, spec.p_min);
  attach_bound(out.report, out.fitted);

  out.dominance = true;
  for (const TailCell& c : out.report.cells) {
    if (c.rung == spec.fit_rung || c.p_hat <= spec.p_min)
      continue;
    DominanceRow row{c.rung, c.eps, c.p_hat, c.ci.hi, c.bound, c.bound >= c.ci.hi};
    out.dominance = out.dominance && row.dominated;
    out.rows.push_back(row);
  }
  if (out.rows.empty())
    out.dominance = false;

  for (std::size_t r = 0; r < spec.ladder.size(); ++r) {
    try {
      out.rung_slopes.push_back(slope_diagnostic(out.report, out.B, r));
    } catch (const std::exception&) {
      out.rung_slopes.push_back(std::nullopt);
    }
  }
  try {
    out.pooled_slope = slope_diagnostic(out.report, out.B);
  } catch (const std::exception&) {
  }
  return out;
}

// --------------------------------------------------------- log-Laplace ladders

LaplaceLadderResult run_laplace_ladder(const LaplaceLadderSpec& spec)
{
  if (spec.ladder.empty())
    throw std::invalid_argument("empty ladder");
  if (spec.fit_rung >= spec.ladder.size())
    throw std::invalid_argument("fit rung outside the ladder");
  const std::size_t N = spec.ladder[0].dim();
  LaplaceLadderResult out;
  const DependenceCertificate cert = recipe_certificate(spec.recipe, N);
  gate(cert, BoundKind::prop31_laplace);
  out.B = summand_bound(spec.recipe, N);
  out.c1 = cert.c1;
  out.A2 = spec.A2;

  for (std::size_t r = 0; r < spec.ladder.size(); ++r) {
    const LatticeCube& cube = spec.ladder[r];
    const BetaRegion region = prop31_region(cube, spec.c_prime, out.c1);
    std::vector<double> betas{0.0};
    for (double f : spec.beta_fractions)
      betas.push_back(f * region.beta_b_max / out.B);
    out.rungs.push_back(empirical_log_laplace(spec.recipe, betas, cube, spec.replicates,
                                              derive_key(spec.seed, {static_cast<std::int64_t>(r)}), out.B,
                                              spec.c_prime, out.c1, spec.threads));
  }

  out.zero_at_zero = true;
  for (const LaplaceReport& rep : out.rungs)
    out.zero_at_zero = out.zero_at_zero && rep.estimates[0].log_laplace == 0.0;

  // A1 is the smallest constant covering L_hat + z SE on the fit rung
  const LaplaceReport& fit = out.rungs[spec.fit_rung];
  for (const LaplaceEstimate& e : fit.estimates) {
    if (e.beta == 0.0)
      continue;
    const double unit = prop31_rhs(1.0, out.A2, e.beta, out.B, fit.cube);
    out.A1 = std::max(out.A1, (e.log_laplace + spec.jackknife_z * e.jackknife_se) / unit);
  }
  if (!(out.A1 > 0.0))
    out.A1 = std::numeric_limits<double>::min();

  bool any = false;
  out.dominance = true;
  for (std::size_t r = 0; r < out.rungs.size(); ++r) {
    for (LaplaceEstimate& e : out.rungs[r].estimates) {
      if (e.beta == 0.0)
        continue;
      e.rhs = prop31_rhs(out.A1, out.A2, e.beta, out.B, out.rungs[r].cube);
      if (r == spec.fit_rung)
        continue;
      any = true;
      out.dominance = out.dominance && e.log_laplace <= e.rhs;
    }
  }
  out.dominance = out.dominance && any;
  return out;
}

// ---------------------------------------------------------------- rate ladders

std::string to_string(MixingMode m)
{
  return m == MixingMode::alpha ? "alpha" : "weak";
}

MixingMode mixing_mode_from_string(const std::string& s)
{
  if (s == "alpha")
    return MixingMode::alpha;
  if (s == "weak")
    return MixingMode::weak;
  throw std::invalid_argument("unknown mixing mode '" + s + "' (alpha|weak)");
}

double schedule_delta(MixingMode mode, const LatticeCube& cube, std::size_t d)
{
  const double e = effective_sample_size(cube);
  const double dd = static_cast<double>(d);
  return mode == MixingMode::alpha ? std::pow(e, -2.0 / (2.0 + 5.0 * dd)) : std::pow(e, -1.0 / (4.0 * dd + 1.0));
}

double schedule_h(const RateLadderSpec& s, const LatticeCube& cube)
{
  const double n = static_cast<double>(cube.size());
  return s.h0 * std::pow(std::log(n), s.h_log_power) * std::pow(effective_sample_size(cube), -s.h_power);
}

double schedule_R(const RateLadderSpec& s, const LatticeCube& cube)
{
  if (s.R_log_power == 0.0)
    return s.R;
  return s.R * std::pow(std::log(static_cast<double>(cube.size())), s.R_log_power);
}

namespace {

bool strictly_decreasing(const std::vector<double>& v)
{
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1]))
      return false;
  return true;
}

double finite_median(std::vector<double> v)
{
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  return v.empty() ? std::nan("") : median(v);
}

} // namespace

RateReport run_rate_ladder(const RateLadderSpec& spec, MixingMode mode)
{
  if (spec.ladder.empty())
    throw std::invalid_argument("empty ladder");
  if (spec.batches < 1 || spec.seeds_per_batch < 1)
    throw std::invalid_argument("need at least one batch of one seed");
  if (mode == MixingMode::weak && !spec.kernel.vanishes_at_one())
    throw NotLipschitz("weak-dependence mode needs a kernel with K(1) = 0");
  const Basis basis(spec.gen.basis);
  const std::size_t d = spec.gen.basis.lo.size();
  const std::size_t N = spec.ladder[0].dim();
  for (const LatticeCube& c : spec.ladder) {
    if (c.dim() != N)
      throw std::invalid_argument("ladder mixes lattice dimensions");
    if (!check_aspect_ratio(c, spec.c_prime).satisfied)
      throw std::invalid_argument("ladder cube violates the aspect ratio with C' = " + format_double(spec.c_prime));
  }

  // common marginal draws for every rung
  const std::size_t J = spec.gen.basis.j_max;
  const std::vector<double> draws =
      draw_marginal(spec.gen, N, spec.smallball_replicates, derive_key(spec.seed, {0x736d62}), spec.threads);
  const double r_order = spec.psi.order();

  RateReport rep;
  rep.mode = mode;
  const std::size_t seeds = spec.batches * spec.seeds_per_batch;
  for (std::size_t rung = 0; rung < spec.ladder.size(); ++rung) {
    RateRung rr;
    rr.cube = spec.ladder[rung];
    rr.delta = schedule_delta(mode, rr.cube, d);
    rr.h = schedule_h(spec, rr.cube);
    rr.R = schedule_R(spec, rr.cube);

    CoveringOptions copts;
    copts.max_centers = spec.max_centers;
    copts.threads = spec.threads;
    const Covering cov = build_covering(LipschitzBall{rr.R}, rr.delta, basis, copts);
    rr.centers = cov.size();

    std::vector<double> F(cov.size());
    parallel_for(cov.size(), spec.threads, [&](std::size_t i) {
      std::size_t k = 0;
      for (std::size_t r = 0; r < spec.smallball_replicates; ++r)
        if (pseudo_dist(spec.metric, std::span<const double>(draws.data() + r * J, J), cov.center(i)) <= rr.h)
          ++k;
      F[i] = static_cast<double>(k) / static_cast<double>(spec.smallball_replicates);
    });
    rr.inf_F = *std::min_element(F.begin(), F.end());

    EstimatorConfig cfg;
    cfg.kernel = spec.kernel;
    cfg.h = rr.h;
    cfg.metric = spec.metric;
    cfg.min_denominator = spec.min_denominator;

    rr.sup_errors.resize(seeds);
    rr.underflow_fraction.resize(seeds);
    for (std::size_t b = 0; b < spec.batches; ++b) {
      for (std::size_t k = 0; k < spec.seeds_per_batch; ++k) {
        const std::size_t idx = b * spec.seeds_per_batch + k;
        GeneratorSpec g = spec.gen;
        // the same seed across rungs: nested cubes share their common sites
        g.seed = derive_key(spec.seed, {static_cast<std::int64_t>(b), static_cast<std::int64_t>(k)});
        const FieldSample s = generate(g, spec.psi, rr.cube, spec.noise_scale);
        try {
          const SupErrorReport e = sup_error(cfg, s, cov, spec.psi, F, spec.threads);
          rr.sup_errors[idx] = e.sup_error;
          rr.underflow_fraction[idx] = e.underflow_fraction;
        } catch (const AllCentersUnderflow&) {
          rr.sup_errors[idx] = std::nan("");
          rr.underflow_fraction[idx] = 1.0;
        }
      }
    }
    std::vector<double> finite;
    for (double v : rr.sup_errors)
      if (std::isfinite(v))
        finite.push_back(v);
    if (!finite.empty()) {
      rr.median = median(finite);
      rr.q25 = quantile(finite, 0.25);
      rr.q75 = quantile(finite, 0.75);
    } else {
      rr.median = rr.q25 = rr.q75 = std::nan("");
    }
    rr.mean_underflow = mean(rr.underflow_fraction);

    const double n = static_cast<double>(rr.cube.size());
    const double L = std::log(n);
    const double E = effective_sample_size(rr.cube);
    const double dd = static_cast<double>(d);
    const double inf = std::numeric_limits<double>::infinity();
    const double e1 = std::pow(E, 2.0 / (5.0 * dd + 2.0));
    rr.ratio1 = rr.inf_F > 0.0 ? std::pow(rr.R, 2.5 * dd) * std::pow(L, 7.0) / (e1 * rr.inf_F) : inf;
    rr.ratio2 = std::pow(rr.R, r_order) / (e1 * rr.h);
    rr.bias_term = std::pow(rr.h, r_order);
    rr.ratio_weak = rr.inf_F > 0.0 ? std::pow(rr.R, 4.0 * dd) * std::pow(L, 8.0) /
                                         (std::pow(E, 1.0 / (4.0 * dd + 1.0)) * rr.inf_F * rr.inf_F * rr.h)
                                   : inf;
    rep.rungs.push_back(std::move(rr));
  }

  std::size_t good = 0;
  for (std::size_t b = 0; b < spec.batches; ++b) {
    std::vector<double> medians;
    for (const RateRung& rr : rep.rungs)
      medians.push_back(finite_median({rr.sup_errors.begin() + static_cast<std::ptrdiff_t>(b * spec.seeds_per_batch),
                                       rr.sup_errors.begin() + static_cast<std::ptrdiff_t>((b + 1) * spec.seeds_per_batch)}));
    const bool dec = strictly_decreasing(medians);
    rep.batch_decreasing.push_back(dec);
    good += dec ? 1 : 0;
  }
  rep.fraction_decreasing = static_cast<double>(good) / static_cast<double>(spec.batches);

  std::vector<double> x, y;
  for (const RateRung& rr : rep.rungs)
    if (rr.mean_underflow < 0.05 && std::isfinite(rr.median) && rr.median > 0.0) {
      x.push_back(std::log(effective_sample_size(rr.cube)));
      y.push_back(std::log(rr.median));
    }
  if (x.size() >= 2)
    rep.loglog = fit_line(x, y);

  std::vector<double> r1, r2, rw;
  for (const RateRung& rr : rep.rungs) {
    r1.push_back(rr.ratio1);
    r2.push_back(rr.ratio2);
    rw.push_back(rr.ratio_weak);
  }
  rep.ratios_decreasing =
      mode == MixingMode::alpha ? strictly_decreasing(r1) && strictly_decreasing(r2) : strictly_decreasing(rw);
  return rep;
}

} // namespace fkr
