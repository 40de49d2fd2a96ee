#include "fkr/acceptance.hpp"

#include "fkr/concentration.hpp"
#include "fkr/covering.hpp"
#include "fkr/experiments.hpp"
#include "fkr/fields.hpp"
#include "fkr/hilbert.hpp"
#include "fkr/lattice.hpp"
#include "fkr/provenance.hpp"
#include "fkr/regression.hpp"
#include "fkr/report.hpp"
#include "fkr/rng.hpp"
#include "fkr/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fkr {

Suite suite_from_string(const std::string& s)
{
  if (s == "quick")
    return Suite::quick;
  if (s == "full")
    return Suite::full;
  throw std::invalid_argument("unknown suite '" + s + "' (quick|full)");
}

std::string format_result(const CriterionResult& r)
{
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << " " << r.id << " " << r.name << " [" << format_double(std::round(r.seconds * 100.0) / 100.0)
     << " s";
  if (r.limit_seconds > 0.0)
    os << " / limit " << format_double(r.limit_seconds) << " s";
  os << "] " << r.detail;
  return os.str();
}

namespace {

struct Context
{
  const AcceptanceOptions& opts;
  bool full() const { return opts.suite == Suite::full; }
  std::uint64_t key(std::int64_t tag) const { return derive_key(opts.seed, {tag}); }
};

std::string fmt(double x)
{
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

// ------------------------------------------------------------ 1. partitions

CriterionResult partitions(const Context& ctx)
{
  CriterionResult r{1, "partition identities", true, "", 0.0, 5.0};
  CounterRng rng(ctx.key(1));
  double worst_tiling = 0.0, worst_cantor = 0.0, worst_sep_margin = std::numeric_limits<double>::infinity();
  std::size_t overlaps = 0;
  const std::size_t configs = 200;
  for (std::size_t c = 0; c < configs; ++c) {
    const std::size_t N = 1 + rng.below(3);
    std::vector<double> A(N), P(N);
    double vol = 1.0;
    for (std::size_t k = 0; k < N; ++k) {
      A[k] = rng.uniform(1.0, 30.0);
      P[k] = A[k] * rng.uniform(0.1, 0.5);
      vol *= A[k];
    }
    const double min_p = *std::min_element(P.begin(), P.end());
    const auto cover = block_cover(A, P);
    std::vector<const Box*> all;
    for (const BlockCover& cls : cover) {
      for (std::size_t i = 0; i < cls.blocks.size(); ++i) {
        all.push_back(&cls.blocks[i]);
        for (std::size_t j = i + 1; j < cls.blocks.size(); ++j)
          worst_sep_margin = std::min(worst_sep_margin, box_distance(cls.blocks[i], cls.blocks[j]) - min_p);
      }
    }
    double covered = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      covered += all[i]->volume();
      for (std::size_t j = i + 1; j < all.size(); ++j)
        if (overlap_volume(*all[i], *all[j]) > 0.0)
          ++overlaps;
    }
    worst_tiling = std::max(worst_tiling, std::abs(covered - vol) / vol);

    const double delta = rng.uniform(0.01, 0.5);
    const std::size_t levels = 1 + rng.below(N == 1 ? 4 : N == 2 ? 3 : 2);
    const CantorPartition cp = cantor_partition(A, delta, levels);
    const double expect = std::pow(1.0 - delta, static_cast<double>(N * levels)) * vol;
    double outer = 0.0;
    for (const Box& b : cp.outer_cubes)
      outer += b.volume();
    worst_cantor = std::max({worst_cantor, std::abs(outer - expect) / expect,
                             std::abs(cp.outer_volume_by_level.back() - expect) / expect});
    if (cp.outer_cubes.size() != (std::size_t{1} << (N * levels)))
      r.pass = false;
  }
  r.pass = r.pass && worst_tiling < 1e-12 && worst_cantor < 1e-12 && overlaps == 0 && worst_sep_margin >= 0.0;
  r.detail = std::to_string(configs) + " configs; tiling rel. error " + fmt(worst_tiling) + ", overlaps " +
             std::to_string(overlaps) + ", Cantor rel. error " + fmt(worst_cantor) + ", min separation - min P = " +
             fmt(worst_sep_margin);
  return r;
}

// -------------------------------------------------------------- 2. covering

CriterionResult covering(const Context& ctx)
{
  CriterionResult r{2, "covering validity", true, "", 0.0, 60.0};
  BasisSpec spec; // Legendre on [0, 1]
  spec.j_max = 8;
  const Basis basis(spec);
  const std::vector<double> deltas = ctx.full() ? std::vector<double>{0.5, 0.25} : std::vector<double>{0.5};
  std::vector<double> scaled;
  std::ostringstream os;
  for (double delta : deltas) {
    CoveringOptions o;
    o.threads = ctx.opts.threads;
    const Covering cov = build_covering(LipschitzBall{1.0}, delta, basis, o);
    const CoverageAudit a = audit_covering(cov, basis, 1000, ctx.key(static_cast<std::int64_t>(delta * 1000)), ctx.opts.threads);
    const double s = std::log(static_cast<double>(cov.size())) * delta;
    scaled.push_back(s);
    r.pass = r.pass && a.covered == a.probes && a.max_distance < delta;
    os << "delta " << delta << ": " << cov.size() << " centres, " << a.covered << "/" << a.probes
       << " covered, max dist " << fmt(a.max_distance) << ", log(#)*delta " << fmt(s) << "; ";
  }
  const double spread = *std::max_element(scaled.begin(), scaled.end()) / *std::min_element(scaled.begin(), scaled.end());
  r.pass = r.pass && spread <= 3.0;
  os << "spread " << fmt(spread);
  r.detail = os.str();
  return r;
}

// ------------------------------------------------------- 3. binomial oracle

CriterionResult binomial(const Context& ctx)
{
  CriterionResult r{3, "tail estimator vs binomial oracle", false, "", 0.0, 60.0};
  const std::vector<std::int64_t> sizes{10, 20, 50, 100, 200};
  const std::vector<double> eps{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
  const std::size_t reps = ctx.full() ? 10000 : 2000;
  std::vector<LatticeCube> ladder;
  for (auto n : sizes)
    ladder.push_back(LatticeCube({n}));
  std::size_t inside = 0, total = 0;
  for (int kind = 0; kind < 2; ++kind) {
    TailRecipe rc;
    rc.summands = kind == 0 ? SummandKind::iid_rademacher : SummandKind::iid_bernoulli;
    rc.bernoulli_p = 0.3;
    const TailReport rep = empirical_tail(rc, eps, ladder, reps, ctx.key(30 + kind), ctx.opts.threads);
    for (const TailCell& c : rep.cells) {
      const auto n = static_cast<std::size_t>(sizes[c.rung]);
      const double nd = static_cast<double>(n);
      // |sum of +-1| / n >= eps  <=>  |K - n/2| >= eps n / 2 with K ~ Bin(n, 1/2)
      const double truth = kind == 0 ? binomial_two_sided_tail(n, 0.5, c.eps * nd / 2.0)
                                     : binomial_two_sided_tail(n, 0.3, c.eps * nd);
      inside += c.ci.contains(truth) ? 1 : 0;
      ++total;
    }
  }
  const double frac = static_cast<double>(inside) / static_cast<double>(total);
  r.pass = frac >= 0.95;
  r.detail = std::to_string(inside) + "/" + std::to_string(total) + " cells contain the exact tail (" + fmt(frac) +
             "), " + std::to_string(reps) + " replicates";
  return r;
}

// ------------------------------------------------------------ 4. Ibragimov

CriterionResult ibragimov(const Context& ctx)
{
  CriterionResult r{4, "covariance inequality on discrete joints", true, "", 0.0, 30.0};
  CounterRng rng(ctx.key(4));
  const std::size_t trials = 1000;
  std::size_t held = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    DiscreteJoint jt;
    const std::size_t k = 2 + rng.below(3);
    std::size_t cells = 1;
    for (std::size_t v = 0; v < k; ++v) {
      const std::size_t m = 1 + rng.below(3);
      std::vector<double> sup(m);
      for (double& s : sup)
        s = rng.uniform(0.0, 3.0);
      jt.support.push_back(sup);
      cells *= m;
    }
    jt.prob.resize(cells);
    double z = 0.0;
    for (double& p : jt.prob) {
      // sparse joints exercise strong dependence
      p = rng.uniform() < 0.3 ? 0.0 : -std::log(rng.uniform_pos());
      z += p;
    }
    if (z == 0.0) {
      jt.prob[0] = 1.0;
      z = 1.0;
    }
    for (double& p : jt.prob)
      p /= z;
    const IbragimovResult res = ibragimov_check(jt);
    held += res.holds ? 1 : 0;
    worst = std::max(worst, res.lhs - res.rhs);
  }
  r.pass = held == trials;
  r.detail = std::to_string(held) + "/" + std::to_string(trials) + " joints satisfy lhs <= rhs + 1e-12; max(lhs - rhs) = " +
             fmt(worst);
  return r;
}

// -------------------------------------------------------- 5./6. tail ladders

GeneratorSpec ma_generator()
{
  GeneratorSpec g;
  g.kind = GeneratorKind::functional_ma;
  g.q = 1;
  g.basis.j_max = 4;
  return g;
}

std::vector<LatticeCube> square_ladder(const std::vector<std::int64_t>& ks)
{
  std::vector<LatticeCube> out;
  for (auto k : ks)
    out.push_back(square_cube(2, k));
  return out;
}

std::string dominance_detail(const TailLadderResult& res)
{
  std::size_t ok = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const DominanceRow& d : res.rows) {
    ok += d.dominated ? 1 : 0;
    worst = std::min(worst, d.bound / d.upper);
  }
  return "A1 = " + fmt(res.fitted.A1) + ", A2 = " + fmt(res.fitted.A2) + ", dominated " + std::to_string(ok) + "/" +
         std::to_string(res.rows.size()) + " held-out cells (min bound/upper " + fmt(worst) + ")";
}

CriterionResult cor32_dominance(const Context& ctx)
{
  CriterionResult r{5, "real tail bound dominance", false, "", 0.0, 300.0};
  TailLadderSpec s;
  s.recipe.gen = ma_generator();
  s.recipe.statistic = TailStatistic::real_sum;
  s.bound = BoundKind::cor32;
  s.ladder = square_ladder({8, 16, 32});
  s.eps_grid = {0.02, 0.04, 0.06, 0.08, 0.1, 0.13, 0.16, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5};
  s.replicates = ctx.full() ? 2000 : 400;
  s.seed = ctx.key(5);
  s.threads = ctx.opts.threads;
  const TailLadderResult res = run_tail_ladder(s);
  bool slopes = false, slopes_ok = true;
  std::ostringstream os;
  os << dominance_detail(res) << "; slopes";
  for (std::size_t k = 0; k < res.rung_slopes.size(); ++k) {
    const auto& f = res.rung_slopes[k];
    if (!f) {
      os << " [" << k << "] n/a";
      continue;
    }
    slopes = true;
    slopes_ok = slopes_ok && f->slope < 0.0 && f->r_squared > 0.9;
    os << " [" << k << "] " << fmt(f->slope) << " (R2 " << fmt(f->r_squared) << ")";
  }
  r.pass = res.dominance && slopes && slopes_ok;
  r.detail = os.str();
  return r;
}

bool bitwise_equal(double a, double b)
{
  return std::memcmp(&a, &b, sizeof a) == 0;
}

CriterionResult hilbert_dominance(const Context& ctx)
{
  CriterionResult r{6, "Hilbert tail bound consistency and dominance", true, "", 0.0, 300.0};
  std::size_t equal = 0, compared = 0;
  double worst42 = 0.0;
  for (std::int64_t k : {4, 8, 16, 32, 64}) {
    const LatticeCube cube = square_cube(2, k);
    for (double eps : {0.01, 0.05, 0.1, 0.3, 1.0, 2.0}) {
      BoundSpec g{BoundKind::thm33_general, 1.7, 0.3, std::nullopt, 1.0, std::nullopt};
      BoundSpec o = g;
      o.which = BoundKind::thm33_gamma1;
      equal += bitwise_equal(bound_eval(g, eps, cube), bound_eval(o, eps, cube)) ? 1 : 0;
      ++compared;
      BoundSpec g42{BoundKind::thm42_general, 1.7, 0.3, std::nullopt, 1.0, 2.5};
      BoundSpec o42 = g42;
      o42.which = BoundKind::thm42_gamma1;
      const double a = bound_eval(g42, eps, cube), b = bound_eval(o42, eps, cube);
      worst42 = std::max(worst42, std::abs(a - b) / std::abs(b));
    }
  }
  std::ostringstream os;
  os << "gamma=1 forms: thm33 bit-equal " << equal << "/" << compared << ", thm42 max rel. diff " << fmt(worst42);
  r.pass = equal == compared && worst42 < 1e-12;

  TailLadderSpec s;
  s.recipe.gen = ma_generator();
  s.recipe.statistic = TailStatistic::hilbert_norm_sum;
  s.ladder = square_ladder({8, 16, 32});
  s.eps_grid = {0.05, 0.08, 0.1, 0.13, 0.16, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5, 0.6, 0.7};
  s.replicates = ctx.full() ? 2000 : 400;
  s.seed = ctx.key(6);
  s.threads = ctx.opts.threads;
  for (BoundKind b : {BoundKind::thm33_gamma1, BoundKind::thm42_gamma1}) {
    s.bound = b;
    const TailLadderResult res = run_tail_ladder(s);
    r.pass = r.pass && res.dominance;
    os << "; " << to_string(b) << " (gamma " << fmt(*res.fitted.gamma) << "): " << dominance_detail(res);
  }
  r.detail = os.str();
  return r;
}

// ------------------------------------------------------------ 7. log-Laplace

CriterionResult laplace(const Context& ctx)
{
  CriterionResult r{7, "log-Laplace bound", false, "", 0.0, 120.0};
  LaplaceLadderSpec s;
  s.recipe.gen = ma_generator();
  s.recipe.statistic = TailStatistic::real_sum;
  s.ladder = square_ladder({8, 16, 32});
  s.replicates = ctx.full() ? 2000 : 400;
  s.seed = ctx.key(7);
  s.threads = ctx.opts.threads;
  const LaplaceLadderResult res = run_laplace_ladder(s);
  std::size_t ok = 0, total = 0;
  for (std::size_t k = 0; k < res.rungs.size(); ++k) {
    if (k == s.fit_rung)
      continue;
    for (const LaplaceEstimate& e : res.rungs[k].estimates) {
      if (e.beta == 0.0)
        continue;
      ++total;
      ok += e.log_laplace <= e.rhs ? 1 : 0;
    }
  }
  r.pass = res.dominance && res.zero_at_zero;
  r.detail = "B = " + fmt(res.B) + ", A1 = " + fmt(res.A1) + ", A2 = " + fmt(res.A2) + "; held-out " +
             std::to_string(ok) + "/" + std::to_string(total) + " below the bound; beta = 0 gives 0: " +
             (res.zero_at_zero ? "yes" : "no");
  return r;
}

// ------------------------------------------------------ 8. estimator oracles

// Direct transcription of the estimator for the oracle comparison.
struct Naive
{
  double f = 0.0;
  std::vector<double> g, psi;
};

Naive naive_estimate(const FieldSample& s, const std::vector<double>& x, KernelKind kind, double h, std::size_t J,
                     double F)
{
  Naive out;
  out.g.assign(s.J, 0.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < s.sites(); ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < J; ++j)
      d2 += (s.X[i * s.J + j] - x[j]) * (s.X[i * s.J + j] - x[j]);
    const double u = std::sqrt(d2) / h;
    double w = 0.0;
    if (u <= 1.0)
      w = kind == KernelKind::quadratic ? 1.0 - u * u : kind == KernelKind::triangle_zero ? 1.0 - u : 1.0;
    wsum += w;
    for (std::size_t j = 0; j < s.J; ++j)
      out.g[j] += w * s.Y[i * s.J + j];
  }
  const double n = static_cast<double>(s.sites());
  out.f = wsum / (n * F);
  out.psi.resize(s.J);
  for (std::size_t j = 0; j < s.J; ++j) {
    out.psi[j] = wsum > 0.0 ? out.g[j] / wsum : 0.0;
    out.g[j] /= n * F;
  }
  return out;
}

CriterionResult estimator(const Context& ctx)
{
  CriterionResult r{8, "estimator exactness", true, "", 0.0, 0.0};
  CounterRng rng(ctx.key(8));
  double worst = 0.0;
  std::size_t skipped = 0;
  for (std::size_t t = 0; t < 100; ++t) {
    const std::size_t N = 1 + rng.below(3);
    std::vector<std::int64_t> edges(N);
    for (auto& e : edges)
      e = 1 + static_cast<std::int64_t>(rng.below(N == 1 ? 27 : N == 2 ? 5 : 3));
    FieldSample s;
    s.cube = LatticeCube(edges);
    s.J = 1 + rng.below(4);
    s.X.resize(s.sites() * s.J);
    s.Y.resize(s.sites() * s.J);
    for (double& v : s.X)
      v = rng.normal();
    for (double& v : s.Y)
      v = rng.normal();
    EstimatorConfig c;
    const KernelKind kinds[] = {KernelKind::quadratic, KernelKind::triangle_zero, KernelKind::indicator};
    c.kernel.kind = kinds[rng.below(3)];
    c.h = rng.uniform(0.5, 3.0);
    c.metric = rng.below(2) == 0 ? PseudoMetricSpec::full() : PseudoMetricSpec::projection(1 + rng.below(s.J));
    const std::size_t J = c.metric.kind == PseudoMetricSpec::Kind::full ? s.J : c.metric.J;
    std::vector<double> x(s.J);
    for (double& v : x)
      v = rng.normal() * 0.5;
    const double F = rng.uniform(0.05, 1.0);
    const Naive nv = naive_estimate(s, x, c.kernel.kind, c.h, J, F);
    const PointEstimate e = estimate_at(c, s, x, F);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    worst = std::max(worst, rel(e.f, nv.f));
    for (std::size_t j = 0; j < s.J; ++j)
      worst = std::max(worst, rel(e.g.coeffs[j], nv.g[j]));
    if (e.underflow) {
      ++skipped;
      continue;
    }
    for (std::size_t j = 0; j < s.J; ++j)
      worst = std::max(worst, rel(e.psi.coeffs[j], nv.psi[j]));
  }
  std::ostringstream os;
  os << "100 tiny samples: max rel. deviation " << fmt(worst) << " (" << skipped << " underflow)";
  r.pass = worst <= 1e-12;

  // E f_hat against K(1) - int K'(u) F(hu)/F(h) du with the exact Gaussian F
  GeneratorSpec g = ma_generator();
  g.innovation = InnovationKind::gaussian;
  g.seed = ctx.key(81);
  const std::vector<double> sd = gaussian_marginal_sd(g);
  const std::vector<double> x{0.3, -0.1, 0.05, 0.0};
  const std::size_t reps = ctx.full() ? 2000 : 500;
  const LatticeCube cube({16});
  for (double h : {0.3, 0.6, 1.0}) {
    EstimatorConfig c;
    c.kernel.kind = KernelKind::quadratic;
    c.h = h;
    c.metric = PseudoMetricSpec::projection(2);
    const double F = gaussian_small_ball(std::span<const double>(x).first(2), std::span<const double>(sd).first(2), h);
    std::vector<double> fh(reps);
    for (std::size_t k = 0; k < reps; ++k) {
      GenerateOptions go;
      go.replicate = k;
      go.with_response = false;
      const FieldSample smp = generate(g, PsiSpec{}, cube, 0.0, go);
      fh[k] = estimate_at(c, smp, x, F).f;
    }
    const double m = mean(fh);
    const double se = std::sqrt(variance(fh) / static_cast<double>(reps));
    const MxResult mx = m_x(c.kernel, [&](double u) {
      return gaussian_small_ball(std::span<const double>(x).first(2), std::span<const double>(sd).first(2), h * u) / F;
    });
    const double z = (m - mx.value) / se;
    r.pass = r.pass && std::abs(z) <= 3.0;
    os << "; h " << h << ": mean f_hat " << fmt(m) << " vs M " << fmt(mx.value) << " (z " << fmt(z) << ")";
  }
  r.detail = os.str();
  return r;
}

// ---------------------------------------------------------- 9. rate ladders

RateLadderSpec rate_spec(const Context& ctx)
{
  RateLadderSpec s;
  s.gen.kind = GeneratorKind::functional_ma;
  s.gen.q = 1;
  s.gen.basis.j_max = 8;
  s.psi.kind = PsiKind::linear_diag;
  s.psi.params = {1.0, 0.5};
  s.ladder = {LatticeCube({64}), LatticeCube({128}), LatticeCube({256})};
  s.kernel.kind = KernelKind::quadratic;
  s.batches = ctx.full() ? 10 : 2;
  s.seeds_per_batch = ctx.full() ? 20 : 5;
  s.smallball_replicates = ctx.full() ? 4000 : 1000;
  s.seed = ctx.key(9);
  s.threads = ctx.opts.threads;
  return s;
}

CriterionResult rates(const Context& ctx)
{
  CriterionResult r{9, "uniform rate ladders", true, "", 0.0, 600.0};
  std::ostringstream os;
  for (MixingMode mode : {MixingMode::alpha, MixingMode::weak}) {
    const RateLadderSpec s = rate_spec(ctx);
    const RateReport rep = run_rate_ladder(s, mode);
    r.pass = r.pass && rep.fraction_decreasing >= 0.8;
    os << to_string(mode) << ": " << fmt(rep.fraction_decreasing * 100.0) << "% batches decreasing, medians";
    for (const RateRung& g : rep.rungs)
      os << " " << fmt(g.median);
    if (mode == MixingMode::alpha) {
      r.pass = r.pass && rep.ratios_decreasing;
      os << ", ratio1";
      for (const RateRung& g : rep.rungs)
        os << " " << fmt(g.ratio1);
      os << ", ratio2";
      for (const RateRung& g : rep.rungs)
        os << " " << fmt(g.ratio2);
    }
    os << "; ";
  }
  r.detail = os.str();
  return r;
}

// ----------------------------------------------------------- 10. determinism

std::string determinism_bytes(const Context& ctx, unsigned threads)
{
  const Provenance p{"", 0x1234, ctx.opts.seed};
  TailLadderSpec t;
  t.recipe.gen = ma_generator();
  t.bound = BoundKind::cor32;
  t.ladder = square_ladder({8, 16});
  t.eps_grid = {0.05, 0.1, 0.2, 0.3};
  t.replicates = 300;
  t.seed = ctx.key(10);
  t.threads = threads;
  const TailLadderResult tr = run_tail_ladder(t);

  LaplaceLadderSpec l;
  l.recipe.gen = ma_generator();
  l.ladder = square_ladder({8, 16});
  l.replicates = 300;
  l.seed = ctx.key(11);
  l.threads = threads;
  const LaplaceLadderResult lr = run_laplace_ladder(l);

  RateLadderSpec rs = rate_spec(ctx);
  rs.ladder = {LatticeCube({64}), LatticeCube({128})};
  rs.batches = 1;
  rs.seeds_per_batch = 3;
  rs.smallball_replicates = 500;
  rs.threads = threads;
  const RateReport rr = run_rate_ladder(rs, MixingMode::alpha);

  return to_csv(tail_table(tr.report), p) + to_csv(dominance_table(tr), p) + to_csv(laplace_table(lr), p) +
         to_csv(rate_table(rr), p) + to_csv(rate_seed_table(rr, rs.seeds_per_batch), p);
}

CriterionResult determinism(const Context& ctx)
{
  CriterionResult r{10, "determinism across runs and thread counts", false, "", 0.0, 0.0};
  const std::string a = determinism_bytes(ctx, 1);
  const std::string b = determinism_bytes(ctx, 1);
  const std::string c = determinism_bytes(ctx, 4);
  r.pass = a == b && a == c;
  r.detail = std::to_string(a.size()) + " CSV bytes; repeat identical: " + (a == b ? "yes" : "no") +
             ", 1 vs 4 threads identical: " + (a == c ? "yes" : "no");
  return r;
}

} // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::ostream* progress)
{
  using Fn = CriterionResult (*)(const Context&);
  const Fn all[] = {partitions, covering, binomial, ibragimov, cor32_dominance,
                    hilbert_dominance, laplace, estimator, rates, determinism};
  const Context ctx{opts};
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 10; ++id) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end())
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = all[id - 1](ctx);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opts.suite == Suite::full && r.limit_seconds > 0.0 && r.seconds > r.limit_seconds) {
      r.pass = false;
      r.detail += "; runtime limit exceeded";
    }
    if (opts.suite == Suite::quick)
      r.limit_seconds = 0.0;
    if (progress)
      *progress << format_result(r) << std::endl;
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace fkr
