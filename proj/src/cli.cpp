#include "fkr/cli.hpp"

#include "fkr/acceptance.hpp"
#include "fkr/concentration.hpp"
#include "fkr/covering.hpp"
#include "fkr/experiments.hpp"
#include "fkr/fields.hpp"
#include "fkr/lattice.hpp"
#include "fkr/provenance.hpp"
#include "fkr/regression.hpp"
#include "fkr/report.hpp"
#include "fkr/rng.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fkr {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
  if (!j.is_object())
    throw ConfigError("'" + where + "' must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
void take(const json& j, const char* key, T& into)
{
  if (j.contains(key))
    into = j.at(key).get<T>();
}

// ---------------------------------------------------------------- sections

std::vector<LatticeCube> ladder_from_json(const json& j)
{
  std::vector<LatticeCube> out;
  for (const auto& e : j)
    out.push_back(LatticeCube(e.get<std::vector<std::int64_t>>()));
  if (out.empty())
    throw ConfigError("ladder must list at least one cube");
  return out;
}

json ladder_to_json(const std::vector<LatticeCube>& ladder)
{
  json j = json::array();
  for (const auto& c : ladder)
    j.push_back(c.edges());
  return j;
}

std::string to_string(SummandKind s)
{
  switch (s) {
  case SummandKind::generator: return "generator";
  case SummandKind::iid_rademacher: return "iid_rademacher";
  case SummandKind::iid_bernoulli: return "iid_bernoulli";
  }
  return "";
}

SummandKind summand_kind_from_string(const std::string& s)
{
  for (auto k : {SummandKind::generator, SummandKind::iid_rademacher, SummandKind::iid_bernoulli})
    if (to_string(k) == s)
      return k;
  throw ConfigError("unknown summands '" + s + "'");
}

TailRecipe recipe_from_json(const json& j)
{
  check_keys(j, {"summands", "bernoulli_p", "generator", "psi", "noise_scale", "statistic", "coefficient", "estimator", "point"},
             "recipe");
  TailRecipe r;
  if (j.contains("summands"))
    r.summands = summand_kind_from_string(j.at("summands").get<std::string>());
  take(j, "bernoulli_p", r.bernoulli_p);
  if (j.contains("generator"))
    r.gen = generator_spec_from_json(j.at("generator"));
  if (j.contains("psi"))
    r.psi = psi_spec_from_json(j.at("psi"));
  take(j, "noise_scale", r.noise_scale);
  if (j.contains("statistic"))
    r.statistic = tail_statistic_from_string(j.at("statistic").get<std::string>());
  take(j, "coefficient", r.coefficient);
  if (j.contains("estimator"))
    r.estimator = estimator_config_from_json(j.at("estimator"));
  if (j.contains("point"))
    r.point.coeffs = j.at("point").get<std::vector<double>>();
  else if (r.statistic == TailStatistic::kernel_weighted_sum)
    r.point.coeffs.assign(r.gen.basis.j_max, 0.0);
  return r;
}

json recipe_to_json(const TailRecipe& r)
{
  return {{"summands", to_string(r.summands)},
          {"bernoulli_p", r.bernoulli_p},
          {"generator", to_json(r.gen)},
          {"psi", to_json(r.psi)},
          {"noise_scale", r.noise_scale},
          {"statistic", to_string(r.statistic)},
          {"coefficient", r.coefficient},
          {"estimator", to_json(r.estimator)},
          {"point", r.point.coeffs}};
}

json optional_json(const std::optional<double>& v)
{
  return v ? json(*v) : json(nullptr);
}

void take_optional(const json& j, const char* key, std::optional<double>& into)
{
  if (j.contains(key) && !j.at(key).is_null())
    into = j.at(key).get<double>();
}

// ------------------------------------------------------------- run context

struct Globals
{
  std::uint64_t seed = 1;
  std::optional<unsigned> threads;
  std::optional<std::string> output_dir;
  std::size_t max_centers = 1'000'000;
  std::size_t max_values = 50'000'000;
};

struct Common
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> output_dir;
};

json load_config(const Common& c)
{
  if (c.config_path.empty())
    return json::object();
  std::ifstream in(c.config_path);
  if (!in)
    throw ConfigError("cannot open config '" + c.config_path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + c.config_path + "' is not valid JSON: " + e.what());
  }
}

// Splits the config into globals and the subcommand section.
json resolve_globals(const json& cfg, const std::string& section, const Common& c, Globals& g)
{
  check_keys(cfg, {"seed", "threads", "output_dir", "budget", section}, "config");
  take(cfg, "seed", g.seed);
  if (cfg.contains("threads"))
    g.threads = cfg.at("threads").get<unsigned>();
  if (cfg.contains("output_dir"))
    g.output_dir = cfg.at("output_dir").get<std::string>();
  if (cfg.contains("budget")) {
    const json& b = cfg.at("budget");
    check_keys(b, {"max_centers", "max_values"}, "budget");
    take(b, "max_centers", g.max_centers);
    take(b, "max_values", g.max_values);
  }
  // flag > environment > config
  if (c.seed)
    g.seed = *c.seed;
  if (const char* env = std::getenv("FKR_THREADS"); env && *env)
    g.threads = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  if (c.threads)
    g.threads = c.threads;
  if (const char* env = std::getenv("FKR_OUTPUT_DIR"); env && *env)
    g.output_dir = env;
  if (c.output_dir)
    g.output_dir = c.output_dir;
  return cfg.contains(section) ? cfg.at(section) : json::object();
}

struct Run
{
  fs::path dir;
  Provenance prov;
  json resolved;
};

// Creates run-<hash>/ and writes the resolved configuration. Thread count and
// output location do not enter the hash: they never change the numbers.
Run open_run(const std::string& section, const json& body, const Globals& g, std::ostream& out)
{
  Run r;
  r.resolved = {{"seed", g.seed},
                {"budget", {{"max_centers", g.max_centers}, {"max_values", g.max_values}}},
                {section, body}};
  r.prov.config_hash = config_hash(r.resolved);
  r.prov.seed = g.seed;
  const fs::path base = g.output_dir ? fs::path(*g.output_dir) : fs::path("fkr-runs");
  r.dir = base / ("run-" + hash_hex(r.prov.config_hash));
  std::error_code ec;
  fs::create_directories(r.dir, ec);
  if (ec)
    throw std::runtime_error("cannot create run directory '" + r.dir.string() + "': " + ec.message());
  write_text_file(r.dir / "config.json", r.resolved.dump(2) + "\n");
  out << version_and_provenance(r.resolved, g.seed) << "run " << r.dir.string() << "\n";
  return r;
}

unsigned threads_of(const Globals& g)
{
  return g.threads.value_or(0);
}

void emit(const Run& run, const std::string& stem, const std::string& kind, const ReportTable& t, json summary = json::object())
{
  write_text_file(run.dir / (stem + ".csv"), to_csv(t, run.prov));
  write_text_file(run.dir / (stem + ".json"),
                  to_json(make_metadata(kind, t, run.prov, std::move(summary))).dump(2) + "\n");
}

// --------------------------------------------------------------- commands

int cmd_simulate(const json& sec, const Globals& g, std::ostream& out)
{
  check_keys(sec, {"generator", "psi", "noise_scale", "edges", "replicate", "audit"}, "simulate");
  GeneratorSpec gen;
  if (sec.contains("generator"))
    gen = generator_spec_from_json(sec.at("generator"));
  gen.seed = g.seed;
  PsiSpec psi;
  if (sec.contains("psi"))
    psi = psi_spec_from_json(sec.at("psi"));
  double noise = 0.5;
  take(sec, "noise_scale", noise);
  std::vector<std::int64_t> edges{16, 16};
  take(sec, "edges", edges);
  GenerateOptions opts;
  take(sec, "replicate", opts.replicate);
  opts.max_values = g.max_values;
  bool audit = true;
  take(sec, "audit", audit);
  const LatticeCube cube(edges);
  json body = {{"generator", to_json(gen)}, {"psi", to_json(psi)}, {"noise_scale", noise},
               {"edges", edges},            {"replicate", opts.replicate}, {"audit", audit}};
  body["generator"].erase("seed");
  const Run run = open_run("simulate", body, g, out);

  const FieldSample s = generate(gen, psi, cube, noise, opts);
  std::ostringstream csv;
  Provenance p = run.prov;
  p.schema = "fkr.field/1";
  write_field_csv(s, csv, p.header_line().substr(2));
  write_text_file(run.dir / "field.csv", csv.str());
  write_text_file(run.dir / "field.json", field_sidecar(s).dump(2) + "\n");
  if (audit) {
    const AssumptionAudit a = audit_assumptions(s);
    const json aj = {{"second_moments", a.second_moments}, {"decay_slope", a.decay_slope}, {"decay_ok", a.decay_ok},
                     {"z_grid", a.z_grid}, {"tail_frequency", a.tail_frequency}, {"tail_bound", a.tail_bound},
                     {"tail_ok", a.tail_ok}, {"holder_ratio_max", a.holder_ratio_max},
                     {"holder_const", a.holder_const}, {"holder_ok", a.holder_ok}, {"holder_pairs", a.holder_pairs}};
    write_text_file(run.dir / "audit.json", aj.dump(2) + "\n");
    out << "audit: decay " << (a.decay_ok ? "ok" : "violated") << ", tail " << (a.tail_ok ? "ok" : "violated")
        << ", hoelder " << (a.holder_ok ? "ok" : "violated") << "\n";
  }
  out << "wrote " << s.sites() << " sites\n";
  return kExitOk;
}

int cmd_estimate(const json& sec, const Globals& g, std::ostream& out)
{
  check_keys(sec, {"field", "sidecar", "estimator", "psi", "R", "delta", "smallball"}, "estimate");
  if (!sec.contains("field"))
    throw ConfigError("estimate needs 'field' (path to a field CSV)");
  const std::string field = sec.at("field").get<std::string>();
  std::string sidecar = fs::path(field).replace_extension(".json").string();
  take(sec, "sidecar", sidecar);
  EstimatorConfig cfg;
  if (sec.contains("estimator"))
    cfg = estimator_config_from_json(sec.at("estimator"));
  validate(cfg);
  double R = 0.5, delta = 0.4;
  take(sec, "R", R);
  take(sec, "delta", delta);
  std::string source = "monte_carlo";
  std::size_t sb_reps = 4000;
  if (sec.contains("smallball")) {
    const json& sb = sec.at("smallball");
    check_keys(sb, {"source", "replicates"}, "estimate.smallball");
    take(sb, "source", source);
    take(sb, "replicates", sb_reps);
  }
  if (source != "monte_carlo" && source != "analytic" && source != "in_sample")
    throw ConfigError("smallball.source must be monte_carlo, analytic or in_sample");

  std::ifstream fin(field);
  if (!fin)
    throw ConfigError("cannot open field '" + field + "'");
  json side;
  bool have_side = false;
  if (std::ifstream sin(sidecar); sin) {
    side = json::parse(sin);
    have_side = true;
  }
  FieldSample s = read_field_csv(fin, have_side ? &side : nullptr);
  PsiSpec psi = s.psi;
  if (sec.contains("psi"))
    psi = psi_spec_from_json(sec.at("psi"));
  if (source != "in_sample" && !have_side)
    throw ConfigError("a generator sidecar is needed for plugin small-ball values; use smallball.source = in_sample");

  json body = {{"field", field}, {"sidecar", sidecar}, {"estimator", to_json(cfg)}, {"psi", to_json(psi)},
               {"R", R}, {"delta", delta}, {"smallball", {{"source", source}, {"replicates", sb_reps}}}};
  const Run run = open_run("estimate", body, g, out);

  const Basis basis(s.spec.basis);
  CoveringOptions co;
  co.max_centers = g.max_centers;
  co.threads = threads_of(g);
  const Covering cov = build_covering(LipschitzBall{R}, delta, basis, co);
  std::vector<double> F(cov.size());
  if (source == "in_sample") {
    for (std::size_t i = 0; i < cov.size(); ++i)
      F[i] = in_sample_small_ball(s, cov.center(i), cfg.h, cfg.metric);
  } else if (source == "analytic") {
    const std::vector<double> sd = gaussian_marginal_sd(s.spec);
    const std::size_t J = cfg.metric.kind == PseudoMetricSpec::Kind::full ? s.J : cfg.metric.J;
    for (std::size_t i = 0; i < cov.size(); ++i)
      F[i] = gaussian_small_ball(cov.center(i).first(J), std::span<const double>(sd).first(J), cfg.h);
  } else {
    const std::vector<double> draws = draw_marginal(s.spec, s.cube.dim(), sb_reps, derive_key(g.seed, {0x736d62}), threads_of(g));
    for (std::size_t i = 0; i < cov.size(); ++i) {
      std::size_t k = 0;
      for (std::size_t r = 0; r < sb_reps; ++r)
        k += pseudo_dist(cfg.metric, std::span<const double>(draws.data() + r * s.J, s.J), cov.center(i)) <= cfg.h;
      F[i] = static_cast<double>(k) / static_cast<double>(sb_reps);
    }
  }
  const SupErrorReport rep = sup_error(cfg, s, cov, psi, F, threads_of(g));
  emit(run, "estimate", "estimate", estimate_table(rep),
       {{"sup_error", rep.sup_error},
        {"underflow_count", rep.underflow_count},
        {"underflow_fraction", rep.underflow_fraction},
        {"centers", cov.size()},
        {"in_sample_small_ball", source == "in_sample"}});
  out << "sup_error " << format_double(rep.sup_error) << " over " << cov.size() << " centres ("
      << rep.underflow_count << " underflow)\n";
  return kExitOk;
}

int cmd_smallball(const json& sec, const Globals& g, std::ostream& out)
{
  check_keys(sec, {"generator", "N", "point", "metric", "h_grid", "replicates"}, "smallball");
  GeneratorSpec gen;
  if (sec.contains("generator"))
    gen = generator_spec_from_json(sec.at("generator"));
  std::size_t N = 1, reps = 4000;
  take(sec, "N", N);
  take(sec, "replicates", reps);
  PseudoMetricSpec metric = PseudoMetricSpec::projection(2);
  if (sec.contains("metric"))
    metric = pseudo_metric_from_json(sec.at("metric"));
  std::vector<double> h_grid{0.1, 0.2, 0.4, 0.8};
  take(sec, "h_grid", h_grid);
  FunctionalElement x(gen.basis.j_max);
  if (sec.contains("point"))
    x.coeffs = sec.at("point").get<std::vector<double>>();
  if (x.size() != gen.basis.j_max)
    throw ConfigError("point must have j_max coefficients");
  json body = {{"generator", to_json(gen)}, {"N", N}, {"point", x.coeffs}, {"metric", to_json(metric)},
               {"h_grid", h_grid}, {"replicates", reps}};
  body["generator"].erase("seed");
  const Run run = open_run("smallball", body, g, out);
  gen.seed = g.seed;
  const SmallBallTable t = estimate_small_ball(x, h_grid, gen, N, metric, reps, g.seed, threads_of(g));
  std::optional<std::vector<double>> analytic;
  const std::size_t J = metric.kind == PseudoMetricSpec::Kind::full ? gen.basis.j_max : metric.J;
  if (J <= 2) {
    try {
      const std::vector<double> sd = gaussian_marginal_sd(gen);
      analytic.emplace();
      for (double h : h_grid)
        analytic->push_back(gaussian_small_ball(std::span<const double>(x.coeffs).first(J), std::span<const double>(sd).first(J), h));
    } catch (const std::invalid_argument&) {
      analytic.reset();
    }
  }
  emit(run, "smallball", "smallball", smallball_table(t, analytic ? &*analytic : nullptr),
       {{"replicates", t.replicates}, {"u_grid", t.u_grid}});
  out << "small-ball table with " << h_grid.size() << " radii\n";
  return kExitOk;
}

int cmd_tail(const json& sec, const Globals& g, std::ostream& out, const std::optional<std::string>& bound_flag,
             const std::optional<std::size_t>& reps_flag)
{
  check_keys(sec, {"recipe", "bound", "B", "gamma", "norm_g", "ladder", "eps_grid", "replicates", "c_prime", "p_min", "fit_rung"},
             "tail");
  TailLadderSpec s;
  s.recipe.gen.basis.j_max = 4;
  if (sec.contains("recipe"))
    s.recipe = recipe_from_json(sec.at("recipe"));
  std::string bound = "cor32";
  take(sec, "bound", bound);
  if (bound_flag)
    bound = *bound_flag;
  s.bound = bound_kind_from_string(bound);
  take_optional(sec, "B", s.B);
  take_optional(sec, "gamma", s.gamma);
  take_optional(sec, "norm_g", s.norm_g);
  s.ladder = sec.contains("ladder") ? ladder_from_json(sec.at("ladder"))
                                    : std::vector<LatticeCube>{square_cube(2, 8), square_cube(2, 16), square_cube(2, 32)};
  s.eps_grid = {0.02, 0.04, 0.06, 0.08, 0.1, 0.13, 0.16, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5};
  take(sec, "eps_grid", s.eps_grid);
  take(sec, "replicates", s.replicates);
  if (reps_flag)
    s.replicates = *reps_flag;
  take(sec, "c_prime", s.c_prime);
  take(sec, "p_min", s.p_min);
  take(sec, "fit_rung", s.fit_rung);
  s.seed = g.seed;
  s.threads = threads_of(g);
  const json body = {{"recipe", recipe_to_json(s.recipe)}, {"bound", bound}, {"B", optional_json(s.B)},
                     {"gamma", optional_json(s.gamma)}, {"norm_g", optional_json(s.norm_g)},
                     {"ladder", ladder_to_json(s.ladder)}, {"eps_grid", s.eps_grid}, {"replicates", s.replicates},
                     {"c_prime", s.c_prime}, {"p_min", s.p_min}, {"fit_rung", s.fit_rung}};
  const Run run = open_run("tail", body, g, out);
  const TailLadderResult res = run_tail_ladder(s);
  json slopes = json::array();
  for (const auto& f : res.rung_slopes)
    slopes.push_back(f ? json{{"slope", f->slope}, {"r_squared", f->r_squared}, {"points", f->points}} : json(nullptr));
  const json summary = {{"report", to_json(res.report)},
                        {"certificate", to_json(res.cert)},
                        {"A1", res.fitted.A1},
                        {"A2", res.fitted.A2},
                        {"B", res.B},
                        {"dominance", res.dominance},
                        {"rung_slopes", slopes}};
  emit(run, "tail", "tail", tail_table(res.report), summary);
  emit(run, "dominance", "dominance", dominance_table(res));
  write_text_file(run.dir / "tail.gp", gnuplot_script("tail.csv", 4, 7, "eps", "P_hat"));
  out << "fitted A1 " << format_double(res.fitted.A1) << " A2 " << format_double(res.fitted.A2) << "; dominance "
      << (res.dominance ? "holds" : "fails") << " on " << res.rows.size() << " held-out cells\n";
  return kExitOk;
}

int cmd_laplace(const json& sec, const Globals& g, std::ostream& out, const std::optional<std::size_t>& reps_flag)
{
  check_keys(sec, {"recipe", "ladder", "beta_fractions", "replicates", "c_prime", "A2", "fit_rung", "jackknife_z"}, "laplace");
  LaplaceLadderSpec s;
  s.recipe.gen.basis.j_max = 4;
  if (sec.contains("recipe"))
    s.recipe = recipe_from_json(sec.at("recipe"));
  s.ladder = sec.contains("ladder") ? ladder_from_json(sec.at("ladder"))
                                    : std::vector<LatticeCube>{square_cube(2, 8), square_cube(2, 16), square_cube(2, 32)};
  take(sec, "beta_fractions", s.beta_fractions);
  take(sec, "replicates", s.replicates);
  if (reps_flag)
    s.replicates = *reps_flag;
  take(sec, "c_prime", s.c_prime);
  take(sec, "A2", s.A2);
  take(sec, "fit_rung", s.fit_rung);
  take(sec, "jackknife_z", s.jackknife_z);
  s.seed = g.seed;
  s.threads = threads_of(g);
  const json body = {{"recipe", recipe_to_json(s.recipe)}, {"ladder", ladder_to_json(s.ladder)},
                     {"beta_fractions", s.beta_fractions}, {"replicates", s.replicates}, {"c_prime", s.c_prime},
                     {"A2", s.A2}, {"fit_rung", s.fit_rung}, {"jackknife_z", s.jackknife_z}};
  const Run run = open_run("laplace", body, g, out);
  const LaplaceLadderResult res = run_laplace_ladder(s);
  emit(run, "laplace", "laplace", laplace_table(res),
       {{"B", res.B}, {"c1", res.c1}, {"A1", res.A1}, {"A2", res.A2}, {"dominance", res.dominance},
        {"zero_at_zero", res.zero_at_zero}});
  out << "fitted A1 " << format_double(res.A1) << "; bound " << (res.dominance ? "holds" : "fails")
      << " on held-out rungs\n";
  return kExitOk;
}

int cmd_rate(const json& sec, const Globals& g, std::ostream& out, const std::optional<std::string>& mode_flag)
{
  check_keys(sec, {"mode", "generator", "psi", "noise_scale", "ladder", "R", "R_log_power", "h0", "h_log_power", "h_power",
                   "kernel", "metric", "min_denominator", "seeds_per_batch", "batches", "smallball_replicates", "c_prime"},
             "rate");
  RateLadderSpec s;
  s.gen.basis.j_max = 8;
  s.psi.kind = PsiKind::linear_diag;
  s.psi.params = {1.0, 0.5};
  s.ladder = {LatticeCube({64}), LatticeCube({128}), LatticeCube({256})};
  std::string mode = "alpha";
  take(sec, "mode", mode);
  if (mode_flag)
    mode = *mode_flag;
  const MixingMode m = mixing_mode_from_string(mode);
  if (sec.contains("generator"))
    s.gen = generator_spec_from_json(sec.at("generator"));
  if (sec.contains("psi"))
    s.psi = psi_spec_from_json(sec.at("psi"));
  take(sec, "noise_scale", s.noise_scale);
  if (sec.contains("ladder"))
    s.ladder = ladder_from_json(sec.at("ladder"));
  take(sec, "R", s.R);
  take(sec, "R_log_power", s.R_log_power);
  take(sec, "h0", s.h0);
  take(sec, "h_log_power", s.h_log_power);
  take(sec, "h_power", s.h_power);
  if (sec.contains("kernel"))
    s.kernel.kind = kernel_kind_from_string(sec.at("kernel").get<std::string>());
  if (sec.contains("metric"))
    s.metric = pseudo_metric_from_json(sec.at("metric"));
  take(sec, "min_denominator", s.min_denominator);
  take(sec, "seeds_per_batch", s.seeds_per_batch);
  take(sec, "batches", s.batches);
  take(sec, "smallball_replicates", s.smallball_replicates);
  take(sec, "c_prime", s.c_prime);
  s.max_centers = g.max_centers;
  s.seed = g.seed;
  s.threads = threads_of(g);
  json body = {{"mode", mode}, {"generator", to_json(s.gen)}, {"psi", to_json(s.psi)}, {"noise_scale", s.noise_scale},
               {"ladder", ladder_to_json(s.ladder)}, {"R", s.R}, {"R_log_power", s.R_log_power}, {"h0", s.h0},
               {"h_log_power", s.h_log_power}, {"h_power", s.h_power}, {"kernel", to_string(s.kernel.kind)},
               {"metric", to_json(s.metric)}, {"min_denominator", s.min_denominator},
               {"seeds_per_batch", s.seeds_per_batch}, {"batches", s.batches},
               {"smallball_replicates", s.smallball_replicates}, {"c_prime", s.c_prime}};
  body["generator"].erase("seed");
  const Run run = open_run("rate", body, g, out);
  const RateReport rep = run_rate_ladder(s, m);
  json summary = {{"mode", mode},
                  {"fraction_decreasing", rep.fraction_decreasing},
                  {"ratios_decreasing", rep.ratios_decreasing}};
  if (rep.loglog)
    summary["loglog"] = {{"slope", rep.loglog->slope}, {"r_squared", rep.loglog->r_squared}, {"points", rep.loglog->points}};
  emit(run, "rate", "rate", rate_table(rep), summary);
  emit(run, "rate_seeds", "rate_seeds", rate_seed_table(rep, s.seeds_per_batch));
  write_text_file(run.dir / "rate.gp", gnuplot_script("rate.csv", 4, 10, "|I_n|^(1/N)", "median sup error"));
  out << "median sup error";
  for (const RateRung& r : rep.rungs)
    out << " " << (std::isnan(r.median) ? std::string(kUnderflow) : format_double(r.median));
  out << "; " << format_double(rep.fraction_decreasing * 100.0) << "% of batches strictly decreasing\n";
  return kExitOk;
}

int cmd_partition(const json& sec, std::ostream& out, const std::optional<std::size_t>& N_flag,
                  const std::vector<double>& A_flag, const std::optional<double>& delta_flag,
                  const std::optional<std::size_t>& levels_flag)
{
  check_keys(sec, {"N", "A", "delta", "levels", "P"}, "partition");
  std::size_t N = 1, levels = 1;
  double delta = 0.25;
  std::vector<double> A;
  take(sec, "N", N);
  take(sec, "levels", levels);
  take(sec, "delta", delta);
  if (sec.contains("A"))
    A = sec.at("A").is_array() ? sec.at("A").get<std::vector<double>>() : std::vector<double>{sec.at("A").get<double>()};
  if (N_flag)
    N = *N_flag;
  if (!A_flag.empty())
    A = A_flag;
  if (delta_flag)
    delta = *delta_flag;
  if (levels_flag)
    levels = *levels_flag;
  if (A.empty())
    A = {1.0};
  if (A.size() == 1 && N > 1)
    A.assign(N, A[0]);
  if (A.size() != N)
    throw ConfigError("A needs one extent or N extents");
  json result = to_json(cantor_partition(A, delta, levels));
  if (sec.contains("P"))
    result["block_cover"] = to_json(block_cover(A, sec.at("P").get<std::vector<double>>()));
  out << result.dump(2) << "\n";
  return kExitOk;
}

void report_error(std::ostream& err, int code, const std::string& kind, const std::string& msg)
{
  err << "fkr: " << msg << "\n" << json{{"error", {{"code", code}, {"kind", kind}, {"message", msg}}}}.dump() << "\n";
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Functional kernel regression on lattice data: simulation, estimation and concentration checks", "fkr"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON run configuration");
    sub->add_option("--seed", common.seed, "master seed");
    sub->add_option("--threads", common.threads, "worker threads (0 = all cores)");
    sub->add_option("--output-dir", common.output_dir, "directory receiving run-<hash>/");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "generate a field sample with audit");
  CLI::App* estimate = app.add_subcommand("estimate", "per-centre errors of the estimator on a field CSV");
  CLI::App* smallball = app.add_subcommand("smallball", "Monte Carlo small-ball table");
  CLI::App* tail = app.add_subcommand("tail", "tail probability ladder with a fitted bound");
  CLI::App* laplace = app.add_subcommand("laplace", "log-Laplace ladder");
  CLI::App* rate = app.add_subcommand("rate", "uniform error ladder");
  CLI::App* partition = app.add_subcommand("partition", "Cantor-type partition of a box");
  CLI::App* check = app.add_subcommand("check", "acceptance suite");
  for (CLI::App* s : {simulate, estimate, smallball, tail, laplace, rate, partition, check})
    add_common(s);

  std::optional<std::string> bound_flag, mode_flag;
  std::optional<std::size_t> reps_flag, N_flag, levels_flag;
  std::optional<double> delta_flag;
  std::vector<double> A_flag;
  std::string suite = "quick";
  std::vector<int> only;
  tail->add_option("--bound", bound_flag, "bound family");
  tail->add_option("--replicates", reps_flag, "replicates per rung");
  laplace->add_option("--replicates", reps_flag, "replicates per rung");
  rate->add_option("--mode", mode_flag, "alpha or weak");
  partition->add_option("--N", N_flag, "lattice dimension");
  partition->add_option("--A", A_flag, "box extents (one or N values)");
  partition->add_option("--delta", delta_flag, "relative width of the removed slabs");
  partition->add_option("--levels", levels_flag, "refinement levels");
  check->add_option("--suite", suite, "quick or full");
  check->add_option("--only", only, "criterion ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    if (code == 0)
      return kExitOk;
    report_error(err, kExitConfig, "config", e.what());
    return kExitConfig;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "check") {
      if (!common.config_path.empty())
        throw ConfigError("check takes no config file");
      AcceptanceOptions o;
      o.suite = suite_from_string(suite);
      if (common.seed)
        o.seed = *common.seed;
      o.threads = common.threads.value_or(0);
      o.only = only;
      const auto results = run_acceptance(o, &out);
      for (const auto& r : results)
        if (!r.pass)
          return kExitCheck;
      return kExitOk;
    }
    const json cfg = load_config(common);
    Globals g;
    const json sec = resolve_globals(cfg, name, common, g);
    if (name == "partition")
      return cmd_partition(sec, out, N_flag, A_flag, delta_flag, levels_flag);
    try {
      if (name == "simulate")
        return cmd_simulate(sec, g, out);
      if (name == "estimate")
        return cmd_estimate(sec, g, out);
      if (name == "smallball")
        return cmd_smallball(sec, g, out);
      if (name == "tail")
        return cmd_tail(sec, g, out, bound_flag, reps_flag);
      if (name == "laplace")
        return cmd_laplace(sec, g, out, reps_flag);
      if (name == "rate")
        return cmd_rate(sec, g, out, mode_flag);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config value has the wrong type: ") + e.what());
    }
    throw ConfigError("unknown subcommand '" + name + "'");
  } catch (const ConfigError& e) {
    report_error(err, kExitConfig, "config", e.what());
    return kExitConfig;
  } catch (const json::exception& e) {
    report_error(err, kExitConfig, "config", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    report_error(err, kExitConfig, "config", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    report_error(err, kExitRuntime, "runtime", e.what());
    return kExitRuntime;
  }
}

} // namespace fkr
