#include "fkr/experiments.hpp"
#include "fkr/report.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fkr;

namespace {

TailLadderSpec ma_cor32()
{
  TailLadderSpec s;
  s.recipe.gen.q = 1;
  s.recipe.gen.basis.j_max = 4;
  s.recipe.gen.seed = 3;
  s.ladder = {LatticeCube({8, 8}), LatticeCube({16, 16})};
  s.eps_grid = {0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.15, 0.2};
  s.replicates = 1000;
  s.seed = 11;
  s.threads = 1;
  return s;
}

RateLadderSpec small_rate()
{
  RateLadderSpec s;
  s.gen.q = 1;
  s.gen.basis.j_max = 4;
  s.ladder = {LatticeCube({64}), LatticeCube({128})};
  s.psi = PsiSpec{PsiKind::linear_diag, {1.0, 0.5}, 1.0};
  s.seeds_per_batch = 2;
  s.batches = 1;
  s.smallball_replicates = 1000;
  s.threads = 1;
  return s;
}

} // namespace

TEST_CASE("non-mixing generator is refused by the alpha-mixing bound")
{
  auto s = ma_cor32();
  s.recipe.gen.kind = GeneratorKind::bernoulli_ar1;
  s.recipe.gen.basis.j_max = 1;
  s.ladder = {LatticeCube({64}), LatticeCube({128})};
  CHECK_THROWS_AS(run_tail_ladder(s), CertificateMismatch);
}

TEST_CASE("tail ladder fits and attaches the bound")
{
  auto res = run_tail_ladder(ma_cor32());
  CHECK(res.fitted.which == BoundKind::cor32);
  CHECK(res.fitted.A1 > 0.0);
  CHECK(res.fitted.A2 >= 1e-6);
  CHECK(res.B == doctest::Approx(summand_bound(ma_cor32().recipe, 2)));
  for (const auto& c : res.report.cells)
    CHECK(c.bound == bound_eval(res.fitted, c.eps, res.report.ladder[c.rung]));
  // the fitted bound covers the fit rung
  for (const auto& c : res.report.cells)
    if (c.rung == 0 && c.p_hat > 1e-3)
      CHECK(c.bound >= c.ci.hi * (1.0 - 1e-12));
  for (const auto& row : res.rows)
    CHECK(row.dominated == (row.bound >= row.upper));
}

TEST_CASE("tail ladder CSV is byte-stable across thread counts")
{
  auto a = ma_cor32();
  auto b = ma_cor32();
  b.threads = 3;
  Provenance p{kSchemaTail, 42, a.seed};
  auto ra = run_tail_ladder(a);
  auto rb = run_tail_ladder(b);
  CHECK(to_csv(tail_table(ra.report), p) == to_csv(tail_table(rb.report), p));
  CHECK(to_csv(dominance_table(ra), p) == to_csv(dominance_table(rb), p));
}

TEST_CASE("kernel-weighted ladder uses the kernel pseudo-norm")
{
  TailLadderSpec s;
  s.recipe.gen.q = 1;
  s.recipe.gen.basis.j_max = 4;
  s.recipe.psi = PsiSpec{PsiKind::linear_diag, {1.0, 0.5}, 1.0};
  s.recipe.noise_scale = 0.2;
  s.recipe.statistic = TailStatistic::kernel_weighted_sum;
  s.recipe.estimator.h = 0.5;
  s.recipe.estimator.metric = PseudoMetricSpec::projection(2);
  s.recipe.point = FunctionalElement(4);
  s.bound = BoundKind::prop41;
  s.ladder = {LatticeCube({64}), LatticeCube({256})};
  s.eps_grid = {0.005, 0.01, 0.02, 0.03, 0.05, 0.08};
  s.replicates = 1000;
  s.threads = 1;
  auto res = run_tail_ladder(s);
  CHECK(res.fitted.norm_g.value() == doctest::Approx(4.0));
  CHECK(res.cert.phi_certified);

  s.bound = BoundKind::cor32;
  CHECK_THROWS_AS(run_tail_ladder(s), std::invalid_argument);
}

TEST_CASE("laplace ladder is zero at zero and reports a fitted constant")
{
  LaplaceLadderSpec s;
  s.recipe.summands = SummandKind::iid_rademacher;
  s.ladder = {LatticeCube({16, 16}), LatticeCube({32, 32})};
  s.replicates = 1000;
  s.threads = 1;
  auto res = run_laplace_ladder(s);
  CHECK(res.zero_at_zero);
  CHECK(res.A1 > 0.0);
  CHECK(res.A2 == 1.0);
  REQUIRE(res.rungs.size() == 2);
  CHECK(res.rungs[0].estimates.front().beta == 0.0);
  CHECK(res.rungs[0].estimates.front().log_laplace == 0.0);
}

TEST_CASE("zero response gives zero sup error")
{
  auto s = small_rate();
  s.psi = PsiSpec{};
  s.noise_scale = 0.0;
  auto rep = run_rate_ladder(s, MixingMode::alpha);
  for (const auto& r : rep.rungs)
    for (double e : r.sup_errors)
      if (!std::isnan(e))
        CHECK(e == 0.0);
}

TEST_CASE("weak mode needs a kernel vanishing at one")
{
  auto s = small_rate();
  s.kernel = KernelSpec{KernelKind::indicator};
  CHECK_THROWS_AS(run_rate_ladder(s, MixingMode::weak), NotLipschitz);
  CHECK_NOTHROW(run_rate_ladder(s, MixingMode::alpha));
}

TEST_CASE("schedules follow their formulas")
{
  auto s = small_rate();
  s.R = 0.3;
  s.R_log_power = 0.3;
  for (auto mode : {MixingMode::alpha, MixingMode::weak}) {
    auto rep = run_rate_ladder(s, mode);
    REQUIRE(rep.rungs.size() == 2);
    for (const auto& r : rep.rungs) {
      double n = static_cast<double>(r.cube.size());
      double E = n; // N = 1
      double d = 1.0;
      double delta = mode == MixingMode::alpha ? std::pow(E, -2.0 / (2.0 + 5.0 * d)) : std::pow(E, -1.0 / (4.0 * d + 1.0));
      CHECK(r.delta == delta);
      CHECK(r.h == s.h0 * std::pow(std::log(n), s.h_log_power) * std::pow(E, -s.h_power));
      CHECK(r.R == s.R * std::pow(std::log(n), 0.3));
      double ratio1 = std::pow(r.R, 5.0 * d / 2.0) * std::pow(std::log(n), 7.0) /
                      (std::pow(E, 2.0 / (5.0 * d + 2.0)) * r.inf_F);
      CHECK(r.ratio1 == doctest::Approx(ratio1).epsilon(1e-12));
      double ratio2 = std::pow(r.R, 1.0) / (std::pow(E, 2.0 / (5.0 * d + 2.0)) * r.h);
      CHECK(r.ratio2 == doctest::Approx(ratio2).epsilon(1e-12));
      CHECK(r.bias_term == doctest::Approx(r.h).epsilon(1e-14));
      CHECK(r.centers > 0);
      CHECK(r.sup_errors.size() == 2);
    }
  }
}

TEST_CASE("rate ladder output is independent of thread count")
{
  auto a = small_rate();
  auto b = small_rate();
  b.threads = 4;
  auto ra = run_rate_ladder(a, MixingMode::alpha);
  auto rb = run_rate_ladder(b, MixingMode::alpha);
  Provenance p{kSchemaRate, 1, 1};
  CHECK(to_csv(rate_table(ra), p) == to_csv(rate_table(rb), p));
  CHECK(to_csv(rate_seed_table(ra, 2), p) == to_csv(rate_seed_table(rb, 2), p));
}

TEST_CASE("all-underflow rungs are marked, never zero")
{
  RateReport rep;
  RateRung g;
  g.cube = LatticeCube({64});
  g.median = g.q25 = g.q75 = std::nan("");
  g.sup_errors = {std::nan("")};
  g.underflow_fraction = {1.0};
  g.mean_underflow = 1.0;
  rep.rungs.push_back(g);
  auto t = rate_table(rep);
  REQUIRE(t.rows.size() == 1);
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
      if (t.columns[i] == name)
        return t.rows[0][i];
    return std::string{};
  };
  CHECK(col("median") == kUnderflow);
  CHECK(col("q25") == kUnderflow);
  CHECK(col("underflow_fraction") == "1");
  auto seeds = rate_seed_table(rep, 1);
  CHECK(seeds.rows[0][3] == kUnderflow);

  SupErrorReport se;
  se.centers = {CenterError{0.0, std::nan(""), true, false}, CenterError{0.5, 0.25, false, false}};
  auto est = estimate_table(se);
  CHECK(est.rows[0][2] == kUnderflow);
  CHECK(est.rows[1][2] == "0.25");
}

TEST_CASE("CSV layout and provenance header")
{
  ReportTable t{kSchemaTail, {"a", "b"}, {{"1", "2.5"}, {"3", "nan"}}};
  Provenance p{kSchemaTail, 0xabcdef, 7};
  std::string csv = to_csv(t, p);
  CHECK(csv == "# schema=fkr.tail/1 tool=fkr/0.4.0 config=0000000000abcdef seed=7\na,b\n1,2.5\n3,nan\n");
  CHECK(cell(0.1) == "0.1");
  CHECK(cell(std::size_t{12}) == "12");
  CHECK(cell(std::nan("")) == "nan");
}

TEST_CASE("config hash ignores key order")
{
  auto a = nlohmann::json::parse(R"({"seed": 3, "tail": {"bound": "cor32", "replicates": 10}})");
  auto b = nlohmann::json::parse(R"({"tail": {"replicates": 10, "bound": "cor32"}, "seed": 3})");
  auto c = nlohmann::json::parse(R"({"tail": {"replicates": 11, "bound": "cor32"}, "seed": 3})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(canonical_json(a) == canonical_json(b));
  CHECK(hash_hex(config_hash(a)).size() == 16);
  // FNV-1a 64 of the empty object "{}"
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : std::string("{}")) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  CHECK(config_hash(nlohmann::json::object()) == h);
}

TEST_CASE("metadata round trip")
{
  ReportTable t{kSchemaRate, {"x", "y"}, {{"1", "2"}, {"3", "4"}, {"5", "6"}}};
  Provenance p{kSchemaRate, 0x1234567890abcdefULL, 99};
  auto m = make_metadata("rate", t, p, {{"fraction_decreasing", 0.8}});
  CHECK(m.rows == 3);
  CHECK(m.tool_version == kToolVersion);
  auto back = report_metadata_from_json(nlohmann::json::parse(to_json(m).dump()));
  CHECK(back == m);
  auto bad = to_json(m);
  bad["extra"] = 1;
  CHECK_THROWS(report_metadata_from_json(bad));
}

TEST_CASE("gnuplot script and file writing")
{
  auto gp = gnuplot_script("rate.csv", 4, 10, "effective size", "median sup error");
  CHECK(gp.find("'rate.csv' every ::1 using 4:10") != std::string::npos);
  CHECK(gp.find("set logscale xy") != std::string::npos);
  CHECK(gp.find("missing 'underflow'") != std::string::npos);

  auto dir = std::filesystem::temp_directory_path() / "fkr_test_experiments";
  std::filesystem::create_directories(dir);
  write_text_file(dir / "a.txt", "x\ny\n");
  std::ifstream in(dir / "a.txt", std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "x\ny\n");
  CHECK_THROWS_AS(write_text_file(dir / "missing" / "b.txt", "z"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("mixing mode names")
{
  CHECK(mixing_mode_from_string("alpha") == MixingMode::alpha);
  CHECK(mixing_mode_from_string(to_string(MixingMode::weak)) == MixingMode::weak);
  CHECK_THROWS_AS(mixing_mode_from_string("beta"), std::invalid_argument);
}
