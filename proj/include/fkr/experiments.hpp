#pragma once

#include "fkr/concentration.hpp"
#include "fkr/covering.hpp"
#include "fkr/fields.hpp"
#include "fkr/regression.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fkr {

// ---------------------------------------------------------------- tail ladders

struct TailLadderSpec
{
  TailRecipe recipe;
  BoundKind bound = BoundKind::cor32;
  std::vector<LatticeCube> ladder;
  std::vector<double> eps_grid;
  std::size_t replicates = 2000;
  std::uint64_t seed = 1;
  double c_prime = 1.0;
  std::optional<double> B;      // default: almost-sure summand bound
  std::optional<double> gamma;  // default: certificate tail exponent
  std::optional<double> norm_g; // default: kernel pseudo-norm L_K / h
  double p_min = 1e-3;          // dominance is checked where P_hat > p_min
  std::size_t fit_rung = 0;
  unsigned threads = 0;
};

struct DominanceRow
{
  std::size_t rung = 0;
  double eps = 0.0;
  double p_hat = 0.0;
  double upper = 0.0;
  double bound = 0.0;
  bool dominated = false;
};

struct TailLadderResult
{
  TailReport report;
  BoundSpec fitted;
  DependenceCertificate cert;
  std::vector<DominanceRow> rows; // held-out rungs, cells with P_hat > p_min
  bool dominance = false;
  std::vector<std::optional<LinearFit>> rung_slopes;
  std::optional<LinearFit> pooled_slope;
  double B = 0.0;
};

class CertificateMismatch : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// Almost-sure bound of a single summand for the recipe's statistic.
double summand_bound(const TailRecipe& recipe, std::size_t N);

// Validates certificates, estimates tails, fits (A1, A2) on the fit rung and
// checks that the fitted bound dominates the upper Wilson limit elsewhere.
TailLadderResult run_tail_ladder(const TailLadderSpec& spec);

// A2 from least squares of log(P_hat / bracket) on the exponent argument over
// cells with 0 < P_hat < 1; A1 as the smallest constant for which the bound
// covers every upper Wilson limit with P_hat > p_min on that rung.
BoundSpec fit_bound(const TailReport& report, BoundSpec shape, std::size_t rung, double p_min);

// --------------------------------------------------------- log-Laplace ladders

struct LaplaceLadderSpec
{
  TailRecipe recipe;
  std::vector<LatticeCube> ladder;
  std::vector<double> beta_fractions{0.25, 0.5, 0.75, 1.0}; // of the admissible maximum
  std::size_t replicates = 2000;
  std::uint64_t seed = 1;
  double c_prime = 1.0;
  double A2 = 1.0;
  std::size_t fit_rung = 0;
  double jackknife_z = 2.0;
  unsigned threads = 0;
};

struct LaplaceLadderResult
{
  std::vector<LaplaceReport> rungs;
  double B = 0.0;
  double c1 = 0.0;
  double A1 = 0.0;
  double A2 = 0.0;
  bool dominance = false;
  bool zero_at_zero = false;
};

LaplaceLadderResult run_laplace_ladder(const LaplaceLadderSpec& spec);

// ---------------------------------------------------------------- rate ladders

enum class MixingMode { alpha, weak };
std::string to_string(MixingMode m);
MixingMode mixing_mode_from_string(const std::string& s);

struct RateLadderSpec
{
  GeneratorSpec gen;
  PsiSpec psi;
  double noise_scale = 0.5;
  std::vector<LatticeCube> ladder;
  double R = 0.5;
  double R_log_power = 0.0; // R_n = R (log |I_n|)^power; 0 keeps R constant
  double h0 = 0.001;        // h_n = h0 (log |I_n|)^a |I_n|^{-b/N}
  double h_log_power = 4.0;
  double h_power = 0.1;
  KernelSpec kernel;
  PseudoMetricSpec metric = PseudoMetricSpec::projection(2);
  double min_denominator = 1e-8;
  std::size_t seeds_per_batch = 20;
  std::size_t batches = 5;
  std::size_t smallball_replicates = 4000;
  std::size_t max_centers = 200'000;
  std::uint64_t seed = 1;
  double c_prime = 1.0;
  unsigned threads = 0;
};

double schedule_delta(MixingMode mode, const LatticeCube& cube, std::size_t d);
double schedule_h(const RateLadderSpec& s, const LatticeCube& cube);
double schedule_R(const RateLadderSpec& s, const LatticeCube& cube);

struct RateRung
{
  LatticeCube cube{{1}};
  double delta = 0.0;
  double h = 0.0;
  double R = 0.0;
  std::size_t centers = 0;
  double inf_F = 0.0;
  std::vector<double> sup_errors;        // batch-major; NaN where every centre underflowed
  std::vector<double> underflow_fraction; // per seed
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double mean_underflow = 0.0;
  // unit-constant rate terms
  double ratio1 = 0.0;  // R^{5d/2} (log|I|)^7 / (|I|^{1/N * 2/(5d+2)} inf F)
  double ratio2 = 0.0;  // R^r / (|I|^{1/N * 2/(5d+2)} h)
  double bias_term = 0.0; // h^r
  double ratio_weak = 0.0; // R^{4d} (log|I|)^8 / (|I|^{1/N * 1/(4d+1)} inf F^2 h)
};

struct RateReport
{
  MixingMode mode = MixingMode::alpha;
  std::vector<RateRung> rungs;
  std::vector<bool> batch_decreasing;
  double fraction_decreasing = 0.0;
  std::optional<LinearFit> loglog; // log sup_error median vs log |I|^{1/N}, rungs with < 5% underflow
  bool ratios_decreasing = false;  // both alpha-mode ratio conditions strictly decrease
};

RateReport run_rate_ladder(const RateLadderSpec& spec, MixingMode mode);

} // namespace fkr
