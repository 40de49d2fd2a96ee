#pragma once

#include "fkr/fields.hpp"
#include "fkr/lattice.hpp"
#include "fkr/regression.hpp"
#include "fkr/stats.hpp"

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fkr {

enum class BoundKind { cor32, thm33_general, thm33_gamma1, prop41, thm42_general, thm42_gamma1, prop31_laplace };
std::string to_string(BoundKind b);
BoundKind bound_kind_from_string(const std::string& s);
// Real-valued bounds pair with real sums, Hilbert bounds with Hilbert sums.
bool is_hilbert_bound(BoundKind b);
bool needs_alpha_certificate(BoundKind b);

struct BoundSpec
{
  BoundKind which = BoundKind::cor32;
  double A1 = 1.0;
  double A2 = 1.0;
  std::optional<double> B;      // almost-sure bound of the summands
  std::optional<double> gamma;  // tail exponent
  std::optional<double> norm_g; // pseudo-norm of the test function
};

// |I_n|^{1/N} / (log |I_n|)^2
double rate_functional(const LatticeCube& cube);

// Bound value at eps (for prop31_laplace the argument is beta). Never clipped.
double bound_eval(const BoundSpec& spec, double eps, const LatticeCube& cube);

// Every form except prop31_laplace factors as A1 * bracket * exp(-A2 * argument).
struct BoundShape
{
  double bracket = 1.0;
  double argument = 0.0;
};
BoundShape bound_shape(const BoundSpec& spec, double eps, const LatticeCube& cube);

enum class SummandKind { generator, iid_rademacher, iid_bernoulli };
enum class TailStatistic { real_sum, hilbert_norm_sum, kernel_weighted_sum };
std::string to_string(TailStatistic s);
TailStatistic tail_statistic_from_string(const std::string& s);

struct TailRecipe
{
  SummandKind summands = SummandKind::generator;
  double bernoulli_p = 0.5;   // iid_bernoulli: centred B(1, p) summands
  GeneratorSpec gen;
  PsiSpec psi;
  double noise_scale = 0.0;
  TailStatistic statistic = TailStatistic::real_sum;
  std::size_t coefficient = 0; // real_sum on generator fields: <X_s, e_{coefficient+1}>
  // kernel_weighted_sum: S = sum_s Y_s K_h(d(X_s, x)), centred by its Monte Carlo mean
  EstimatorConfig estimator;
  FunctionalElement point;
};

struct TailCell
{
  std::size_t rung = 0;
  double eps = 0.0;
  std::size_t hits = 0;
  std::size_t replicates = 0;
  double p_hat = 0.0;
  Interval ci;
  double bound = std::nan("");
};

struct TailReport
{
  std::string statistic;
  std::vector<LatticeCube> ladder;
  std::vector<double> eps_grid;
  std::size_t replicates = 0;
  std::vector<TailCell> cells; // rung-major, eps-minor
  std::vector<std::vector<double>> values; // per rung: |I|^{-1} |S| (or norm) per replicate

  const TailCell& cell(std::size_t rung, std::size_t e) const { return cells[rung * eps_grid.size() + e]; }
};

// Monte Carlo estimate of P(|I_n|^{-1} |S_n| >= eps) along a cube ladder.
TailReport empirical_tail(const TailRecipe& recipe, const std::vector<double>& eps_grid,
                          const std::vector<LatticeCube>& ladder, std::size_t replicates,
                          std::uint64_t seed, unsigned threads = 0);

// Checks a bound family against a statistic; throws std::invalid_argument on mismatch.
void check_statistic_matches(TailStatistic s, BoundKind b);

// Attaches bound values to every cell.
void attach_bound(TailReport& report, const BoundSpec& spec);

// Least squares of log P_hat against eps * R(n) / B over cells with 0 < P_hat < 1.
// rung = nullopt pools all rungs.
LinearFit slope_diagnostic(const TailReport& report, double B, std::optional<std::size_t> rung = std::nullopt);

struct BetaRegion
{
  double c_tilde = 0.0;
  double left = 0.0;   // C~ / |I|^{N/(N+1)} v 1/|I|
  double right = 0.0;  // (C' C~^{(N+1)/N^2} / 2^{N+3})^{N^2/(N+1)} ^ (c1 C' / 2^{N+2}) / |I|^{(N-1)/N}
  double beta_b_max = 0.0; // left v right
  bool edge_condition = false; // min n_i >= 2^{N+1}
  bool aspect_condition = false;
};

BetaRegion prop31_region(const LatticeCube& cube, double c_prime, double c1);
// Throws std::invalid_argument naming the violated condition.
void check_beta_admissible(double beta, double B, const LatticeCube& cube, double c_prime, double c1);

struct LaplaceEstimate
{
  double beta = 0.0;
  double log_laplace = 0.0;
  double jackknife_se = 0.0;
  double rhs = std::nan("");
};

// log mean exp(beta * x_r) (numerically stable), with jackknife standard error.
LaplaceEstimate log_mean_exp(std::span<const double> x, double beta);

struct LaplaceReport
{
  LatticeCube cube{{1}};
  double B = 0.0;
  BetaRegion region;
  std::vector<LaplaceEstimate> estimates;
  std::vector<double> sums; // S_n per replicate
};

LaplaceReport empirical_log_laplace(const TailRecipe& recipe, const std::vector<double>& beta_grid,
                                    const LatticeCube& cube, std::size_t replicates, std::uint64_t seed,
                                    double B, double c_prime, double c1, unsigned threads = 0,
                                    bool check_region = true);

// Sum of the three terms on the right-hand side of the log-Laplace bound.
double prop31_rhs(double A1, double A2, double beta, double B, const LatticeCube& cube);

struct DiscreteJoint
{
  std::vector<std::vector<double>> support; // non-negative values per variable
  std::vector<double> prob;                  // lexicographic over supports, last variable fastest
};

struct IbragimovResult
{
  double lhs = 0.0;
  double alpha = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// alpha is the largest |P(A n B) - P(A)P(B)| over all splits {1..j} | {j+1..k}
// and all events of the two generated sigma-algebras, found by exhaustive search.
IbragimovResult ibragimov_check(const DiscreteJoint& joint);
double split_alpha(const DiscreteJoint& joint, std::size_t j);

nlohmann::json to_json(const TailReport& r);

} // namespace fkr
