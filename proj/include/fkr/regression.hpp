#pragma once

#include "fkr/covering.hpp"
#include "fkr/fields.hpp"
#include "fkr/hilbert.hpp"

#include <functional>
#include <json.hpp>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fkr {

enum class KernelKind { quadratic, triangle_zero, indicator };
std::string to_string(KernelKind k);
KernelKind kernel_kind_from_string(const std::string& s);

struct KernelSpec
{
  KernelKind kind = KernelKind::quadratic;

  double operator()(double u) const;
  double derivative(double u) const; // on [0, 1]
  double lipschitz_const() const;     // max |K'| on [0, 1]
  double k_at_one() const;
  bool vanishes_at_one() const { return k_at_one() == 0.0; }
  bool operator==(const KernelSpec&) const = default;
};

double kernel_eval(const KernelSpec& k, double u);

class NotLipschitz : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// Lipschitz constant of x -> K(d(x, .)/h) with respect to d: L_K / h.
double kernel_pseudo_norm(const KernelSpec& k, double h, const PseudoMetricSpec& metric);

struct EstimatorConfig
{
  KernelSpec kernel;
  double h = 0.5;
  PseudoMetricSpec metric;
  double min_denominator = 1e-8;
};

void validate(const EstimatorConfig& c);

class MissingSmallBall : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DenominatorUnderflow : public std::runtime_error
{
public:
  explicit DenominatorUnderflow(double f_hat);
  double f_hat() const { return f_hat_; }

private:
  double f_hat_;
};

// f_hat = (|I| F)^{-1} sum_s K(d(X_s, x)/h); F is the plugin value F_x(h).
double f_hat(const EstimatorConfig& c, const FieldSample& s, std::span<const double> x, double F);
FunctionalElement g_hat(const EstimatorConfig& c, const FieldSample& s, std::span<const double> x, double F);
FunctionalElement psi_hat(const EstimatorConfig& c, const FieldSample& s, std::span<const double> x, double F);

struct PointEstimate
{
  double f = 0.0;
  FunctionalElement g;
  FunctionalElement psi; // empty when underflow
  bool underflow = false;
};

// f_hat, g_hat and Psi_hat from one pass over the sample. Underflow is reported,
// not thrown.
PointEstimate estimate_at(const EstimatorConfig& c, const FieldSample& s, std::span<const double> x, double F);

// Fraction of sample sites within distance h of x (flagged in-sample use).
double in_sample_small_ball(const FieldSample& s, std::span<const double> x, double h,
                            const PseudoMetricSpec& metric);

struct SmallBallTable
{
  FunctionalElement x;
  std::vector<double> h_grid;
  std::vector<double> F_hat;
  std::vector<bool> zero_flag;
  std::size_t replicates = 0;
  bool in_sample = false;
  std::vector<double> u_grid;
  std::vector<std::vector<double>> tau_hat; // tau_hat[h index][u index], NaN where F_hat(h) = 0
  std::vector<double> sorted_distances;

  // Empirical F at an arbitrary radius (closed ball).
  double at(double h) const;
};

// Independent draws of X_s from the generator's stationary marginal, flat
// (count x j_max). Draw r is site e_N of replicate r under a derived seed.
std::vector<double> draw_marginal(const GeneratorSpec& spec, std::size_t N, std::size_t count,
                                  std::uint64_t seed, unsigned threads = 0);

SmallBallTable estimate_small_ball(const FunctionalElement& x, const std::vector<double>& h_grid,
                                   const GeneratorSpec& spec, std::size_t N,
                                   const PseudoMetricSpec& metric, std::size_t replicates,
                                   std::uint64_t seed, unsigned threads = 0);

SmallBallTable small_ball_from_draws(const FunctionalElement& x, const std::vector<double>& h_grid,
                                     std::span<const double> draws, std::size_t J,
                                     const PseudoMetricSpec& metric);

// Exact F_x(h) when the coordinates entering d are independent centred
// Gaussians with standard deviations sd[0..J-1]; supports J = 1 and J = 2.
double gaussian_small_ball(std::span<const double> x, std::span<const double> sd, double h);

// Coordinate standard deviations of a generator with Gaussian marginals;
// throws for generators whose marginals are not Gaussian.
std::vector<double> gaussian_marginal_sd(const GeneratorSpec& spec);

struct MxResult
{
  double value = 0.0;
  double error_estimate = 0.0;
  bool positive = false;
};

// K(1) - int_0^1 K'(u) tau(u) du by adaptive Gauss-Kronrod quadrature.
MxResult m_x(const KernelSpec& k, const std::function<double(double)>& tau);

struct CenterError
{
  double f = 0.0;
  double error = 0.0; // ||Psi_hat - Psi||, NaN on underflow
  bool underflow = false;
  bool no_small_ball = false; // F_v(h) = 0; counted as underflow
};

struct SupErrorReport
{
  double sup_error = 0.0;
  std::vector<CenterError> centers;
  std::size_t underflow_count = 0;
  double underflow_fraction = 0.0;
};

class AllCentersUnderflow : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// max over covering centres of ||Psi_hat(v) - Psi(v)||_H with F_v(h) taken
// from small_ball[v].
SupErrorReport sup_error(const EstimatorConfig& c, const FieldSample& s, const Covering& cov,
                         const PsiSpec& psi, std::span<const double> small_ball, unsigned threads = 0);

nlohmann::json to_json(const EstimatorConfig& c);
EstimatorConfig estimator_config_from_json(const nlohmann::json& j);

} // namespace fkr
