#pragma once

#include "fkr/hilbert.hpp"
#include "fkr/lattice.hpp"

#include <cstdint>
#include <json.hpp>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fkr {

enum class GeneratorKind { functional_ma, gauss_exp, bernoulli_ar1 };
enum class InnovationKind { truncated_gaussian, gaussian };

std::string to_string(GeneratorKind k);
std::string to_string(InnovationKind k);
GeneratorKind generator_kind_from_string(const std::string& s);
InnovationKind innovation_kind_from_string(const std::string& s);

struct GeneratorSpec
{
  GeneratorKind kind = GeneratorKind::functional_ma;
  std::size_t q = 1;   // functional_ma range
  double rho = 0.5;    // gauss_exp lag-one correlation per axis
  BasisSpec basis;
  double d0 = 1.0;     // E<X, e_j>^2 <= d0 exp(-d1 j), j = 1, 2, ...
  double d1 = 1.0;
  InnovationKind innovation = InnovationKind::truncated_gaussian;
  double truncation = 3.0; // |innovation| <= truncation for truncated_gaussian
  std::uint64_t seed = 1;

  bool operator==(const GeneratorSpec&) const = default;
};

nlohmann::json to_json(const GeneratorSpec& g);
GeneratorSpec generator_spec_from_json(const nlohmann::json& j);

// sqrt(d0) exp(-d1 j / 2) for the 1-based coefficient index j.
double coefficient_scale(const GeneratorSpec& g, std::size_t j_one_based);

// a_t = exp(-|t|_inf) / Z on t in {0..q}^N with sum a_t^2 = 1, lexicographic order.
std::vector<double> ma_weights(std::size_t q, std::size_t N);

enum class PsiKind { zero, linear_diag, nonlinear_lipschitz };
std::string to_string(PsiKind k);
PsiKind psi_kind_from_string(const std::string& s);

// Regression operator acting coordinate-wise on basis coefficients.
//   linear_diag:         Psi(x)_j = lambda_j x_j
//   nonlinear_lipschitz: Psi(x)_j = a_j sgn(sin x_j) |sin x_j|^r
// Coordinates beyond the parameter vector map to 0.
struct PsiSpec
{
  PsiKind kind = PsiKind::zero;
  std::vector<double> params; // lambda_j or a_j
  double r = 1.0;             // Hoelder order

  // L_Psi with ||Psi(x) - Psi(y)|| <= L_Psi ||x - y||^r.
  double holder_const() const;
  double order() const { return kind == PsiKind::nonlinear_lipschitz ? r : 1.0; }
  void apply(std::span<const double> x, std::span<double> out) const;
  FunctionalElement apply(const FunctionalElement& x) const;
  bool operator==(const PsiSpec&) const = default;
};

nlohmann::json to_json(const PsiSpec& p);
PsiSpec psi_spec_from_json(const nlohmann::json& j);

enum class AlphaStatus { certified, not_mixing, unverified, user_supplied };
std::string to_string(AlphaStatus s);

struct DependenceCertificate
{
  std::string applies_to;
  AlphaStatus alpha_status = AlphaStatus::unverified;
  double c0 = 0.0; // alpha(k) <= c0 exp(-c1 k)
  double c1 = 0.0;
  std::optional<std::size_t> range; // alpha(k) = 0 for k > range
  std::string alpha_note;

  bool phi_certified = false;
  double phi_sum_bound = 0.0;   // bound on sum_{i>=1} phi_C(i)
  double phi_y_bound = 0.0;     // bound on sum_{i>=1} phi_{C,y}(i)
  std::string phi_note;

  bool tail_certified = false;  // P(||Y|| >= z) <= kappa0 exp(-kappa1 z^gamma)
  double kappa0 = 0.0;
  double kappa1 = 0.0;
  double gamma = 0.0;
  double bound_x = 0.0;         // almost-sure bound on ||X|| (0 if unbounded)
  double bound_y = 0.0;         // almost-sure bound on ||Y|| (0 if unbounded)
  std::string tail_note;

  double alpha_bound(std::size_t k) const;
};

nlohmann::json to_json(const DependenceCertificate& c);
DependenceCertificate certificate_from_json(const nlohmann::json& j);

// Dependence and tail certificate for a generator on an N-dimensional lattice.
DependenceCertificate certificate(const GeneratorSpec& spec, std::size_t N,
                                  const PsiSpec& psi = {}, double noise_scale = 0.0);

struct FieldSample
{
  LatticeCube cube{{1}};
  std::size_t J = 0;
  std::vector<double> X; // site-major, J coefficients per site
  std::vector<double> Y;
  GeneratorSpec spec;
  PsiSpec psi;
  double noise_scale = 0.0;
  std::uint64_t replicate = 0;
  DependenceCertificate cert;

  std::size_t sites() const { return cube.size(); }
  std::span<const double> x(std::size_t i) const { return {X.data() + i * J, J}; }
  std::span<const double> y(std::size_t i) const { return {Y.data() + i * J, J}; }
  FunctionalElement x_element(std::size_t i) const;
  FunctionalElement y_element(std::size_t i) const;
};

struct GenerateOptions
{
  std::uint64_t replicate = 0;
  std::size_t max_values = 50'000'000; // cap on |I_n| * j_max
  bool with_response = true;
};

// Y_s = Psi(X_s) + eps_s. All random streams are keyed by (seed, replicate,
// global site coordinates), so nested cubes share their common sites.
FieldSample generate(const GeneratorSpec& spec, const PsiSpec& psi, const LatticeCube& cube,
                     double noise_scale, const GenerateOptions& opts = {});

// X_k = (X_{k-1} + eps_k) / 2 with fair Bernoulli eps_k, X_0 uniform via 53
// random binary digits. Returns X_0 .. X_{length-1}.
std::vector<double> generate_bernoulli_ar1(std::uint64_t seed, std::size_t length);
std::vector<double> generate_bernoulli_ar1(double x0, std::span<const int> innovations);

struct AssumptionAudit
{
  std::vector<double> second_moments; // per coefficient
  double decay_slope = 0.0;           // slope of log second moment vs j
  bool decay_ok = true;

  std::vector<double> z_grid;
  std::vector<double> tail_frequency;
  std::vector<double> tail_bound;
  bool tail_ok = true;

  double holder_ratio_max = 0.0;
  double holder_const = 0.0;
  bool holder_ok = true;
  std::size_t holder_pairs = 0;
};

// Empirical checks of moment decay, exponential tail of ||Y|| and the Hoelder
// property of Psi. Never throws on a violation; flags it instead.
AssumptionAudit audit_assumptions(std::span<const FieldSample> samples, std::size_t holder_pairs = 2000);
AssumptionAudit audit_assumptions(const FieldSample& sample, std::size_t holder_pairs = 2000);

// CSV: comment header, then site coordinates, X coefficients, Y coefficients.
void write_field_csv(const FieldSample& s, std::ostream& out, const std::string& header_comment);
nlohmann::json field_sidecar(const FieldSample& s);
// Reads a field written by write_field_csv (plus optional sidecar). Certificates
// of imported fields are marked user-supplied.
FieldSample read_field_csv(std::istream& in, const nlohmann::json* sidecar = nullptr);

} // namespace fkr
