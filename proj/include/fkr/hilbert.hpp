#pragma once

#include <cstddef>
#include <functional>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

namespace fkr {

enum class BasisFamily { fourier, legendre };
enum class MeasureKind { lebesgue, probability }; // probability: uniform density 1/|D|

struct BasisSpec
{
  std::vector<double> lo{0.0};
  std::vector<double> hi{1.0};
  MeasureKind measure = MeasureKind::lebesgue;
  BasisFamily family = BasisFamily::legendre;
  std::size_t j_max = 8;

  std::size_t dim() const { return lo.size(); }
  bool operator==(const BasisSpec&) const = default;
};

std::string to_string(BasisFamily f);
std::string to_string(MeasureKind m);
BasisFamily basis_family_from_string(const std::string& s);
MeasureKind measure_from_string(const std::string& s);
nlohmann::json to_json(const BasisSpec& b);
BasisSpec basis_spec_from_json(const nlohmann::json& j);

// Element of the truncated space, stored as coordinates <x, e_j>.
struct FunctionalElement
{
  std::vector<double> coeffs;

  FunctionalElement() = default;
  explicit FunctionalElement(std::size_t n) : coeffs(n, 0.0) {}
  explicit FunctionalElement(std::vector<double> c) : coeffs(std::move(c)) {}
  std::size_t size() const { return coeffs.size(); }
  bool operator==(const FunctionalElement&) const = default;
};

// Tensor-product orthonormal basis on a box. e_j(u) = scale * prod_k phi_{m_jk}(u_k),
// where phi are orthonormal in L2 of each interval under Lebesgue measure.
// Basis functions are ordered by total degree, then lexicographically.
class Basis
{
public:
  // Throws std::runtime_error if the quadrature Gram matrix deviates from the
  // identity by more than 1e-10.
  explicit Basis(BasisSpec spec);

  const BasisSpec& spec() const { return spec_; }
  std::size_t size() const { return spec_.j_max; }
  std::size_t dim() const { return spec_.dim(); }
  double measure_total() const { return nu_total_; } // nu(D)
  double lebesgue_volume() const { return volume_; }
  double density() const { return density_; }
  double scale() const { return scale_; }
  const std::vector<std::size_t>& multi_index(std::size_t j) const { return index_[j]; }
  double gram_error() const { return gram_error_; }

  // One-dimensional factor m along axis k, orthonormal in L2((lo_k, hi_k), dt).
  double univariate(std::size_t axis, std::size_t m, double t) const;
  double eval(std::size_t j, std::span<const double> u) const;
  double eval(const FunctionalElement& x, std::span<const double> u) const;

  // <f, e_j> computed by tensor Gauss-Legendre quadrature.
  FunctionalElement project(const std::function<double(std::span<const double>)>& f,
                            std::size_t panels = 16) const;

  // Projection of a piecewise-multilinear function that interpolates `values`
  // on a regular grid with nodes_per_axis[k] nodes (>= 2) along axis k.
  // values are in lexicographic node order, last axis fastest.
  FunctionalElement project_grid_function(const std::vector<std::size_t>& nodes_per_axis,
                                          std::span<const double> values) const;

  // Per-axis matrix of integrals of node hat functions against phi_m:
  // result[i * n_m + m] with n_m = max univariate order + 1 along that axis.
  std::vector<double> hat_integrals(std::size_t axis, std::size_t nodes) const;
  std::size_t univariate_count(std::size_t axis) const { return max_order_[axis] + 1; }

private:
  BasisSpec spec_;
  std::vector<std::vector<std::size_t>> index_;
  std::vector<std::size_t> max_order_;
  double volume_ = 1.0;
  double nu_total_ = 1.0;
  double density_ = 1.0;
  double scale_ = 1.0;
  double gram_error_ = 0.0;
};

void check_same_basis(const FunctionalElement& x, const FunctionalElement& y);
double inner(const FunctionalElement& x, const FunctionalElement& y);
double h_norm(const FunctionalElement& x);
FunctionalElement operator+(const FunctionalElement& x, const FunctionalElement& y);
FunctionalElement operator-(const FunctionalElement& x, const FunctionalElement& y);
FunctionalElement operator*(double a, const FunctionalElement& x);

struct C0NormResult
{
  double sup = 0.0;
  double lipschitz = 0.0;
  double value = 0.0; // sup + lipschitz
  std::size_t resolution = 0;
};

// Grid approximation of sup|x| + Lipschitz seminorm, using all point pairs of a
// regular grid with `resolution` points per axis (endpoints included).
C0NormResult one_norm_c0(const Basis& basis, const FunctionalElement& x, std::size_t resolution = 64);

struct PseudoMetricSpec
{
  enum class Kind { projection, full };
  Kind kind = Kind::full;
  std::size_t J = 0;

  static PseudoMetricSpec projection(std::size_t J) { return {Kind::projection, J}; }
  static PseudoMetricSpec full() { return {Kind::full, 0}; }
  bool operator==(const PseudoMetricSpec&) const = default;
};

nlohmann::json to_json(const PseudoMetricSpec& m);
PseudoMetricSpec pseudo_metric_from_json(const nlohmann::json& j);

double pseudo_dist(const PseudoMetricSpec& spec, std::span<const double> x, std::span<const double> y);
double pseudo_dist(const PseudoMetricSpec& spec, const FunctionalElement& x, const FunctionalElement& y);

} // namespace fkr
