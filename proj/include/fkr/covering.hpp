#pragma once

#include "fkr/hilbert.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fkr {

// G(R): continuous functions with sup|x| + Lip(x) <= R.
struct LipschitzBall
{
  double R = 1.0;
};

class CoveringTooLarge : public std::runtime_error
{
public:
  CoveringTooLarge(double estimate, std::size_t cap);
  double estimate() const { return estimate_; }

private:
  double estimate_;
};

struct CoveringOptions
{
  std::size_t max_centers = 1'000'000;
  unsigned threads = 0;
};

// Centres are projections of piecewise-multilinear interpolants of quantised
// node values. With value quantum q = delta / (2 sqrt(nu(D))) and mesh width
// at most delta / (2 R sqrt(nu(D)) sqrt(d)) every member of G(R) lies within
// 3q/2 of some interpolant in sup norm, hence within 3 delta / 4 in H.
struct Covering
{
  double delta = 0.0;
  double R = 0.0;
  std::size_t coeff_count = 0;
  std::vector<double> flat; // centre i occupies [i*coeff_count, (i+1)*coeff_count)

  // grid description (empty for the degenerate single-centre covering)
  std::vector<std::size_t> nodes_per_axis;
  double quantum = 0.0;
  std::int64_t level_min = 0;
  std::int64_t level_max = 0;

  double claimed_bound = 0.0; // log(levels) + (nodes - 1) log 3, an upper bound on log #centres
  double lemma_scale = 0.0;   // lambda(D^1) (sqrt(nu(D)) R / delta)^d

  std::size_t size() const { return coeff_count == 0 ? 0 : flat.size() / coeff_count; }
  std::span<const double> center(std::size_t i) const
  {
    return {flat.data() + i * coeff_count, coeff_count};
  }
  FunctionalElement center_element(std::size_t i) const;
  // log(#centres) / lemma_scale: the explicit constant of this construction.
  double explicit_constant() const;
};

// Exact number of admissible level sequences for the one-dimensional
// construction, or the upper bound levels * 3^(nodes-1) in higher dimension.
double covering_count_estimate(const LipschitzBall& ball, double delta, const Basis& basis);

Covering build_covering(const LipschitzBall& ball, double delta, const Basis& basis,
                        const CoveringOptions& opts = {});

struct GridFunction
{
  std::vector<std::size_t> nodes_per_axis;
  std::vector<double> values;
};

// sup and an upper bound on the Lipschitz constant of the multilinear
// interpolant (exact in dimension 1).
double grid_function_sup(const GridFunction& g);
double grid_function_lipschitz(const GridFunction& g, const BasisSpec& domain);

// Random piecewise-multilinear member of G(R) (norm at most R).
GridFunction random_ball_member(const LipschitzBall& ball, const BasisSpec& domain, std::uint64_t key);

struct CoverageAudit
{
  std::size_t probes = 0;
  std::size_t covered = 0;
  double max_distance = 0.0;
};

// Brute-force nearest-centre distance for random probes from G(R).
CoverageAudit audit_covering(const Covering& cov, const Basis& basis, std::size_t probes,
                             std::uint64_t seed, unsigned threads = 0);

} // namespace fkr
