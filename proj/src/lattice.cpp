#include "fkr/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fkr {

LatticeCube::LatticeCube(std::vector<std::int64_t> n) : n_(std::move(n))
{
  if (n_.empty())
    throw std::invalid_argument("lattice cube needs at least one axis");
  for (auto e : n_) {
    if (e < 1)
      throw std::invalid_argument("lattice edge lengths must be >= 1");
    size_ *= static_cast<std::size_t>(e);
  }
}

Site LatticeCube::site(std::size_t index) const
{
  if (index >= size_)
    throw std::out_of_range("site index out of range");
  Site s(n_.size());
  for (std::size_t k = n_.size(); k-- > 0;) {
    const auto e = static_cast<std::size_t>(n_[k]);
    s[k] = static_cast<std::int64_t>(index % e) + 1;
    index /= e;
  }
  return s;
}

std::size_t LatticeCube::index_of(const Site& s) const
{
  if (s.size() != n_.size())
    throw std::invalid_argument("site dimension mismatch");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < n_.size(); ++k) {
    if (s[k] < 1 || s[k] > n_[k])
      throw std::out_of_range("site outside cube");
    idx = idx * static_cast<std::size_t>(n_[k]) + static_cast<std::size_t>(s[k] - 1);
  }
  return idx;
}

std::vector<Site> LatticeCube::sites() const
{
  std::vector<Site> out;
  out.reserve(size_);
  Site s(n_.size(), 1);
  for (std::size_t i = 0; i < size_; ++i) {
    out.push_back(s);
    for (std::size_t k = n_.size(); k-- > 0;) {
      if (++s[k] <= n_[k])
        break;
      s[k] = 1;
    }
  }
  return out;
}

std::int64_t LatticeCube::min_edge() const { return *std::min_element(n_.begin(), n_.end()); }
std::int64_t LatticeCube::max_edge() const { return *std::max_element(n_.begin(), n_.end()); }

LatticeCube square_cube(std::size_t N, std::int64_t k)
{
  return LatticeCube(std::vector<std::int64_t>(N, k));
}

AspectRatioCert check_aspect_ratio(const LatticeCube& cube, double c_prime)
{
  if (!(c_prime > 0.0) || c_prime > 1.0)
    throw std::invalid_argument("c_prime must lie in (0, 1]");
  AspectRatioCert cert;
  cert.c_prime = c_prime;
  cert.min_edge = cube.min_edge();
  cert.max_edge = cube.max_edge();
  cert.satisfied = static_cast<double>(cert.min_edge) >= c_prime * static_cast<double>(cert.max_edge);
  return cert;
}

double effective_sample_size(const LatticeCube& cube)
{
  if (cube.dim() == 1)
    return static_cast<double>(cube.size());
  return std::pow(static_cast<double>(cube.size()), 1.0 / static_cast<double>(cube.dim()));
}

double Box::volume() const
{
  double v = 1.0;
  for (std::size_t k = 0; k < lo.size(); ++k)
    v *= hi[k] - lo[k];
  return v;
}

bool Box::contains(const Box& other, double tol) const
{
  for (std::size_t k = 0; k < lo.size(); ++k)
    if (other.lo[k] < lo[k] - tol || other.hi[k] > hi[k] + tol)
      return false;
  return true;
}

double box_distance(const Box& a, const Box& b)
{
  double d = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    const double gap = std::max(a.lo[k] - b.hi[k], b.lo[k] - a.hi[k]);
    d = std::max(d, gap);
  }
  return d;
}

double overlap_volume(const Box& a, const Box& b)
{
  double v = 1.0;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    const double w = std::min(a.hi[k], b.hi[k]) - std::max(a.lo[k], b.lo[k]);
    if (w <= 0.0)
      return 0.0;
    v *= w;
  }
  return v;
}

namespace {

void check_extent(const std::vector<double>& A)
{
  if (A.empty())
    throw std::invalid_argument("extent needs at least one axis");
  for (double a : A)
    if (!(a > 0.0) || !std::isfinite(a))
      throw std::invalid_argument("extent components must be positive and finite");
}

// Intervals of one parity along a single axis. Consecutive boundaries are
// nudged upwards until their floating-point difference is at least P, so the
// gap between two same-parity intervals is >= P exactly, not just up to rounding.
std::vector<std::pair<double, double>> axis_intervals(double A, double P, int parity)
{
  std::vector<double> bounds{0.0};
  while (bounds.back() < A) {
    const double prev = bounds.back();
    double next = prev + P;
    while (next - prev < P)
      next = std::nextafter(next, std::numeric_limits<double>::infinity());
    bounds.push_back(std::min(next, A));
  }
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = static_cast<std::size_t>(parity); k + 1 < bounds.size(); k += 2)
    out.emplace_back(bounds[k], bounds[k + 1]);
  return out;
}

} // namespace

std::vector<BlockCover> block_cover(const std::vector<double>& A, const std::vector<double>& P)
{
  check_extent(A);
  if (P.size() != A.size())
    throw std::invalid_argument("block edge and extent dimensions differ");
  for (std::size_t k = 0; k < A.size(); ++k)
    if (!(P[k] > 0.0) || P[k] > A[k] / 2.0)
      throw std::invalid_argument("block edge P_" + std::to_string(k + 1) +
                                  " must satisfy 0 < P_k <= A_k/2");

  const std::size_t N = A.size();
  std::vector<BlockCover> classes;
  classes.reserve(std::size_t{1} << N);
  for (std::size_t u = 0; u < (std::size_t{1} << N); ++u) {
    std::vector<std::vector<std::pair<double, double>>> per_axis(N);
    for (std::size_t k = 0; k < N; ++k)
      per_axis[k] = axis_intervals(A[k], P[k], static_cast<int>((u >> k) & 1U));

    BlockCover cover;
    cover.block_edge = P;
    cover.parity_class = u;
    std::vector<std::size_t> idx(N, 0);
    bool empty = false;
    for (const auto& ax : per_axis)
      empty = empty || ax.empty();
    while (!empty) {
      Box b{std::vector<double>(N), std::vector<double>(N)};
      for (std::size_t k = 0; k < N; ++k) {
        b.lo[k] = per_axis[k][idx[k]].first;
        b.hi[k] = per_axis[k][idx[k]].second;
      }
      cover.blocks.push_back(std::move(b));
      std::size_t k = N;
      while (k-- > 0) {
        if (++idx[k] < per_axis[k].size())
          break;
        idx[k] = 0;
      }
      if (k == static_cast<std::size_t>(-1))
        break;
    }
    classes.push_back(std::move(cover));
  }
  return classes;
}

std::vector<double> default_block_edges(const std::vector<double>& A)
{
  check_extent(A);
  const double N = static_cast<double>(A.size());
  std::vector<double> P(A.size());
  for (std::size_t k = 0; k < A.size(); ++k)
    P[k] = std::pow(A[k], N / (N + 1.0));
  return P;
}

CantorPartition cantor_partition(const std::vector<double>& A, double delta, std::size_t levels,
                                 std::size_t max_cubes)
{
  check_extent(A);
  if (!(delta > 0.0) || delta > 0.5)
    throw std::invalid_argument("delta must lie in (0, 1/2]");
  if (levels < 1)
    throw std::invalid_argument("levels must be >= 1");
  const std::size_t N = A.size();
  if (N * levels >= 63 || (std::size_t{1} << (N * levels)) > max_cubes)
    throw std::length_error("Cantor partition would exceed " + std::to_string(max_cubes) + " cubes");

  CantorPartition part;
  part.level = levels;
  part.delta = delta;
  Box root{std::vector<double>(N, 0.0), A};
  std::vector<Box> current{root};
  part.outer_volume_by_level.push_back(root.volume());
  const double shrink = (1.0 - delta) / 2.0;

  for (std::size_t l = 1; l <= levels; ++l) {
    std::vector<Box> next;
    next.reserve(current.size() << N);
    for (const Box& parent : current) {
      for (std::size_t corner = 0; corner < (std::size_t{1} << N); ++corner) {
        Box child = parent;
        for (std::size_t k = 0; k < N; ++k) {
          const double e = shrink * (parent.hi[k] - parent.lo[k]);
          if ((corner >> (N - 1 - k)) & 1U)
            child.lo[k] = parent.hi[k] - e;
          else
            child.hi[k] = parent.lo[k] + e;
        }
        next.push_back(std::move(child));
      }
    }
    double vol = 0.0;
    for (const Box& b : next)
      vol += b.volume();
    part.residual_volume_by_level.push_back(part.outer_volume_by_level.back() - vol);
    part.outer_volume_by_level.push_back(vol);
    current = std::move(next);
  }
  part.outer_cubes = std::move(current);
  return part;
}

nlohmann::json to_json(const Box& b)
{
  auto arr = nlohmann::json::array();
  for (std::size_t k = 0; k < b.dim(); ++k)
    arr.push_back({b.lo[k], b.hi[k]});
  return arr;
}

nlohmann::json to_json(const CantorPartition& p)
{
  nlohmann::json j;
  j["level"] = p.level;
  j["delta"] = p.delta;
  auto boxes = nlohmann::json::array();
  for (const Box& b : p.outer_cubes)
    boxes.push_back(to_json(b));
  j["outer_cubes"] = std::move(boxes);
  j["outer_volume_by_level"] = p.outer_volume_by_level;
  j["residual_volume_by_level"] = p.residual_volume_by_level;
  return j;
}

nlohmann::json to_json(const std::vector<BlockCover>& cover)
{
  auto arr = nlohmann::json::array();
  for (const BlockCover& c : cover) {
    nlohmann::json j;
    j["parity_class"] = c.parity_class;
    j["block_edge"] = c.block_edge;
    auto boxes = nlohmann::json::array();
    for (const Box& b : c.blocks)
      boxes.push_back(to_json(b));
    j["blocks"] = std::move(boxes);
    arr.push_back(std::move(j));
  }
  return arr;
}

} // namespace fkr
