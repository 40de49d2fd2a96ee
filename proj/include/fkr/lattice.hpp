#pragma once

#include <cstddef>
#include <cstdint>
#include <json.hpp>
#include <vector>

namespace fkr {

using Site = std::vector<std::int64_t>;

// The index cube {s in Z^N : 1 <= s <= n}.
class LatticeCube
{
public:
  explicit LatticeCube(std::vector<std::int64_t> n);

  std::size_t dim() const { return n_.size(); }
  const std::vector<std::int64_t>& edges() const { return n_; }
  std::size_t size() const { return size_; }

  // Site at a lexicographic position (last coordinate varies fastest).
  Site site(std::size_t index) const;
  std::size_t index_of(const Site& s) const;
  std::vector<Site> sites() const;

  std::int64_t min_edge() const;
  std::int64_t max_edge() const;

  bool operator==(const LatticeCube&) const = default;

private:
  std::vector<std::int64_t> n_;
  std::size_t size_ = 1;
};

// Cube with all edges equal to k.
LatticeCube square_cube(std::size_t N, std::int64_t k);

struct AspectRatioCert
{
  double c_prime = 1.0;
  std::int64_t min_edge = 0;
  std::int64_t max_edge = 0;
  bool satisfied = false;
};

AspectRatioCert check_aspect_ratio(const LatticeCube& cube, double c_prime);

// |I_n|^{1/N}
double effective_sample_size(const LatticeCube& cube);

// Axis-aligned box prod_k (lo_k, hi_k].
struct Box
{
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  double volume() const;
  bool contains(const Box& other, double tol = 0.0) const;
  bool operator==(const Box&) const = default;
};

// l-infinity gap between two boxes (0 if they touch or overlap).
double box_distance(const Box& a, const Box& b);
// Volume of the intersection of the interiors.
double overlap_volume(const Box& a, const Box& b);

struct BlockCover
{
  std::vector<Box> blocks;
  std::vector<double> block_edge;
  std::size_t parity_class = 0; // 0-based, bit k = parity along axis k
};

// Alternating big/small split of (0, A] with per-axis edge P. Returns 2^N
// classes; within a class boxes are separated by at least min_k P_k.
std::vector<BlockCover> block_cover(const std::vector<double>& A, const std::vector<double>& P);

// P_k = A_k^{N/(N+1)}
std::vector<double> default_block_edges(const std::vector<double>& A);

struct CantorPartition
{
  std::size_t level = 0;
  double delta = 0.0;
  std::vector<Box> outer_cubes;
  std::vector<double> outer_volume_by_level; // index l = 0..level
  std::vector<double> residual_volume_by_level; // index l-1 = volume removed at step l
};

// Each refinement keeps the 2^N corner sub-boxes of relative edge (1-delta)/2.
// Throws std::length_error when 2^{N l} exceeds max_cubes.
CantorPartition cantor_partition(const std::vector<double>& A, double delta, std::size_t levels,
                                 std::size_t max_cubes = std::size_t{1} << 22);

nlohmann::json to_json(const Box& b);
nlohmann::json to_json(const CantorPartition& p);
nlohmann::json to_json(const std::vector<BlockCover>& cover);

} // namespace fkr
