#include "fkr/fields.hpp"

#include "fkr/stats.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fkr {

void write_field_csv(const FieldSample& s, std::ostream& out, const std::string& header_comment)
{
  out << "# " << header_comment << '\n';
  const std::size_t N = s.cube.dim();
  for (std::size_t k = 0; k < N; ++k)
    out << (k ? "," : "") << 's' << k + 1;
  for (std::size_t j = 0; j < s.J; ++j)
    out << ",x" << j + 1;
  for (std::size_t j = 0; j < s.J; ++j)
    out << ",y" << j + 1;
  out << '\n';
  for (std::size_t i = 0; i < s.sites(); ++i) {
    const Site site = s.cube.site(i);
    for (std::size_t k = 0; k < N; ++k)
      out << (k ? "," : "") << site[k];
    for (double v : s.x(i))
      out << ',' << format_double(v);
    for (double v : s.y(i))
      out << ',' << format_double(v);
    out << '\n';
  }
}

nlohmann::json field_sidecar(const FieldSample& s)
{
  return {{"cube", s.cube.edges()},
          {"J", s.J},
          {"generator", to_json(s.spec)},
          {"psi", to_json(s.psi)},
          {"noise_scale", s.noise_scale},
          {"replicate", s.replicate},
          {"certificate", to_json(s.cert)}};
}

FieldSample read_field_csv(std::istream& in, const nlohmann::json* sidecar)
{
  std::string line;
  std::vector<std::string> columns;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ','))
      columns.push_back(col);
    break;
  }
  if (columns.empty())
    throw std::runtime_error("field CSV has no header row");
  std::size_t N = 0, nx = 0, ny = 0;
  for (const auto& c : columns) {
    if (c.empty())
      throw std::runtime_error("field CSV header has an empty column name");
    if (c[0] == 's')
      ++N;
    else if (c[0] == 'x')
      ++nx;
    else if (c[0] == 'y')
      ++ny;
    else
      throw std::runtime_error("unexpected field CSV column '" + c + "'");
  }
  if (N == 0 || nx == 0 || nx != ny)
    throw std::runtime_error("field CSV must have site columns and equal numbers of x and y columns");

  std::vector<Site> sites;
  std::vector<double> xs, ys;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    ++row;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ','))
      cells.push_back(cell);
    if (cells.size() != columns.size())
      throw std::runtime_error("field CSV row " + std::to_string(row) + " has the wrong column count");
    Site s(N);
    for (std::size_t k = 0; k < N; ++k)
      s[k] = std::stoll(cells[k]);
    sites.push_back(std::move(s));
    for (std::size_t j = 0; j < nx; ++j)
      xs.push_back(std::stod(cells[N + j]));
    for (std::size_t j = 0; j < ny; ++j)
      ys.push_back(std::stod(cells[N + nx + j]));
  }
  if (sites.empty())
    throw std::runtime_error("field CSV has no data rows");
  std::vector<std::int64_t> edges(N, 0);
  for (const Site& s : sites)
    for (std::size_t k = 0; k < N; ++k)
      edges[k] = std::max(edges[k], s[k]);
  FieldSample out;
  out.cube = LatticeCube(edges);
  if (out.cube.size() != sites.size())
    throw std::runtime_error("field CSV sites do not form a full lattice cube");
  out.J = nx;
  out.X.assign(sites.size() * nx, 0.0);
  out.Y.assign(sites.size() * nx, 0.0);
  std::vector<bool> seen(sites.size(), false);
  for (std::size_t r = 0; r < sites.size(); ++r) {
    const std::size_t i = out.cube.index_of(sites[r]);
    if (seen[i])
      throw std::runtime_error("field CSV repeats a site");
    seen[i] = true;
    std::copy_n(xs.begin() + static_cast<std::ptrdiff_t>(r * nx), nx, out.X.begin() + static_cast<std::ptrdiff_t>(i * nx));
    std::copy_n(ys.begin() + static_cast<std::ptrdiff_t>(r * nx), nx, out.Y.begin() + static_cast<std::ptrdiff_t>(i * nx));
  }
  out.spec.basis.j_max = nx;
  if (sidecar) {
    if (sidecar->contains("generator"))
      out.spec = generator_spec_from_json(sidecar->at("generator"));
    if (sidecar->contains("psi"))
      out.psi = psi_spec_from_json(sidecar->at("psi"));
    out.noise_scale = sidecar->value("noise_scale", 0.0);
    out.replicate = sidecar->value("replicate", std::uint64_t{0});
    if (sidecar->contains("certificate"))
      out.cert = certificate_from_json(sidecar->at("certificate"));
    if (out.spec.basis.j_max != nx)
      throw std::runtime_error("sidecar basis size does not match CSV columns");
  }
  out.cert.alpha_status = AlphaStatus::user_supplied;
  out.cert.alpha_note = "imported field; certificate values are user-supplied";
  return out;
}

} // namespace fkr
