#include "fkr/report.hpp"

#include "fkr/stats.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fkr {

std::string cell(double v)
{
  return format_double(v);
}

std::string cell(std::size_t v)
{
  return std::to_string(v);
}

namespace {

std::string edges_cell(const LatticeCube& c)
{
  std::string s;
  for (std::size_t k = 0; k < c.dim(); ++k)
    s += (k ? "x" : "") + std::to_string(c.edges()[k]);
  return s;
}

std::string maybe_underflow(double v, bool underflow)
{
  return underflow ? kUnderflow : cell(v);
}

} // namespace

std::string to_csv(const ReportTable& t, const Provenance& p)
{
  Provenance q = p;
  q.schema = t.schema;
  std::string out = q.header_line() + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size())
      throw std::logic_error("row width does not match the column count");
    for (std::size_t i = 0; i < row.size(); ++i)
      out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

ReportTable tail_table(const TailReport& r)
{
  ReportTable t{kSchemaTail,
                {"rung", "edges", "size", "eps", "replicates", "hits", "p_hat", "ci_lo", "ci_hi", "bound", "ratio"},
                {}};
  for (const TailCell& c : r.cells) {
    const LatticeCube& cube = r.ladder[c.rung];
    // ratio = P_hat / bound; nan when no bound is attached
    const double ratio = std::isnan(c.bound) ? std::nan("") : c.p_hat / c.bound;
    t.rows.push_back({cell(c.rung), edges_cell(cube), cell(cube.size()), cell(c.eps), cell(c.replicates),
                      cell(c.hits), cell(c.p_hat), cell(c.ci.lo), cell(c.ci.hi), cell(c.bound), cell(ratio)});
  }
  return t;
}

ReportTable dominance_table(const TailLadderResult& r)
{
  ReportTable t{kSchemaDominance, {"rung", "eps", "p_hat", "ci_hi", "bound", "dominated"}, {}};
  for (const DominanceRow& d : r.rows)
    t.rows.push_back({cell(d.rung), cell(d.eps), cell(d.p_hat), cell(d.upper), cell(d.bound), d.dominated ? "1" : "0"});
  return t;
}

ReportTable laplace_table(const LaplaceLadderResult& r)
{
  ReportTable t{kSchemaLaplace,
                {"rung", "edges", "size", "beta", "beta_b", "beta_b_max", "log_laplace", "jackknife_se", "rhs", "holds"},
                {}};
  for (std::size_t k = 0; k < r.rungs.size(); ++k) {
    const LaplaceReport& rep = r.rungs[k];
    for (const LaplaceEstimate& e : rep.estimates) {
      const bool has_rhs = !std::isnan(e.rhs);
      t.rows.push_back({cell(k), edges_cell(rep.cube), cell(rep.cube.size()), cell(e.beta), cell(e.beta * r.B),
                        cell(rep.region.beta_b_max), cell(e.log_laplace), cell(e.jackknife_se), cell(e.rhs),
                        has_rhs ? (e.log_laplace <= e.rhs ? "1" : "0") : ""});
    }
  }
  return t;
}

ReportTable rate_table(const RateReport& r)
{
  ReportTable t{kSchemaRate,
                {"rung", "edges", "size", "eff_size", "delta", "h", "R", "centers", "inf_F", "median", "q25", "q75",
                 "underflow_fraction", "ratio1", "ratio2", "bias", "ratio_weak", "rate"},
                {}};
  for (std::size_t k = 0; k < r.rungs.size(); ++k) {
    const RateRung& g = r.rungs[k];
    const bool all_underflow = std::isnan(g.median);
    const double rate = r.mode == MixingMode::alpha ? g.ratio1 + g.ratio2 + g.bias_term : g.ratio_weak + g.bias_term;
    t.rows.push_back({cell(k), edges_cell(g.cube), cell(g.cube.size()), cell(effective_sample_size(g.cube)),
                      cell(g.delta), cell(g.h), cell(g.R), cell(g.centers), cell(g.inf_F),
                      maybe_underflow(g.median, all_underflow), maybe_underflow(g.q25, all_underflow),
                      maybe_underflow(g.q75, all_underflow), cell(g.mean_underflow), cell(g.ratio1), cell(g.ratio2),
                      cell(g.bias_term), cell(g.ratio_weak), cell(rate)});
  }
  return t;
}

ReportTable rate_seed_table(const RateReport& r, std::size_t seeds_per_batch)
{
  ReportTable t{kSchemaRateSeeds, {"rung", "batch", "seed_index", "sup_error", "underflow_fraction"}, {}};
  for (std::size_t k = 0; k < r.rungs.size(); ++k) {
    const RateRung& g = r.rungs[k];
    for (std::size_t i = 0; i < g.sup_errors.size(); ++i)
      t.rows.push_back({cell(k), cell(i / seeds_per_batch), cell(i % seeds_per_batch),
                        maybe_underflow(g.sup_errors[i], std::isnan(g.sup_errors[i])), cell(g.underflow_fraction[i])});
  }
  return t;
}

ReportTable estimate_table(const SupErrorReport& r)
{
  ReportTable t{kSchemaEstimate, {"center", "f_hat", "error", "underflow"}, {}};
  for (std::size_t i = 0; i < r.centers.size(); ++i) {
    const CenterError& c = r.centers[i];
    t.rows.push_back({cell(i), cell(c.f), maybe_underflow(c.error, c.underflow), c.underflow ? "1" : "0"});
  }
  return t;
}

ReportTable smallball_table(const SmallBallTable& s, const std::vector<double>* analytic)
{
  ReportTable t{kSchemaSmallBall, {"h", "F_hat", "zero", "F_analytic"}, {}};
  for (std::size_t i = 0; i < s.h_grid.size(); ++i)
    t.rows.push_back({cell(s.h_grid[i]), cell(s.F_hat[i]), s.zero_flag[i] ? "1" : "0",
                      analytic ? cell((*analytic)[i]) : ""});
  return t;
}

ReportMetadata make_metadata(const std::string& kind, const ReportTable& t, const Provenance& p,
                             nlohmann::json summary)
{
  ReportMetadata m;
  m.kind = kind;
  m.schema = t.schema;
  m.tool_version = kToolVersion;
  m.config_hash = p.config_hash;
  m.seed = p.seed;
  m.columns = t.columns;
  m.rows = t.rows.size();
  m.summary = std::move(summary);
  return m;
}

nlohmann::json to_json(const ReportMetadata& m)
{
  return {{"kind", m.kind},
          {"schema", m.schema},
          {"tool_version", m.tool_version},
          {"config_hash", hash_hex(m.config_hash)},
          {"seed", m.seed},
          {"columns", m.columns},
          {"rows", m.rows},
          {"summary", m.summary}};
}

ReportMetadata report_metadata_from_json(const nlohmann::json& j)
{
  ReportMetadata m;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind")
      m.kind = value.get<std::string>();
    else if (key == "schema")
      m.schema = value.get<std::string>();
    else if (key == "tool_version")
      m.tool_version = value.get<std::string>();
    else if (key == "config_hash")
      m.config_hash = std::stoull(value.get<std::string>(), nullptr, 16);
    else if (key == "seed")
      m.seed = value.get<std::uint64_t>();
    else if (key == "columns")
      m.columns = value.get<std::vector<std::string>>();
    else if (key == "rows")
      m.rows = value.get<std::size_t>();
    else if (key == "summary")
      m.summary = value;
    else
      throw std::invalid_argument("unknown report metadata key '" + key + "'");
  }
  return m;
}

std::string gnuplot_script(const std::string& csv_name, std::size_t xcol, std::size_t ycol,
                           const std::string& xlabel, const std::string& ylabel)
{
  return "set datafile separator ','\n"
         "set datafile missing 'underflow'\n"
         "set logscale xy\n"
         "set key off\n"
         "set xlabel '" + xlabel + "'\n"
         "set ylabel '" + ylabel + "'\n"
         "plot '" + csv_name + "' every ::1 using " + std::to_string(xcol) + ":" + std::to_string(ycol) +
         " with linespoints\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace fkr
