#pragma once

#include "fkr/concentration.hpp"
#include "fkr/experiments.hpp"
#include "fkr/provenance.hpp"
#include "fkr/regression.hpp"

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

namespace fkr {

// Schema ids carried in the first line of every CSV. Bump the suffix when
// columns change.
inline constexpr const char* kSchemaTail = "fkr.tail/1";
inline constexpr const char* kSchemaDominance = "fkr.dominance/1";
inline constexpr const char* kSchemaLaplace = "fkr.laplace/1";
inline constexpr const char* kSchemaRate = "fkr.rate/1";
inline constexpr const char* kSchemaRateSeeds = "fkr.rate_seeds/1";
inline constexpr const char* kSchemaEstimate = "fkr.estimate/1";
inline constexpr const char* kSchemaSmallBall = "fkr.smallball/1";

inline constexpr const char* kUnderflow = "underflow";

struct ReportTable
{
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// Numbers in shortest round-trip form; NaN is written as "nan".
std::string cell(double v);
std::string cell(std::size_t v);

// Header comment line, column row, data rows; '\n' line endings.
std::string to_csv(const ReportTable& t, const Provenance& p);

ReportTable tail_table(const TailReport& r);
ReportTable dominance_table(const TailLadderResult& r);
ReportTable laplace_table(const LaplaceLadderResult& r);
ReportTable rate_table(const RateReport& r);
ReportTable rate_seed_table(const RateReport& r, std::size_t seeds_per_batch);
ReportTable estimate_table(const SupErrorReport& r);
ReportTable smallball_table(const SmallBallTable& t, const std::vector<double>* analytic = nullptr);

struct ReportMetadata
{
  std::string kind;
  std::string schema;
  std::string tool_version;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> columns;
  std::size_t rows = 0;
  nlohmann::json summary = nlohmann::json::object();

  bool operator==(const ReportMetadata&) const = default;
};

ReportMetadata make_metadata(const std::string& kind, const ReportTable& t, const Provenance& p,
                             nlohmann::json summary = nlohmann::json::object());
nlohmann::json to_json(const ReportMetadata& m);
ReportMetadata report_metadata_from_json(const nlohmann::json& j);

// Log-log plot of column ycol against xcol (1-based) of a CSV written by to_csv.
std::string gnuplot_script(const std::string& csv_name, std::size_t xcol, std::size_t ycol,
                           const std::string& xlabel, const std::string& ylabel);

// Writes bytes exactly; throws std::runtime_error when the path is not writable.
void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace fkr
