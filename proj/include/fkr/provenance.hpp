#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>

namespace fkr {

inline constexpr const char* kToolName = "fkr";
inline constexpr const char* kToolVersion = "0.4.0";

// Keys sorted, no whitespace; equal for configs that differ only in key order.
std::string canonical_json(const nlohmann::json& j);
// FNV-1a 64 of the canonical dump.
std::uint64_t config_hash(const nlohmann::json& j);
std::string hash_hex(std::uint64_t h);

struct Provenance
{
  std::string schema;        // e.g. "fkr.tail/1"
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;

  // "# schema=... tool=fkr/0.4.0 config=<hex> seed=<n>"
  std::string header_line() const;
};

std::string version_and_provenance(const nlohmann::json& config, std::uint64_t seed);

} // namespace fkr
