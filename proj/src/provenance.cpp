#include "fkr/provenance.hpp"

#include <cstdio>

namespace fkr {

std::string canonical_json(const nlohmann::json& j)
{
  // nlohmann::json objects are std::map backed, so dump() already sorts keys
  return j.dump();
}

std::uint64_t config_hash(const nlohmann::json& j)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_json(j)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Provenance::header_line() const
{
  return "# schema=" + schema + " tool=" + kToolName + "/" + kToolVersion + " config=" + hash_hex(config_hash) +
         " seed=" + std::to_string(seed);
}

std::string version_and_provenance(const nlohmann::json& config, std::uint64_t seed)
{
  return std::string(kToolName) + " " + kToolVersion + "\nconfig " + hash_hex(config_hash(config)) + "\nseed " +
         std::to_string(seed) + "\n";
}

} // namespace fkr
