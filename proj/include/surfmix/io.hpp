#ifndef SURFMIX_IO_HPP
#define SURFMIX_IO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "surfmix/dynamics.hpp"

namespace surfmix {

using Json = nlohmann::json;

inline constexpr const char* tool_version = "0.1.0";

/// Invalid experiment configuration; path is a JSON pointer to the offending value.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Reads and parses a JSON file; parse failures become ConfigError.
Json load_json(const std::filesystem::path& file);

/// Compact dump with sorted keys: the canonical form used for hashing.
std::string canonical_dump(const Json& j);
std::string sha256_hex(std::string_view data);
/// sha256 of the canonical dump.
std::string config_hash(const Json& config);

/// Region spec: [h, w, ...], {"dims": [...]} or {"dim": d, "points": [[...], ...]}.
RegionPtr region_from_json(const Json& spec, const std::string& path = "/region");
Json region_to_json(const Region& region);
std::string region_hash(const Region& region);

/// A rational from a JSON integer, a decimal literal, or a "p/q" string.
Rational rational_from_json(const Json& value, const std::string& path);

/// Bias spec:
///   {"uniform": l}
///   {"default": l, "sites": [{"point": [...], "lambda": l}, ...]}
///   {"random": {"low": l, "high": h, "seed": s}}  (per-site values on a 1/1000 grid of [l, h])
BiasField bias_from_json(const Json& spec, const RegionPtr& region, const std::string& path = "/bias");

/// "empty", "full", or an array of per-ray counts.
Downset downset_from_json(const Json& spec, const RegionPtr& region, const std::string& path);
/// {"counts": [...], "region_hash": "..."}
Json downset_to_json(const Downset& sigma);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

/// Lookup helpers that name the JSON path in their errors.
const Json& require(const Json& object, const std::string& key, const std::string& path);
std::uint64_t get_u64(const Json& object, const std::string& key, const std::string& path, std::uint64_t fallback);
double get_double(const Json& object, const std::string& key, const std::string& path, double fallback);

/// Seed list from "seeds": a count n (replica seeds 0..n-1 of the master seed) or an explicit array.
std::vector<std::uint64_t> seeds_from_json(const Json& config, std::uint64_t master, const std::string& path = "/seeds");

/// UTC time in ISO 8601.
std::string utc_timestamp();

} // namespace surfmix

#endif
