#include "surfmix/io.hpp"

#include <charconv>
#include <ctime>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace surfmix {

Json load_json(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw ConfigError("", "cannot open config file " + file.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("", "malformed JSON in " + file.string() + " (byte " + std::to_string(e.byte) + ")");
    }
}

std::string canonical_dump(const Json& j) { return j.dump(); }

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string config_hash(const Json& config) { return sha256_hex(canonical_dump(config)); }

const Json& require(const Json& object, const std::string& key, const std::string& path)
{
    if (!object.is_object()) throw ConfigError(path, "expected an object");
    const auto it = object.find(key);
    if (it == object.end()) throw ConfigError(path + "/" + key, "missing required field");
    return *it;
}

std::uint64_t get_u64(const Json& object, const std::string& key, const std::string& path, std::uint64_t fallback)
{
    const auto it = object.find(key);
    if (it == object.end()) return fallback;
    if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0))
        throw ConfigError(path + "/" + key, "expected a nonnegative integer");
    return it->get<std::uint64_t>();
}

double get_double(const Json& object, const std::string& key, const std::string& path, double fallback)
{
    const auto it = object.find(key);
    if (it == object.end()) return fallback;
    if (it->is_number()) return it->get<double>();
    if (it->is_string()) return to_double(rational_from_json(*it, path + "/" + key));
    throw ConfigError(path + "/" + key, "expected a number");
}

namespace {

std::vector<int> int_list(const Json& value, const std::string& path)
{
    if (!value.is_array() || value.empty()) throw ConfigError(path, "expected a nonempty array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_number_integer()) throw ConfigError(path + "/" + std::to_string(i), "expected an integer");
        out.push_back(value[i].get<int>());
    }
    return out;
}

} // namespace

RegionPtr region_from_json(const Json& spec, const std::string& path)
{
    try {
        if (spec.is_array()) return make_rectangle(int_list(spec, path));
        if (spec.is_object() && spec.contains("dims")) return make_rectangle(int_list(spec["dims"], path + "/dims"));
        if (spec.is_object() && spec.contains("points")) {
            const int dim = static_cast<int>(get_u64(spec, "dim", path, 0));
            const Json& pts = spec["points"];
            if (!pts.is_array() || pts.empty()) throw ConfigError(path + "/points", "expected a nonempty array of points");
            std::vector<Point> points;
            for (std::size_t i = 0; i < pts.size(); ++i) points.push_back(int_list(pts[i], path + "/points/" + std::to_string(i)));
            return make_region(dim == 0 ? static_cast<int>(points.front().size()) : dim, std::move(points));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(path, "expected [dims...], {\"dims\": [...]} or {\"dim\": d, \"points\": [...]}");
}

Json region_to_json(const Region& region)
{
    if (region.is_rectangle()) return Json{{"dims", region.dims()}};
    Json points = Json::array();
    for (CubeId c = 0; c < region.volume(); ++c) points.push_back(region.point(c));
    return Json{{"dim", region.dim()}, {"points", points}};
}

std::string region_hash(const Region& region) { return sha256_hex(canonical_dump(region_to_json(region))); }

Rational rational_from_json(const Json& value, const std::string& path)
{
    try {
        if (value.is_number_integer()) return value.is_number_unsigned() ? Rational(value.get<std::uint64_t>()) : Rational(value.get<std::int64_t>());
        if (value.is_number_float()) return parse_rational(value.dump());
        if (value.is_string()) return parse_rational(value.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(path, "expected a number or a \"p/q\" string");
}

BiasField bias_from_json(const Json& spec, const RegionPtr& region, const std::string& path)
{
    if (!spec.is_object()) throw ConfigError(path, "expected an object");
    try {
        if (spec.contains("uniform")) return BiasField::uniform(region, rational_from_json(spec["uniform"], path + "/uniform"));
        if (spec.contains("default")) {
            std::vector<Rational> lambdas(region->volume(), rational_from_json(spec["default"], path + "/default"));
            if (spec.contains("sites")) {
                const Json& sites = spec["sites"];
                if (!sites.is_array()) throw ConfigError(path + "/sites", "expected an array");
                for (std::size_t i = 0; i < sites.size(); ++i) {
                    const std::string site_path = path + "/sites/" + std::to_string(i);
                    const auto point = int_list(require(sites[i], "point", site_path), site_path + "/point");
                    const auto cube = region->find(point);
                    if (!cube) throw ConfigError(site_path + "/point", "point is not in the region");
                    lambdas[*cube] = rational_from_json(require(sites[i], "lambda", site_path), site_path + "/lambda");
                }
            }
            return BiasField::per_site(region, std::move(lambdas));
        }
        if (spec.contains("random")) {
            const Json& r = spec["random"];
            const std::string rpath = path + "/random";
            const Rational low = rational_from_json(require(r, "low", rpath), rpath + "/low");
            const Rational high = rational_from_json(require(r, "high", rpath), rpath + "/high");
            if (high < low) throw ConfigError(rpath, "high is below low");
            const std::uint64_t seed = get_u64(r, "seed", rpath, 0);
            std::vector<Rational> lambdas(region->volume());
            for (CubeId c = 0; c < region->volume(); ++c)
                lambdas[c] = low + (high - low) * Rational(bounded(counter_hash(seed, static_cast<std::uint64_t>(c)), 1001), 1000);
            return BiasField::per_site(region, std::move(lambdas));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(path, "expected one of \"uniform\", \"default\" or \"random\"");
}

Downset downset_from_json(const Json& spec, const RegionPtr& region, const std::string& path)
{
    if (spec.is_string()) {
        if (spec == "empty") return Downset::empty(region);
        if (spec == "full") return Downset::full(region);
        throw ConfigError(path, "expected \"empty\", \"full\" or a count array");
    }
    const Json& counts = spec.is_object() ? require(spec, "counts", path) : spec;
    if (spec.is_object() && spec.contains("region_hash") && spec["region_hash"] != region_hash(*region))
        throw ConfigError(path + "/region_hash", "downset belongs to a different region");
    try {
        return Downset::from_counts(region, int_list(counts, path));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

Json downset_to_json(const Downset& sigma)
{
    return Json{{"counts", std::vector<int>(sigma.counts().begin(), sigma.counts().end())}, {"region_hash", region_hash(sigma.region())}};
}

std::string format_double(double x)
{
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, result.ptr};
}

std::vector<std::uint64_t> seeds_from_json(const Json& config, std::uint64_t master, const std::string& path)
{
    const auto it = config.find("seeds");
    if (it == config.end()) throw ConfigError(path, "missing required field");
    std::vector<std::uint64_t> seeds;
    if (it->is_number_unsigned()) {
        const auto count = it->get<std::uint64_t>();
        for (std::uint64_t i = 0; i < count; ++i) seeds.push_back(replica_seed(master, i));
    } else if (it->is_array()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            if (!(*it)[i].is_number_unsigned()) throw ConfigError(path + "/" + std::to_string(i), "expected a nonnegative integer");
            seeds.push_back((*it)[i].get<std::uint64_t>());
        }
    } else {
        throw ConfigError(path, "expected a replica count or an array of seeds");
    }
    return seeds;
}

std::string utc_timestamp()
{
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace surfmix
