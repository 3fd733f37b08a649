#pragma once

// Run configuration: a single JSON document naming counties, sources, the date
// range and per-stage options. Relative paths resolve against the document's
// directory.

#include "mobnet/ingest.hpp"
#include "mobnet/motifs.hpp"
#include "mobnet/similarity.hpp"
#include "mobnet/synth.hpp"
#include "mobnet/util.hpp"

#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace mobnet {

namespace fs = std::filesystem;

struct CountyConfig {
    std::string fips;
    std::string name;
    std::string tracts;                        // GeoJSON path
    std::map<std::string, std::string> pings;  // source label -> directory of daily ping files
};

enum class MotifMode { Exact, Sample };

struct MotifConfig {
    MotifMode mode = MotifMode::Exact;
    std::uint64_t sample_size = 100'000;
    std::uint64_t seed = 7;
    MotifOptions options;
};

struct SimilarityConfig {
    MapeMode mape_mode = MapeMode::Symmetric;
    CosineReduction cosine_reduction = CosineReduction::Mean;
};

struct RunConfig {
    std::vector<CountyConfig> counties;
    std::vector<std::string> sources;  // order fixes pair labels and score columns
    Date date_start, date_end;
    std::int64_t utc_offset_s = 0;     // local day boundary for day assignment
    StopParams stops;
    MotifConfig motif;
    SimilarityConfig similarity;
    std::string output_dir = "mobnet_out";
    unsigned threads = 0;              // 0 = all hardware threads
    std::string geoid_property = "GEOID";

    std::vector<Date> dates() const { return date_range(date_start, date_end); }
};

/// Settings for generating a synthetic multi-provider bundle.
struct SynthConfig {
    WorldParams world;
    std::string county_name = "Synthetic County";
    std::vector<ProviderProfile> profiles = default_profiles();
    std::uint64_t emit_seed = 1;
    Date date_start = Date::parse("2020-02-01");
    Date date_end = Date::parse("2020-02-29");
    std::int64_t utc_offset_s = 0;
};

inline constexpr std::size_t kMaxRangeDays = 31;
inline constexpr const char* kOutputDirEnv = "MOBNET_OUTPUT_DIR";

namespace config_detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object())
        throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || key == a;
        if (!ok)
            throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where, T fallback)
{
    if (!obj.contains(key))
        return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

inline std::string required_string(const json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key) || !obj.at(key).is_string() || obj.at(key).get<std::string>().empty())
        throw ConfigError(where + "." + key + ": required string");
    return obj.at(key).get<std::string>();
}

inline Date parse_date(const std::string& text, const std::string& where)
{
    try {
        return Date::parse(text);
    } catch (const std::exception&) {
        throw ConfigError(where + ": bad date \"" + text + "\"");
    }
}

inline std::string resolve(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

inline void check_label(const std::string& label)
{
    if (label.empty() || label.find_first_of(",/\\ \t\"") != std::string::npos)
        throw ConfigError("source label \"" + label + "\" must be nonempty without separators");
}

inline void check_range(Date a, Date b)
{
    if (b < a)
        throw ConfigError("date_end precedes date_start");
    if (std::size_t(b.days() - a.days() + 1) > kMaxRangeDays)
        throw ConfigError("date range longer than " + std::to_string(kMaxRangeDays) + " days");
}

inline ProviderProfile parse_profile(const json& j, const std::string& where)
{
    check_keys(j, where, {"name", "penetration", "ping_interval_s", "noise_sigma_m", "dropout_p"});
    ProviderProfile p;
    p.name = required_string(j, "name", where);
    check_label(p.name);
    p.penetration = get(j, "penetration", where, p.penetration);
    p.ping_interval_s = get(j, "ping_interval_s", where, p.ping_interval_s);
    p.noise_sigma_m = get(j, "noise_sigma_m", where, p.noise_sigma_m);
    p.dropout_p = get(j, "dropout_p", where, p.dropout_p);
    p.validate();
    return p;
}

}  // namespace config_detail

inline RunConfig parse_config(const nlohmann::json& j, const fs::path& base_dir)
{
    using namespace config_detail;
    check_keys(j, "config", {"counties", "sources", "date_start", "date_end", "utc_offset_s", "stops",
                             "motif", "similarity", "output_dir", "threads", "geoid_property",
                             "synth"});
    RunConfig c;
    if (!j.contains("counties") || !j["counties"].is_array() || j["counties"].empty())
        throw ConfigError("config.counties: at least one county required");
    if (!j.contains("sources") || !j["sources"].is_array() || j["sources"].empty())
        throw ConfigError("config.sources: at least one source label required");
    for (const auto& s : j["sources"]) {
        if (!s.is_string())
            throw ConfigError("config.sources: labels must be strings");
        check_label(s.get<std::string>());
        c.sources.push_back(s.get<std::string>());
    }
    if (std::set<std::string>(c.sources.begin(), c.sources.end()).size() != c.sources.size())
        throw ConfigError("config.sources: duplicate label");

    std::set<std::string> seen_fips;
    for (std::size_t i = 0; i < j["counties"].size(); ++i) {
        const auto& cj = j["counties"][i];
        const std::string where = "config.counties[" + std::to_string(i) + "]";
        check_keys(cj, where, {"fips", "name", "tracts", "pings"});
        CountyConfig county;
        county.fips = required_string(cj, "fips", where);
        if (county.fips.size() != 5 || county.fips.find_first_not_of("0123456789") != std::string::npos)
            throw ConfigError(where + ".fips: expected 5 digits");
        if (!seen_fips.insert(county.fips).second)
            throw ConfigError(where + ".fips: duplicate county " + county.fips);
        county.name = get<std::string>(cj, "name", where, county.fips);
        if (county.name.find_first_of(",\n\r") != std::string::npos)
            throw ConfigError(where + ".name: must not contain commas or line breaks");
        county.tracts = resolve(base_dir, required_string(cj, "tracts", where));
        if (!cj.contains("pings") || !cj["pings"].is_object())
            throw ConfigError(where + ".pings: map from source label to directory required");
        for (const auto& [label, dir] : cj["pings"].items()) {
            if (!dir.is_string())
                throw ConfigError(where + ".pings." + label + ": expected a path");
            county.pings[label] = resolve(base_dir, dir.get<std::string>());
        }
        for (const auto& s : c.sources)
            if (!county.pings.count(s))
                throw ConfigError(where + ".pings: no path for source " + s);
        c.counties.push_back(std::move(county));
    }

    c.date_start = parse_date(required_string(j, "date_start", "config"), "config.date_start");
    c.date_end = parse_date(required_string(j, "date_end", "config"), "config.date_end");
    check_range(c.date_start, c.date_end);
    c.utc_offset_s = get<std::int64_t>(j, "utc_offset_s", "config", 0);
    if (c.utc_offset_s < -14 * 3600 || c.utc_offset_s > 14 * 3600)
        throw ConfigError("config.utc_offset_s: out of range");

    if (j.contains("stops")) {
        const auto& sj = j["stops"];
        check_keys(sj, "config.stops", {"radius_m", "min_dwell_s"});
        c.stops.radius_m = get(sj, "radius_m", "config.stops", c.stops.radius_m);
        c.stops.min_dwell_s = get(sj, "min_dwell_s", "config.stops", c.stops.min_dwell_s);
        if (!(c.stops.radius_m > 0) || c.stops.min_dwell_s <= 0)
            throw ConfigError("config.stops: radius_m and min_dwell_s must be positive");
    }

    if (j.contains("motif")) {
        const auto& mj = j["motif"];
        check_keys(mj, "config.motif", {"mode", "sample_size", "seed", "median_threshold", "volume",
                                        "distance_bin_m", "volume_bin"});
        const auto mode = get<std::string>(mj, "mode", "config.motif", "exact");
        if (mode == "exact")
            c.motif.mode = MotifMode::Exact;
        else if (mode == "sample")
            c.motif.mode = MotifMode::Sample;
        else
            throw ConfigError("config.motif.mode: expected exact or sample");
        c.motif.sample_size = get(mj, "sample_size", "config.motif", c.motif.sample_size);
        c.motif.seed = get(mj, "seed", "config.motif", c.motif.seed);
        auto& o = c.motif.options;
        o.median_threshold = get(mj, "median_threshold", "config.motif", o.median_threshold);
        o.distance_bin_m = get(mj, "distance_bin_m", "config.motif", o.distance_bin_m);
        o.volume_bin = get(mj, "volume_bin", "config.motif", o.volume_bin);
        const auto volume = get<std::string>(mj, "volume", "config.motif", "mean");
        if (volume == "mean")
            o.volume_mode = VolumeMode::Mean;
        else if (volume == "sum")
            o.volume_mode = VolumeMode::Sum;
        else
            throw ConfigError("config.motif.volume: expected mean or sum");
        if (c.motif.sample_size == 0 || !(o.distance_bin_m > 0) || !(o.volume_bin > 0))
            throw ConfigError("config.motif: sample_size and bin widths must be positive");
    }

    if (j.contains("similarity")) {
        const auto& sj = j["similarity"];
        check_keys(sj, "config.similarity", {"mape_mode", "cosine_reduction"});
        const auto mape = get<std::string>(sj, "mape_mode", "config.similarity", "symmetric");
        if (mape == "symmetric")
            c.similarity.mape_mode = MapeMode::Symmetric;
        else if (mape == "base-a")
            c.similarity.mape_mode = MapeMode::BaseA;
        else
            throw ConfigError("config.similarity.mape_mode: expected symmetric or base-a");
        const auto red = get<std::string>(sj, "cosine_reduction", "config.similarity", "mean");
        if (red == "mean")
            c.similarity.cosine_reduction = CosineReduction::Mean;
        else if (red == "median")
            c.similarity.cosine_reduction = CosineReduction::Median;
        else if (red == "majority")
            c.similarity.cosine_reduction = CosineReduction::Majority;
        else
            throw ConfigError("config.similarity.cosine_reduction: expected mean, median or majority");
    }

    c.output_dir = resolve(base_dir, get<std::string>(j, "output_dir", "config", c.output_dir));
    const auto threads = get<std::int64_t>(j, "threads", "config", 0);
    if (threads < 0 || threads > 1024)
        throw ConfigError("config.threads: expected 0..1024");
    c.threads = unsigned(threads);
    c.geoid_property = get<std::string>(j, "geoid_property", "config", c.geoid_property);
    return c;
}

inline nlohmann::json read_json_file(const std::string& path)
{
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const DataError& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
}

/// Loads a config file; MOBNET_OUTPUT_DIR, when set, replaces output_dir.
inline RunConfig load_config(const std::string& path)
{
    auto cfg = parse_config(read_json_file(path), fs::absolute(path).parent_path());
    if (const char* env = std::getenv(kOutputDirEnv); env && *env)
        cfg.output_dir = fs::absolute(env).lexically_normal().string();
    return cfg;
}

inline SynthConfig parse_synth_config(const nlohmann::json& j)
{
    using namespace config_detail;
    SynthConfig s;
    check_keys(j, "config.synth", {"tracts_per_side", "n_devices", "seed", "emit_seed", "county_fips",
                                   "county_name", "origin_lat", "origin_lon", "tract_deg",
                                   "profiles", "date_start", "date_end", "utc_offset_s"});
    auto& w = s.world;
    w.tracts_per_side = get(j, "tracts_per_side", "config.synth", w.tracts_per_side);
    w.n_devices = get(j, "n_devices", "config.synth", w.n_devices);
    w.seed = get(j, "seed", "config.synth", w.seed);
    w.county_fips = get(j, "county_fips", "config.synth", w.county_fips);
    w.origin_lat = get(j, "origin_lat", "config.synth", w.origin_lat);
    w.origin_lon = get(j, "origin_lon", "config.synth", w.origin_lon);
    w.tract_deg = get(j, "tract_deg", "config.synth", w.tract_deg);
    s.emit_seed = get(j, "emit_seed", "config.synth", s.emit_seed);
    s.county_name = get(j, "county_name", "config.synth", s.county_name);
    s.utc_offset_s = get(j, "utc_offset_s", "config.synth", s.utc_offset_s);
    if (j.contains("date_start"))
        s.date_start = parse_date(j["date_start"].get<std::string>(), "config.synth.date_start");
    if (j.contains("date_end"))
        s.date_end = parse_date(j["date_end"].get<std::string>(), "config.synth.date_end");
    if (j.contains("profiles")) {
        if (!j["profiles"].is_array() || j["profiles"].empty())
            throw ConfigError("config.synth.profiles: nonempty array required");
        s.profiles.clear();
        for (std::size_t i = 0; i < j["profiles"].size(); ++i)
            s.profiles.push_back(parse_profile(j["profiles"][i], "config.synth.profiles[" + std::to_string(i) + "]"));
    }
    return s;
}

inline void validate(const SynthConfig& s)
{
    if (s.world.tracts_per_side < 2 || s.world.tracts_per_side > 999 || s.world.n_devices < 1)
        throw ConfigError("synth: need 2..999 tracts per side and at least one device");
    if (s.world.county_fips.size() != 5 ||
        s.world.county_fips.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("synth: county_fips must be 5 digits");
    config_detail::check_range(s.date_start, s.date_end);
    std::set<std::string> names;
    for (const auto& p : s.profiles) {
        config_detail::check_label(p.name);
        p.validate();
        if (!names.insert(p.name).second)
            throw ConfigError("synth: duplicate profile " + p.name);
    }
}

namespace config_detail {

inline const char* name_of(MapeMode m) { return m == MapeMode::Symmetric ? "symmetric" : "base-a"; }
inline const char* name_of(CosineReduction r)
{
    return r == CosineReduction::Mean ? "mean" : r == CosineReduction::Median ? "median" : "majority";
}

}  // namespace config_detail

/// Fully resolved settings for the manifest. Thread count and output location
/// are left out: neither changes any output byte.
inline nlohmann::json config_echo(const RunConfig& c)
{
    using nlohmann::json;
    json counties = json::array();
    for (const auto& county : c.counties)
        counties.push_back({{"fips", county.fips}, {"name", county.name}, {"tracts", county.tracts},
                            {"pings", county.pings}});
    const auto& o = c.motif.options;
    return {
        {"counties", counties},
        {"sources", c.sources},
        {"date_start", c.date_start.str()},
        {"date_end", c.date_end.str()},
        {"utc_offset_s", c.utc_offset_s},
        {"stops", {{"radius_m", c.stops.radius_m}, {"min_dwell_s", c.stops.min_dwell_s}}},
        {"motif",
         {{"mode", c.motif.mode == MotifMode::Exact ? "exact" : "sample"},
          {"sample_size", c.motif.sample_size},
          {"seed", c.motif.seed},
          {"median_threshold", o.median_threshold},
          {"distance_bin_m", o.distance_bin_m},
          {"volume_bin", o.volume_bin},
          {"volume", o.volume_mode == VolumeMode::Mean ? "mean" : "sum"}}},
        {"similarity",
         {{"mape_mode", config_detail::name_of(c.similarity.mape_mode)},
          {"cosine_reduction", config_detail::name_of(c.similarity.cosine_reduction)}}},
        {"geoid_property", c.geoid_property},
    };
}

}  // namespace mobnet
