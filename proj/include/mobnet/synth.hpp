#pragma once

// Ground-truthed synthetic mobility data: a square grid of tracts, a device
// population with home/work/leisure anchors, and per-provider ping streams
// that differ in penetration, ping cadence, noise and dropout.

#include "mobnet/geo.hpp"
#include "mobnet/ingest.hpp"
#include "mobnet/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace mobnet {

struct ProviderProfile {
    std::string name;
    double penetration = 1.0;      // fraction of devices observed, (0, 1]
    double ping_interval_s = 300;  // mean gap between pings
    double noise_sigma_m = 0;      // per-axis location noise
    double dropout_p = 0;          // per-ping drop probability, [0, 1)

    void validate() const
    {
        if (!(penetration >= 0 && penetration <= 1) || !(ping_interval_s > 0) ||
            !(noise_sigma_m >= 0) || !(dropout_p >= 0 && dropout_p < 1))
            throw ConfigError("provider profile " + name + ": parameter out of range");
    }
};

/// Three providers loosely shaped after large GPS panels of differing reach.
inline std::vector<ProviderProfile> default_profiles()
{
    return {{"S", 0.20, 420, 15, 0.05}, {"X", 0.15, 240, 30, 0.10}, {"V", 0.05, 600, 10, 0.02}};
}

struct SyntheticDevice {
    std::string id;
    int home = 0, work = 0, leisure = 0;  // tract indices
    GeoPoint home_pos, work_pos, leisure_pos;
};

struct WorldParams {
    int tracts_per_side = 10;
    int n_devices = 1000;
    std::uint64_t seed = 1;
    std::string county_fips = "99001";
    double origin_lat = 41.80;
    double origin_lon = -88.10;
    double tract_deg = 0.01;
    double min_anchor_separation_m = 300;  // keeps distinct anchors apart for stop detection
};

struct SyntheticWorld {
    WorldParams params;
    std::vector<Tract> tracts;  // row-major grid order
    std::vector<SyntheticDevice> devices;
};

struct Visit {
    int tract = 0;
    GeoPoint pos;
    std::int64_t start = 0, end = 0;  // unix seconds
};

struct TruthTrip {
    Date date;
    std::string device_id;
    std::string o_geoid, d_geoid;
    std::int64_t depart_t = 0, arrive_t = 0;
    friend bool operator==(const TruthTrip&, const TruthTrip&) = default;
};

namespace synth_detail {

inline constexpr double kTravelSpeedMps = 8.0;

inline std::string tract_geoid(const std::string& county, int index)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06d", (index + 1) * 100);
    return county + buf;
}

inline GeoPoint random_point_in(const Tract& t, Rng& rng)
{
    const auto& b = t.bbox;
    const double mx = 0.05 * (b.max_lon - b.min_lon), my = 0.05 * (b.max_lat - b.min_lat);
    return {rng.uniform(b.min_lat + my, b.max_lat - my), rng.uniform(b.min_lon + mx, b.max_lon - mx)};
}

// Draws a point in tract `t` at least `sep` meters from every point in `avoid`.
inline GeoPoint separated_point(const Tract& t, Rng& rng, std::initializer_list<GeoPoint> avoid,
                                double sep)
{
    GeoPoint p = random_point_in(t, rng);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        bool ok = true;
        for (const auto& a : avoid)
            ok = ok && haversine(a, p) >= sep;
        if (ok)
            return p;
        p = random_point_in(t, rng);
    }
    return p;
}

/// Index drawn with probability proportional to 1 / (1 + d_km^2) from tract `from`.
inline int gravity_draw(const std::vector<Tract>& tracts, int from, Rng& rng)
{
    std::vector<double> cumulative(tracts.size());
    double total = 0;
    for (std::size_t j = 0; j < tracts.size(); ++j) {
        const double d = haversine(tracts[std::size_t(from)].centroid, tracts[j].centroid) / 1000.0;
        total += 1.0 / (1.0 + d * d);
        cumulative[j] = total;
    }
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return int(std::min<std::size_t>(std::size_t(it - cumulative.begin()), tracts.size() - 1));
}

inline GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double f)
{
    return {a.lat + (b.lat - a.lat) * f, a.lon + (b.lon - a.lon) * f};
}

}  // namespace synth_detail

/// Gravity kernel weights 1 / (1 + d_km^2) from one tract to every tract.
inline std::vector<double> work_kernel(const SyntheticWorld& world, int from)
{
    std::vector<double> w;
    for (const auto& t : world.tracts) {
        const double d = haversine(world.tracts[std::size_t(from)].centroid, t.centroid) / 1000.0;
        w.push_back(1.0 / (1.0 + d * d));
    }
    return w;
}

inline SyntheticWorld generate_world(const WorldParams& params)
{
    if (params.tracts_per_side < 2 || params.n_devices < 1)
        throw ConfigError("synthetic world needs >= 2 tracts per side and >= 1 device");
    SyntheticWorld world;
    world.params = params;
    const int side = params.tracts_per_side;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            const double lat0 = params.origin_lat + r * params.tract_deg;
            const double lon0 = params.origin_lon + c * params.tract_deg;
            const double lat1 = lat0 + params.tract_deg, lon1 = lon0 + params.tract_deg;
            Polygon poly;
            poly.outer = {{lon0, lat0}, {lon1, lat0}, {lon1, lat1}, {lon0, lat1}, {lon0, lat0}};
            world.tracts.push_back(
                make_tract(synth_detail::tract_geoid(params.county_fips, r * side + c), {poly}));
        }
    for (int i = 0; i < params.n_devices; ++i) {
        Rng rng(mix_seed(params.seed, {0x57041d, std::uint64_t(i)}));
        SyntheticDevice d;
        char buf[32];
        std::snprintf(buf, sizeof buf, "dev%06d", i);
        d.id = buf;
        const double sep = params.min_anchor_separation_m;
        d.home = int(rng.below(world.tracts.size()));
        d.home_pos = synth_detail::random_point_in(world.tracts[std::size_t(d.home)], rng);
        d.work = synth_detail::gravity_draw(world.tracts, d.home, rng);
        d.work_pos = synth_detail::separated_point(world.tracts[std::size_t(d.work)], rng,
                                                   {d.home_pos}, sep);
        d.leisure = synth_detail::gravity_draw(world.tracts, d.home, rng);
        d.leisure_pos = synth_detail::separated_point(world.tracts[std::size_t(d.leisure)], rng,
                                                      {d.home_pos, d.work_pos}, sep);
        world.devices.push_back(std::move(d));
    }
    return world;
}

/// Device list as text (id, anchor tracts and positions); equal worlds serialise equally.
inline std::string serialize_devices(const SyntheticWorld& world)
{
    std::string out = "device_id,home_geoid,home_lat,home_lon,work_geoid,work_lat,work_lon,"
                      "leisure_geoid,leisure_lat,leisure_lon\n";
    for (const auto& d : world.devices) {
        auto put = [&](int tract, const GeoPoint& p) {
            out += ',' + world.tracts[std::size_t(tract)].geoid + ',' + format_double(p.lat) + ',' +
                   format_double(p.lon);
        };
        out += d.id;
        put(d.home, d.home_pos);
        put(d.work, d.work_pos);
        put(d.leisure, d.leisure_pos);
        out += '\n';
    }
    return out;
}

/// The device's visits for one day, covering [local midnight, next midnight).
/// Weekdays: home -> work -> (optional leisure) -> home. Weekends: home, with an
/// optional leisure outing.
inline std::vector<Visit> device_schedule(const SyntheticWorld& world, std::size_t device, Date date,
                                          std::int64_t utc_offset_s = 0)
{
    const auto& d = world.devices.at(device);
    Rng rng(mix_seed(world.params.seed, {0x5c4ed, device, std::uint64_t(date.days())}));
    const std::int64_t day0 = date.start_unix(utc_offset_s);
    auto travel = [](const GeoPoint& a, const GeoPoint& b) {
        return std::int64_t(std::llround(haversine(a, b) / synth_detail::kTravelSpeedMps)) + 60;
    };

    std::vector<Visit> visits;
    std::int64_t t = day0;
    auto stay = [&](int tract, const GeoPoint& pos, std::int64_t dwell) {
        if (!visits.empty())
            t += travel(visits.back().pos, pos);
        visits.push_back({tract, pos, t, t + dwell});
        t += dwell;
    };
    const bool weekend = date.weekday() >= 5;
    if (!weekend) {
        stay(d.home, d.home_pos, 7 * 3600 + std::int64_t(rng.uniform(0, 2 * 3600)));
        stay(d.work, d.work_pos, 8 * 3600 + std::int64_t(rng.uniform(-3600, 3600)));
        if (rng.bernoulli(0.4))
            stay(d.leisure, d.leisure_pos, std::int64_t(rng.uniform(2700, 7200)));
    } else if (rng.bernoulli(0.7)) {
        stay(d.home, d.home_pos, 10 * 3600 + std::int64_t(rng.uniform(0, 3 * 3600)));
        stay(d.leisure, d.leisure_pos, std::int64_t(rng.uniform(3600, 3 * 3600)));
    } else {
        visits.push_back({d.home, d.home_pos, day0, day0 + 86400});
        return visits;
    }
    t += travel(visits.back().pos, d.home_pos);
    visits.push_back({d.home, d.home_pos, t, day0 + 86400});
    return visits;
}

inline std::vector<TruthTrip> schedule_trips(const SyntheticWorld& world, std::size_t device,
                                             Date date, const std::vector<Visit>& visits)
{
    std::vector<TruthTrip> out;
    for (std::size_t k = 0; k + 1 < visits.size(); ++k)
        out.push_back({date, world.devices[device].id,
                       world.tracts[std::size_t(visits[k].tract)].geoid,
                       world.tracts[std::size_t(visits[k + 1].tract)].geoid, visits[k].end,
                       visits[k + 1].start});
    return out;
}

/// Whether the provider observes the device; fixed per (provider, device).
inline bool provider_observes(const ProviderProfile& profile, std::size_t device, std::uint64_t seed)
{
    Rng rng(mix_seed(seed, {hash_string(profile.name), device, 0x9a4e1}));
    return rng.uniform() < profile.penetration;
}

struct EmittedDay {
    std::vector<Ping> pings;       // grouped by device, time-ordered within a device
    std::vector<TruthTrip> truth;  // scheduled trips of observed devices
};

/// Pings of one device-day: exponential gaps plus one fix at every dwell start
/// and end (motion-triggered fixes), then independent dropout and Gaussian noise.
inline std::vector<Ping> device_day_pings(const SyntheticWorld& world, const ProviderProfile& profile,
                                          std::size_t device, Date date, std::uint64_t seed,
                                          const std::vector<Visit>& visits)
{
    Rng rng(mix_seed(seed, {hash_string(profile.name), device, std::uint64_t(date.days()), 0x91e6}));
    const std::int64_t day0 = visits.front().start;
    const std::int64_t day1 = visits.back().end;

    std::vector<std::int64_t> times;
    for (double t = double(day0) + rng.exponential(profile.ping_interval_s); t < double(day1);
         t += rng.exponential(profile.ping_interval_s))
        times.push_back(std::int64_t(t));
    for (const auto& v : visits) {
        times.push_back(v.start);
        times.push_back(std::min(v.end, day1 - 1));
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    auto position = [&](std::int64_t t) {
        for (std::size_t k = 0; k < visits.size(); ++k) {
            if (t >= visits[k].start && t <= visits[k].end)
                return visits[k].pos;
            if (k + 1 < visits.size() && t > visits[k].end && t < visits[k + 1].start) {
                const double f = double(t - visits[k].end) / double(visits[k + 1].start - visits[k].end);
                return synth_detail::interpolate(visits[k].pos, visits[k + 1].pos, f);
            }
        }
        return visits.back().pos;
    };

    constexpr double kMetersPerDegree = kEarthRadiusM * M_PI / 180.0;
    std::vector<Ping> out;
    const auto& id = world.devices[device].id;
    for (auto t : times) {
        if (rng.bernoulli(profile.dropout_p))
            continue;
        GeoPoint p = position(t);
        if (profile.noise_sigma_m > 0) {
            const double north = rng.normal() * profile.noise_sigma_m;
            const double east = rng.normal() * profile.noise_sigma_m;
            p.lat += north / kMetersPerDegree;
            p.lon += east / (kMetersPerDegree * std::cos(p.lat * M_PI / 180.0));
        }
        out.push_back({id, t, p});
    }
    return out;
}

inline EmittedDay emit_day(const SyntheticWorld& world, const ProviderProfile& profile, Date date,
                           std::uint64_t seed, std::int64_t utc_offset_s = 0)
{
    profile.validate();
    EmittedDay out;
    for (std::size_t i = 0; i < world.devices.size(); ++i) {
        if (!provider_observes(profile, i, seed))
            continue;
        const auto visits = device_schedule(world, i, date, utc_offset_s);
        auto pings = device_day_pings(world, profile, i, date, seed, visits);
        out.pings.insert(out.pings.end(), std::make_move_iterator(pings.begin()),
                         std::make_move_iterator(pings.end()));
        auto trips = schedule_trips(world, i, date, visits);
        out.truth.insert(out.truth.end(), trips.begin(), trips.end());
    }
    return out;
}

/// Ping file text in the ingest schema. Coordinates keep 7 decimals (~1 cm).
inline std::string serialize_pings(const std::vector<Ping>& pings)
{
    std::string out = "device_id,timestamp,lat,lon\n";
    for (const auto& p : pings) {
        out += p.device_id;
        out += ',';
        out += std::to_string(p.t);
        out += ',';
        out += format_fixed(p.pos.lat, 7);
        out += ',';
        out += format_fixed(p.pos.lon, 7);
        out += '\n';
    }
    return out;
}

inline std::string serialize_truth(const std::vector<TruthTrip>& trips)
{
    std::string out = "date,device_id,o_geoid,d_geoid,depart_t,arrive_t\n";
    for (const auto& t : trips)
        out += t.date.str() + ',' + t.device_id + ',' + t.o_geoid + ',' + t.d_geoid + ',' +
               std::to_string(t.depart_t) + ',' + std::to_string(t.arrive_t) + '\n';
    return out;
}

}  // namespace mobnet
