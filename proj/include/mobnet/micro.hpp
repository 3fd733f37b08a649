#pragma once

// Per-tract daily mobility metrics and the tract rankings compared across sources.

#include "mobnet/geo.hpp"
#include "mobnet/ingest.hpp"
#include "mobnet/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace mobnet {

/// Root-mean-square haversine distance of the positions from their coordinate mean.
inline double radius_of_gyration(std::span<const GeoPoint> positions)
{
    if (positions.empty())
        throw std::invalid_argument("radius_of_gyration: no positions");
    GeoPoint center{0, 0};
    for (const auto& p : positions) {
        center.lat += p.lat;
        center.lon += p.lon;
    }
    center.lat /= double(positions.size());
    center.lon /= double(positions.size());
    double sum_sq = 0;
    for (const auto& p : positions) {
        const double d = haversine(p, center);
        sum_sq += d * d;
    }
    return std::sqrt(sum_sq / double(positions.size()));
}

struct TractDayMetrics {
    std::string geoid;
    Date date;
    std::int64_t device_count = 0;
    std::int64_t trip_count = 0;  // raw count of trips touching the tract
    double avg_trip_count = 0;    // trip_count / device_count
    double avg_distance_m = 0;
    double avg_travel_time_s = 0;
    double avg_rog_m = 0;
    friend bool operator==(const TractDayMetrics&, const TractDayMetrics&) = default;
};

/// Full-day radius of gyration of every device, from its stop positions.
inline std::map<std::string, double> device_radii(std::span<const Stop> stops)
{
    std::map<std::string, std::vector<GeoPoint>> positions;
    for (const auto& s : stops)
        positions[s.device_id].push_back(s.pos);
    std::map<std::string, double> out;
    for (const auto& [device, pts] : positions)
        out.emplace(device, radius_of_gyration(pts));
    return out;
}

namespace micro_detail {

struct Accumulator {
    std::int64_t trips = 0;
    double distance = 0;
    double duration = 0;
    std::set<std::string> devices;
};

inline TractDayMetrics finish(const std::string& geoid, Date date, const Accumulator& acc,
                              const std::map<std::string, double>& radii)
{
    TractDayMetrics m;
    m.geoid = geoid;
    m.date = date;
    m.device_count = std::int64_t(acc.devices.size());
    m.trip_count = acc.trips;
    m.avg_trip_count = double(acc.trips) / double(m.device_count);
    m.avg_distance_m = acc.distance / double(acc.trips);
    m.avg_travel_time_s = acc.duration / double(acc.trips);
    double rog = 0;
    for (const auto& d : acc.devices) {
        const auto it = radii.find(d);
        rog += it == radii.end() ? 0.0 : it->second;
    }
    m.avg_rog_m = rog / double(m.device_count);
    return m;
}

}  // namespace micro_detail

/// Metrics over the trips that start or end in `geoid`; nullopt when there are none.
inline std::optional<TractDayMetrics> tract_day_metrics(std::span<const Trip> trips,
                                                        std::span<const Stop> stops,
                                                        const std::string& geoid, Date date)
{
    micro_detail::Accumulator acc;
    for (const auto& t : trips) {
        if (t.origin.geoid != geoid && t.dest.geoid != geoid)
            continue;
        ++acc.trips;
        acc.distance += t.distance_m;
        acc.duration += double(t.duration_s());
        acc.devices.insert(t.device_id);
    }
    if (acc.trips == 0)
        return std::nullopt;
    return micro_detail::finish(geoid, date, acc, device_radii(stops));
}

/// tract_day_metrics for every tract touched by a trip, ordered by geoid.
/// Only geoids accepted by `keep` (e.g. tracts of one county) are reported.
template <typename Keep>
std::vector<TractDayMetrics> all_tract_day_metrics(std::span<const Trip> trips,
                                                   std::span<const Stop> stops, Date date,
                                                   Keep&& keep)
{
    std::map<std::string, micro_detail::Accumulator> acc;
    auto add = [&](const std::string& g, const Trip& t) {
        auto& a = acc[g];
        ++a.trips;
        a.distance += t.distance_m;
        a.duration += double(t.duration_s());
        a.devices.insert(t.device_id);
    };
    for (const auto& t : trips) {
        if (t.origin.geoid && keep(*t.origin.geoid))
            add(*t.origin.geoid, t);
        if (t.dest.geoid && keep(*t.dest.geoid) && t.dest.geoid != t.origin.geoid)
            add(*t.dest.geoid, t);
    }
    const auto radii = device_radii(stops);
    std::vector<TractDayMetrics> out;
    for (const auto& [g, a] : acc)
        out.push_back(micro_detail::finish(g, date, a, radii));
    return out;
}

inline std::vector<TractDayMetrics> all_tract_day_metrics(std::span<const Trip> trips,
                                                          std::span<const Stop> stops, Date date)
{
    return all_tract_day_metrics(trips, stops, date, [](const std::string&) { return true; });
}

/// Descending ranks aligned with `order`: largest value gets rank 1, tied values
/// share the mean of their positions, tracts without a value get k+1.
inline std::vector<double> rank_tracts(const std::vector<std::string>& order,
                                       const std::map<std::string, double>& values)
{
    std::vector<std::pair<double, std::size_t>> present;  // value, position in order
    for (std::size_t i = 0; i < order.size(); ++i)
        if (auto it = values.find(order[i]); it != values.end())
            present.emplace_back(it->second, i);
    const double pad = double(present.size()) + 1.0;
    std::vector<double> ranks(order.size(), pad);
    std::stable_sort(present.begin(), present.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < present.size();) {
        std::size_t j = i;
        while (j < present.size() && present[j].first == present[i].first)
            ++j;
        const double rank = (double(i + 1) + double(j)) / 2.0;  // mean of positions i+1..j
        for (std::size_t k = i; k < j; ++k)
            ranks[present[k].second] = rank;
        i = j;
    }
    return ranks;
}

inline const std::vector<std::string>& micro_metric_names()
{
    static const std::vector<std::string> names{"avg_trip_count", "avg_distance_m",
                                                "avg_travel_time_s", "avg_rog_m"};
    return names;
}

inline double micro_value(const TractDayMetrics& m, const std::string& name)
{
    if (name == "avg_trip_count") return m.avg_trip_count;
    if (name == "avg_distance_m") return m.avg_distance_m;
    if (name == "avg_travel_time_s") return m.avg_travel_time_s;
    if (name == "avg_rog_m") return m.avg_rog_m;
    throw std::invalid_argument("unknown micro metric " + name);
}

}  // namespace mobnet
