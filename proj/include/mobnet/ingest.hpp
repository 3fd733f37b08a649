#pragma once

// Raw ping parsing, staypoint (stop) detection and trip extraction.

#include "mobnet/geo.hpp"
#include "mobnet/util.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

namespace mobnet {

struct Ping {
    std::string device_id;
    std::int64_t t = 0;  // unix seconds
    GeoPoint pos;
    friend bool operator==(const Ping&, const Ping&) = default;
};

struct Stop {
    std::string device_id;
    std::int64_t t_start = 0;
    std::int64_t t_end = 0;
    GeoPoint pos;  // medoid of member pings
    std::optional<std::string> geoid;
    friend bool operator==(const Stop&, const Stop&) = default;
};

struct Trip {
    std::string device_id;
    Stop origin;
    Stop dest;
    double distance_m = 0;

    std::int64_t depart_t() const { return origin.t_end; }
    std::int64_t arrive_t() const { return dest.t_start; }
    std::int64_t duration_s() const { return arrive_t() - depart_t(); }
    friend bool operator==(const Trip&, const Trip&) = default;
};

struct StopParams {
    double radius_m = 100.0;
    std::int64_t min_dwell_s = 300;
};

struct RowDiagnostic {
    std::size_t line = 0;
    std::string reason;
};

struct PingParseResult {
    std::vector<Ping> pings;
    std::vector<RowDiagnostic> rejected;

    std::size_t total_rows() const { return pings.size() + rejected.size(); }
};

/// Parses "device_id,timestamp,lat,lon" rows. A header line is recognised only
/// by its first column name; bad rows are reported with their 1-based line number.
inline PingParseResult parse_pings(std::string_view text)
{
    PingParseResult out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        const std::string_view line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty())
            continue;
        const auto fields = split_fields(line);
        if (first) {
            first = false;
            std::string head(trim(fields[0]));
            std::transform(head.begin(), head.end(), head.begin(), ::tolower);
            if (head == "device_id")
                continue;
        }
        if (fields.size() != 4) {
            out.rejected.push_back({line_no, "expected 4 fields"});
            continue;
        }
        const auto device = trim(fields[0]);
        if (device.empty()) {
            out.rejected.push_back({line_no, "empty device_id"});
            continue;
        }
        const auto t = parse_number<std::int64_t>(fields[1]);
        if (!t || *t < 0) {
            out.rejected.push_back({line_no, "bad timestamp"});
            continue;
        }
        const auto lat = parse_number<double>(fields[2]);
        const auto lon = parse_number<double>(fields[3]);
        if (!lat || !lon) {
            out.rejected.push_back({line_no, "bad coordinate"});
            continue;
        }
        const GeoPoint p{*lat, *lon};
        if (!p.valid()) {
            out.rejected.push_back({line_no, "coordinate out of range"});
            continue;
        }
        out.pings.push_back({std::string(device), *t, p});
    }
    return out;
}

/// Reads a whole file, transparently decompressing gzip.
inline std::string read_text_file(const std::string& path)
{
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f)
        throw DataError("cannot open " + path);
    std::string data;
    char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof buf)) > 0)
        data.append(buf, std::size_t(n));
    int err = 0;
    const char* msg = gzerror(f, &err);
    const bool failed = n < 0 || (err != Z_OK && err != Z_STREAM_END);
    std::string what = failed ? std::string(msg) : std::string();
    gzclose(f);
    if (failed)
        throw DataError("read error in " + path + ": " + what);
    return data;
}

/// Stable grouping of pings by device, each group sorted by time.
inline std::vector<std::vector<Ping>> group_by_device(std::vector<Ping> pings)
{
    std::stable_sort(pings.begin(), pings.end(), [](const Ping& a, const Ping& b) {
        return a.device_id != b.device_id ? a.device_id < b.device_id : a.t < b.t;
    });
    std::vector<std::vector<Ping>> groups;
    for (auto& p : pings) {
        if (groups.empty() || groups.back().front().device_id != p.device_id)
            groups.emplace_back();
        groups.back().push_back(std::move(p));
    }
    return groups;
}

namespace ingest_detail {

inline std::size_t medoid(std::span<const Ping> members)
{
    std::size_t best = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < members.size(); ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < members.size() && sum < best_sum; ++j)
            if (i != j)
                sum += haversine(members[i].pos, members[j].pos);
        if (sum < best_sum) {
            best_sum = sum;
            best = i;
        }
    }
    return best;
}

}  // namespace ingest_detail

/// Anchor-based greedy staypoint detection over one device's time-sorted pings.
///
/// A cluster starts at an anchor ping and absorbs following pings while they
/// stay within radius_m of the anchor. If the cluster spans at least
/// min_dwell_s it becomes a Stop and scanning resumes after it; otherwise the
/// anchor advances by one ping.
inline std::vector<Stop> detect_stops(std::span<const Ping> pings, const StopParams& params = {})
{
    if (params.min_dwell_s <= 0 || !(params.radius_m >= 0))
        throw std::invalid_argument("detect_stops: min_dwell_s must be positive");
    for (std::size_t i = 1; i < pings.size(); ++i)
        if (pings[i].t < pings[i - 1].t)
            throw DataError("detect_stops: pings not sorted by time (device " +
                            pings[i].device_id + ")");

    std::vector<Stop> stops;
    std::size_t i = 0;
    while (i < pings.size()) {
        std::size_t j = i + 1;
        while (j < pings.size() && haversine(pings[i].pos, pings[j].pos) <= params.radius_m)
            ++j;
        if (pings[j - 1].t - pings[i].t >= params.min_dwell_s) {
            const auto members = pings.subspan(i, j - i);
            Stop s;
            s.device_id = pings[i].device_id;
            s.t_start = pings[i].t;
            s.t_end = pings[j - 1].t;
            s.pos = members[ingest_detail::medoid(members)].pos;
            stops.push_back(std::move(s));
            i = j;
        } else {
            ++i;
        }
    }
    return stops;
}

inline void assign_geoids(std::vector<Stop>& stops, const TractIndex& index)
{
    for (auto& s : stops)
        s.geoid = index.locate(s.pos);
}

struct TripExtraction {
    std::vector<Trip> trips;
    std::size_t dropped_no_geoid = 0;
};

/// One trip per consecutive stop pair; pairs with no geoid at either end are dropped.
inline TripExtraction extract_trips(std::span<const Stop> stops)
{
    TripExtraction out;
    for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
        const Stop& o = stops[i];
        const Stop& d = stops[i + 1];
        if (!o.geoid && !d.geoid) {
            ++out.dropped_no_geoid;
            continue;
        }
        out.trips.push_back({o.device_id, o, d, haversine(o.pos, d.pos)});
    }
    return out;
}

}  // namespace mobnet
