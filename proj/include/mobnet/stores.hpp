#pragma once

// On-disk formats of the intermediate stores and analysis outputs. Every
// writer has a matching reader with parse(serialize(x)) == x; doubles are
// written in shortest round-trip form.

#include "mobnet/ingest.hpp"
#include "mobnet/micro.hpp"
#include "mobnet/motifs.hpp"
#include "mobnet/similarity.hpp"
#include "mobnet/util.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mobnet {

namespace store_detail {

/// Calls fn(fields, line_no) for every data row after checking the header.
template <typename Fn>
void for_each_row(std::string_view text, std::string_view header, Fn&& fn)
{
    std::size_t pos = 0, line_no = 0;
    bool saw_header = false;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty())
            continue;
        if (!saw_header) {
            if (line != header)
                throw DataError("unexpected header '" + std::string(line) + "'");
            saw_header = true;
            continue;
        }
        const auto fields = split_fields(line);
        try {
            fn(fields, line_no);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!saw_header)
        throw DataError("missing header '" + std::string(header) + "'");
}

inline void expect_fields(const std::vector<std::string_view>& f, std::size_t n)
{
    if (f.size() != n)
        throw DataError("expected " + std::to_string(n) + " fields, got " + std::to_string(f.size()));
}

template <typename T>
T number(std::string_view s)
{
    const auto v = parse_number<T>(s);
    if (!v)
        throw DataError("bad number '" + std::string(s) + "'");
    return *v;
}

inline std::optional<std::string> optional_text(std::string_view s)
{
    return s.empty() ? std::nullopt : std::optional<std::string>(std::string(s));
}

inline void put_stop_fields(std::string& out, const Stop& s)
{
    out += std::to_string(s.t_start);
    out += ',';
    out += std::to_string(s.t_end);
    out += ',';
    out += format_double(s.pos.lat);
    out += ',';
    out += format_double(s.pos.lon);
    out += ',';
    out += s.geoid.value_or("");
}

inline Stop read_stop_fields(const std::string& device, const std::vector<std::string_view>& f,
                             std::size_t at)
{
    Stop s;
    s.device_id = device;
    s.t_start = number<std::int64_t>(f[at]);
    s.t_end = number<std::int64_t>(f[at + 1]);
    s.pos = {number<double>(f[at + 2]), number<double>(f[at + 3])};
    s.geoid = optional_text(f[at + 4]);
    return s;
}

}  // namespace store_detail

// ---------------------------------------------------------------------------
// Stop and trip stores, one file per (source, county, date)

inline constexpr std::string_view kStopHeader = "device_id,t_start,t_end,lat,lon,geoid";
inline constexpr std::string_view kTripHeader =
    "device_id,o_t_start,o_t_end,o_lat,o_lon,o_geoid,d_t_start,d_t_end,d_lat,d_lon,d_geoid,distance_m";

inline std::string serialize_stops(std::span<const Stop> stops)
{
    std::string out(kStopHeader);
    out += '\n';
    for (const auto& s : stops) {
        out += s.device_id;
        out += ',';
        store_detail::put_stop_fields(out, s);
        out += '\n';
    }
    return out;
}

inline std::vector<Stop> parse_stops(std::string_view text)
{
    std::vector<Stop> out;
    store_detail::for_each_row(text, kStopHeader, [&](const auto& f, std::size_t) {
        store_detail::expect_fields(f, 6);
        out.push_back(store_detail::read_stop_fields(std::string(f[0]), f, 1));
    });
    return out;
}

inline std::string serialize_trips(std::span<const Trip> trips)
{
    std::string out(kTripHeader);
    out += '\n';
    for (const auto& t : trips) {
        out += t.device_id;
        out += ',';
        store_detail::put_stop_fields(out, t.origin);
        out += ',';
        store_detail::put_stop_fields(out, t.dest);
        out += ',';
        out += format_double(t.distance_m);
        out += '\n';
    }
    return out;
}

inline std::vector<Trip> parse_trips(std::string_view text)
{
    std::vector<Trip> out;
    store_detail::for_each_row(text, kTripHeader, [&](const auto& f, std::size_t) {
        store_detail::expect_fields(f, 12);
        Trip t;
        t.device_id = std::string(f[0]);
        t.origin = store_detail::read_stop_fields(t.device_id, f, 1);
        t.dest = store_detail::read_stop_fields(t.device_id, f, 6);
        t.distance_m = store_detail::number<double>(f[11]);
        out.push_back(std::move(t));
    });
    return out;
}

// ---------------------------------------------------------------------------
// Per-day network sizes, written next to the edge and node files so that an
// empty day (no rows) can be told apart from a missing one.

struct NetworkDay {
    Date date;
    std::int64_t nodes = 0;
    std::int64_t edges = 0;
    std::int64_t filtered_trips = 0;
    friend bool operator==(const NetworkDay&, const NetworkDay&) = default;
};

inline constexpr std::string_view kNetworkDayHeader = "date,nodes,edges,filtered_trips";

inline std::string serialize_network_days(std::span<const NetworkDay> days)
{
    std::string out(kNetworkDayHeader);
    out += '\n';
    for (const auto& d : days)
        out += d.date.str() + ',' + std::to_string(d.nodes) + ',' + std::to_string(d.edges) + ',' +
               std::to_string(d.filtered_trips) + '\n';
    return out;
}

inline std::vector<NetworkDay> parse_network_days(std::string_view text)
{
    std::vector<NetworkDay> out;
    store_detail::for_each_row(text, kNetworkDayHeader, [&](const auto& f, std::size_t) {
        store_detail::expect_fields(f, 4);
        out.push_back({Date::parse(f[0]), store_detail::number<std::int64_t>(f[1]),
                       store_detail::number<std::int64_t>(f[2]),
                       store_detail::number<std::int64_t>(f[3])});
    });
    return out;
}

// ---------------------------------------------------------------------------
// Macro time series: one file per (source, county, metric)

using DatedValues = std::vector<std::pair<Date, std::optional<double>>>;

inline constexpr std::string_view kSeriesHeader = "date,value";

inline std::string serialize_series(const DatedValues& values)
{
    std::string out(kSeriesHeader);
    out += '\n';
    for (const auto& [d, v] : values)
        out += d.str() + ',' + format_optional(v) + '\n';
    return out;
}

inline DatedValues parse_series(std::string_view text)
{
    DatedValues out;
    store_detail::for_each_row(text, kSeriesHeader, [&](const auto& f, std::size_t) {
        store_detail::expect_fields(f, 2);
        out.emplace_back(Date::parse(f[0]), parse_optional(f[1]));
    });
    return out;
}

// ---------------------------------------------------------------------------
// Motif census per (source, county): seven rows per day

struct MotifRow {
    Date date;
    int type = 0;
    std::optional<std::uint64_t> count;  // missing when the day has no census
    std::optional<double> share;
    std::optional<double> share_ma7;
    std::optional<double> median_avg_distance_m;
    std::optional<double> median_avg_volume;
    friend bool operator==(const MotifRow&, const MotifRow&) = default;
};

inline constexpr std::string_view kMotifHeader =
    "date,type,count,share,share_ma7,median_avg_distance_m,median_avg_volume";

inline std::string serialize_motif_rows(std::span<const MotifRow> rows)
{
    std::string out(kMotifHeader);
    out += '\n';
    for (const auto& r : rows)
        out += r.date.str() + ',' + std::to_string(r.type) + ',' +
               (r.count ? std::to_string(*r.count) : std::string("NA")) + ',' + format_optional(r.share) +
               ',' + format_optional(r.share_ma7) + ',' + format_optional(r.median_avg_distance_m) + ',' +
               format_optional(r.median_avg_volume) + '\n';
    return out;
}

inline std::vector<MotifRow> parse_motif_rows(std::string_view text)
{
    std::vector<MotifRow> out;
    store_detail::for_each_row(text, kMotifHeader, [&](const auto& f, std::size_t) {
        store_detail::expect_fields(f, 7);
        MotifRow r;
        r.date = Date::parse(f[0]);
        r.type = store_detail::number<int>(f[1]);
        if (r.type < 0 || r.type >= kMotifTypes)
            throw DataError("motif type out of range");
        if (f[2] != "NA")
            r.count = store_detail::number<std::uint64_t>(f[2]);
        r.share = parse_optional(f[3]);
        r.share_ma7 = parse_optional(f[4]);
        r.median_avg_distance_m = parse_optional(f[5]);
        r.median_avg_volume = parse_optional(f[6]);
        out.push_back(r);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Tract-day metrics per (source, county). The raw trip count trails the
// device-normalised columns.

inline constexpr std::string_view kMicroHeader =
    "date,geoid,device_count,avg_trip_count,avg_distance_m,avg_travel_time_s,avg_rog_m,trip_count";

inline std::string serialize_micro(std::span<const TractDayMetrics> rows)
{
    std::string out(kMicroHeader);
    out += '\n';
    for (const auto& m : rows)
        out += m.date.str() + ',' + m.geoid + ',' + std::to_string(m.device_count) + ',' +
               format_double(m.avg_trip_count) + ',' + format_double(m.avg_distance_m) + ',' +
               format_double(m.avg_travel_time_s) + ',' + format_double(m.avg_rog_m) + ',' +
               std::to_string(m.trip_count) + '\n';
    return out;
}

inline std::vector<TractDayMetrics> parse_micro(std::string_view text)
{
    using store_detail::number;
    std::vector<TractDayMetrics> out;
    store_detail::for_each_row(text, kMicroHeader, [&](const auto& f, std::size_t) {
        store_detail::expect_fields(f, 8);
        TractDayMetrics m;
        m.date = Date::parse(f[0]);
        m.geoid = std::string(f[1]);
        m.device_count = number<std::int64_t>(f[2]);
        m.avg_trip_count = number<double>(f[3]);
        m.avg_distance_m = number<double>(f[4]);
        m.avg_travel_time_s = number<double>(f[5]);
        m.avg_rog_m = number<double>(f[6]);
        m.trip_count = number<std::int64_t>(f[7]);
        out.push_back(std::move(m));
    });
    return out;
}

// ---------------------------------------------------------------------------
// Verdict tables: fips,county,metric,pair,score_<pair>...,tie_flag

struct VerdictRow {
    std::string county_fips;
    std::string county_name;
    SimilarityVerdict verdict;
    friend bool operator==(const VerdictRow& a, const VerdictRow& b)
    {
        return a.county_fips == b.county_fips && a.county_name == b.county_name &&
               a.verdict.metric_name == b.verdict.metric_name && a.verdict.pair == b.verdict.pair &&
               a.verdict.scores == b.verdict.scores && a.verdict.tie == b.verdict.tie;
    }
};

inline std::string verdict_header(const std::vector<std::string>& pair_labels)
{
    std::string h = "fips,county,metric,pair";
    for (const auto& l : pair_labels)
        h += ",score_" + l;
    return h + ",tie_flag";
}

inline std::string serialize_verdicts(const std::vector<std::string>& pair_labels,
                                      std::span<const VerdictRow> rows)
{
    std::string out = verdict_header(pair_labels) + '\n';
    for (const auto& r : rows) {
        out += r.county_fips + ',' + r.county_name + ',' + r.verdict.metric_name + ',' + r.verdict.pair;
        for (const auto& [label, score] : r.verdict.scores)
            out += ',' + format_optional(score);
        out += r.verdict.tie ? ",1\n" : ",0\n";
    }
    return out;
}

inline std::vector<VerdictRow> parse_verdicts(const std::vector<std::string>& pair_labels,
                                              std::string_view text)
{
    std::vector<VerdictRow> out;
    const std::string header = verdict_header(pair_labels);
    store_detail::for_each_row(text, header, [&](const auto& f, std::size_t) {
        store_detail::expect_fields(f, 5 + pair_labels.size());
        VerdictRow r;
        r.county_fips = std::string(f[0]);
        r.county_name = std::string(f[1]);
        r.verdict.county_fips = r.county_fips;
        r.verdict.metric_name = std::string(f[2]);
        r.verdict.pair = std::string(f[3]);
        for (std::size_t i = 0; i < pair_labels.size(); ++i)
            r.verdict.scores.emplace_back(pair_labels[i], parse_optional(f[4 + i]));
        const auto tie = f[4 + pair_labels.size()];
        if (tie != "0" && tie != "1")
            throw DataError("tie_flag must be 0 or 1");
        r.verdict.tie = tie == "1";
        out.push_back(std::move(r));
    });
    return out;
}

}  // namespace mobnet
