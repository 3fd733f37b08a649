#pragma once

// Daily undirected origin-destination network between census tracts, plus a
// compact integer-indexed graph used by the metric and motif code.

#include "mobnet/geo.hpp"
#include "mobnet/ingest.hpp"
#include "mobnet/util.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace mobnet {

struct MobilityNetwork {
    std::string county_fips;
    Date date;
    std::map<std::string, GeoPoint> nodes;                           // geoid -> centroid
    std::map<std::pair<std::string, std::string>, std::int64_t> edges;  // first < second

    std::size_t node_count() const { return nodes.size(); }
    std::size_t edge_count() const { return edges.size(); }
    friend bool operator==(const MobilityNetwork&, const MobilityNetwork&) = default;
};

struct NetworkBuild {
    MobilityNetwork network;
    std::size_t filtered_trips = 0;  // endpoint missing or outside the county
};

inline bool geoid_in_county(const std::string& geoid, const std::string& county_fips)
{
    return geoid.compare(0, county_fips.size(), county_fips) == 0;
}

/// Aggregates trips into one county-day network. Weight of {a,b} counts trips in
/// both directions; intra-tract trips mark the tract active but add no edge.
inline NetworkBuild build_daily_network(std::span<const Trip> trips, const std::string& county_fips,
                                        Date date, const TractIndex& index)
{
    NetworkBuild out;
    out.network.county_fips = county_fips;
    out.network.date = date;
    auto& net = out.network;
    for (const auto& trip : trips) {
        const auto& o = trip.origin.geoid;
        const auto& d = trip.dest.geoid;
        const Tract* to = o ? index.find(*o) : nullptr;
        const Tract* td = d ? index.find(*d) : nullptr;
        if (!to || !td || !geoid_in_county(*o, county_fips) || !geoid_in_county(*d, county_fips)) {
            ++out.filtered_trips;
            continue;
        }
        net.nodes.emplace(*o, to->centroid);
        net.nodes.emplace(*d, td->centroid);
        if (*o == *d)
            continue;
        auto key = *o < *d ? std::make_pair(*o, *d) : std::make_pair(*d, *o);
        ++net.edges[key];
    }
    return out;
}

struct NetworkSizeSummary {
    double mean_nodes = 0;
    double mean_edges = 0;

    std::string nodes_str() const { return format_fixed(mean_nodes, 2); }
    std::string edges_str() const { return format_fixed(mean_edges, 2); }
};

inline NetworkSizeSummary network_size_summary(std::span<const MobilityNetwork> networks)
{
    if (networks.empty())
        throw std::invalid_argument("network_size_summary: no networks");
    std::uint64_t nodes = 0, edges = 0;
    for (const auto& n : networks) {
        nodes += n.node_count();
        edges += n.edge_count();
    }
    return {double(nodes) / double(networks.size()), double(edges) / double(networks.size())};
}

// ---------------------------------------------------------------------------
// Serialisation: one edge file and one node file per county-month.

inline std::string serialize_edges(std::span<const MobilityNetwork> networks)
{
    std::string out = "date,origin_geoid,dest_geoid,weight\n";
    for (const auto& net : networks) {
        const std::string date = net.date.str();
        for (const auto& [key, w] : net.edges)
            out += date + ',' + key.first + ',' + key.second + ',' + std::to_string(w) + '\n';
    }
    return out;
}

inline std::string serialize_nodes(std::span<const MobilityNetwork> networks)
{
    std::string out = "date,geoid,lat,lon\n";
    for (const auto& net : networks) {
        const std::string date = net.date.str();
        for (const auto& [geoid, c] : net.nodes)
            out += date + ',' + geoid + ',' + format_double(c.lat) + ',' + format_double(c.lon) +
                   '\n';
    }
    return out;
}

namespace network_detail {

template <typename Fn>
void for_each_row(std::string_view text, std::size_t n_fields, Fn&& fn)
{
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (++line_no == 1 || line.empty())
            continue;
        auto f = split_fields(line);
        if (f.size() != n_fields)
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(n_fields) + " fields");
        fn(f, line_no);
    }
}

}  // namespace network_detail

/// Inverse of serialize_edges + serialize_nodes. Networks come back ordered by date.
inline std::vector<MobilityNetwork> parse_networks(std::string_view edges_csv,
                                                   std::string_view nodes_csv,
                                                   const std::string& county_fips)
{
    std::map<Date, MobilityNetwork> by_date;
    auto get = [&](std::string_view date) -> MobilityNetwork& {
        const Date d = Date::parse(date);
        auto& net = by_date[d];
        net.county_fips = county_fips;
        net.date = d;
        return net;
    };
    network_detail::for_each_row(nodes_csv, 4, [&](auto& f, std::size_t line) {
        const auto lat = parse_number<double>(f[2]);
        const auto lon = parse_number<double>(f[3]);
        if (!lat || !lon)
            throw DataError("nodes line " + std::to_string(line) + ": bad coordinate");
        get(f[0]).nodes.emplace(std::string(f[1]), GeoPoint{*lat, *lon});
    });
    network_detail::for_each_row(edges_csv, 4, [&](auto& f, std::size_t line) {
        const auto w = parse_number<std::int64_t>(f[3]);
        std::string a(f[1]), b(f[2]);
        if (!w || *w < 1 || !(a < b))
            throw DataError("edges line " + std::to_string(line) + ": bad edge row");
        auto& net = get(f[0]);
        if (!net.nodes.count(a) || !net.nodes.count(b))
            throw DataError("edges line " + std::to_string(line) + ": endpoint not in node list");
        net.edges[{a, b}] = *w;
    });
    std::vector<MobilityNetwork> out;
    for (auto& [d, net] : by_date)
        out.push_back(std::move(net));
    return out;
}

// ---------------------------------------------------------------------------
// Indexed graph

/// Simple undirected weighted graph on nodes 0..n-1 with sorted adjacency lists.
class Graph {
public:
    struct Edge {
        int u = 0, v = 0;
        std::int64_t weight = 1;
    };

    Graph() = default;

    explicit Graph(int n, std::span<const Edge> edges = {}) : adj_(std::size_t(n)), w_(std::size_t(n))
    {
        std::vector<std::vector<std::pair<int, std::int64_t>>> tmp(static_cast<std::size_t>(n));
        for (const auto& e : edges) {
            if (e.u == e.v || e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
                throw std::invalid_argument("Graph: bad edge");
            tmp[std::size_t(e.u)].emplace_back(e.v, e.weight);
            tmp[std::size_t(e.v)].emplace_back(e.u, e.weight);
        }
        for (std::size_t i = 0; i < tmp.size(); ++i) {
            auto& list = tmp[i];
            std::sort(list.begin(), list.end());
            for (std::size_t k = 0; k < list.size(); ++k) {
                if (k > 0 && list[k].first == list[k - 1].first) {
                    w_[i].back() += list[k].second;  // parallel edges merge
                    continue;
                }
                adj_[i].push_back(list[k].first);
                w_[i].push_back(list[k].second);
            }
            edge_count_ += adj_[i].size();
        }
        edge_count_ /= 2;
    }

    int size() const { return int(adj_.size()); }
    std::size_t edge_count() const { return edge_count_; }
    const std::vector<int>& neighbors(int v) const { return adj_[std::size_t(v)]; }
    const std::vector<std::int64_t>& weights(int v) const { return w_[std::size_t(v)]; }
    int degree(int v) const { return int(adj_[std::size_t(v)].size()); }

    bool has_edge(int u, int v) const
    {
        const auto& a = adj_[std::size_t(u)];
        return std::binary_search(a.begin(), a.end(), v);
    }

    std::int64_t weight(int u, int v) const
    {
        const auto& a = adj_[std::size_t(u)];
        auto it = std::lower_bound(a.begin(), a.end(), v);
        return it != a.end() && *it == v ? w_[std::size_t(u)][std::size_t(it - a.begin())] : 0;
    }

    std::vector<Edge> edges() const
    {
        std::vector<Edge> out;
        for (int u = 0; u < size(); ++u)
            for (std::size_t k = 0; k < adj_[std::size_t(u)].size(); ++k)
                if (adj_[std::size_t(u)][k] > u)
                    out.push_back({u, adj_[std::size_t(u)][k], w_[std::size_t(u)][k]});
        return out;
    }

private:
    std::vector<std::vector<int>> adj_;
    std::vector<std::vector<std::int64_t>> w_;
    std::size_t edge_count_ = 0;
};

/// Graph view of a network: node i is the i-th geoid in sorted order.
struct IndexedNetwork {
    Graph graph;
    std::vector<std::string> geoids;
    std::vector<GeoPoint> centroids;
};

inline IndexedNetwork index_network(const MobilityNetwork& net)
{
    IndexedNetwork out;
    std::map<std::string, int> id;
    for (const auto& [geoid, c] : net.nodes) {
        id.emplace(geoid, int(out.geoids.size()));
        out.geoids.push_back(geoid);
        out.centroids.push_back(c);
    }
    std::vector<Graph::Edge> edges;
    edges.reserve(net.edges.size());
    for (const auto& [key, w] : net.edges)
        edges.push_back({id.at(key.first), id.at(key.second), w});
    out.graph = Graph(int(out.geoids.size()), edges);
    return out;
}

}  // namespace mobnet
