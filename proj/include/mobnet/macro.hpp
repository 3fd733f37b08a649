#pragma once

// Global network characteristics of a daily mobility network. Metrics that are
// undefined for a degenerate graph come back as std::nullopt.

#include "mobnet/network.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <vector>

namespace mobnet {

inline std::optional<double> average_degree(const Graph& g)
{
    if (g.size() == 0)
        return std::nullopt;
    return 2.0 * double(g.edge_count()) / double(g.size());
}

inline std::optional<double> density(const Graph& g)
{
    if (g.size() < 2)
        return std::nullopt;
    const double n = g.size();
    return 2.0 * double(g.edge_count()) / (n * (n - 1.0));
}

/// Triangles through each node (sorted-list intersection).
inline std::vector<std::int64_t> triangles_per_node(const Graph& g)
{
    std::vector<std::int64_t> tri(std::size_t(g.size()), 0);
    for (int u = 0; u < g.size(); ++u) {
        const auto& nu = g.neighbors(u);
        for (int v : nu) {
            if (v <= u)
                continue;
            const auto& nv = g.neighbors(v);
            auto a = std::upper_bound(nu.begin(), nu.end(), v);
            auto b = std::upper_bound(nv.begin(), nv.end(), v);
            while (a != nu.end() && b != nv.end()) {
                if (*a < *b) {
                    ++a;
                } else if (*b < *a) {
                    ++b;
                } else {
                    ++tri[std::size_t(u)];
                    ++tri[std::size_t(v)];
                    ++tri[std::size_t(*a)];
                    ++a;
                    ++b;
                }
            }
        }
    }
    return tri;
}

/// Unweighted mean local clustering; nodes of degree < 2 count as 0.
inline std::optional<double> average_clustering(const Graph& g)
{
    if (g.size() == 0)
        return std::nullopt;
    const auto tri = triangles_per_node(g);
    double sum = 0;
    for (int v = 0; v < g.size(); ++v) {
        const double k = g.degree(v);
        if (k >= 2)
            sum += 2.0 * double(tri[std::size_t(v)]) / (k * (k - 1.0));
    }
    return sum / double(g.size());
}

struct Components {
    std::vector<int> label;       // component id per node, ids in order of first node
    std::vector<int> sizes;
    int largest = -1;             // first component of maximal size
};

inline Components connected_components(const Graph& g)
{
    Components c;
    c.label.assign(std::size_t(g.size()), -1);
    std::vector<int> stack;
    for (int s = 0; s < g.size(); ++s) {
        if (c.label[std::size_t(s)] != -1)
            continue;
        const int id = int(c.sizes.size());
        c.sizes.push_back(0);
        c.label[std::size_t(s)] = id;
        stack.push_back(s);
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            ++c.sizes.back();
            for (int v : g.neighbors(u))
                if (c.label[std::size_t(v)] == -1) {
                    c.label[std::size_t(v)] = id;
                    stack.push_back(v);
                }
        }
        if (c.largest < 0 || c.sizes.back() > c.sizes[std::size_t(c.largest)])
            c.largest = id;
    }
    return c;
}

inline int giant_component_size(const Graph& g)
{
    const auto c = connected_components(g);
    return c.largest < 0 ? 0 : c.sizes[std::size_t(c.largest)];
}

/// Hop distances from source; -1 for unreachable nodes.
inline std::vector<int> bfs_distances(const Graph& g, int source)
{
    std::vector<int> dist(std::size_t(g.size()), -1);
    std::vector<int> queue{source};
    dist[std::size_t(source)] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int u = queue[head];
        for (int v : g.neighbors(u))
            if (dist[std::size_t(v)] < 0) {
                dist[std::size_t(v)] = dist[std::size_t(u)] + 1;
                queue.push_back(v);
            }
    }
    return dist;
}

struct PathStats {
    std::optional<double> average_shortest_path;
    std::optional<int> diameter;
};

/// Mean hop distance over ordered pairs, and the maximum eccentricity, both
/// within the largest connected component.
inline PathStats path_stats(const Graph& g)
{
    PathStats out;
    const auto comps = connected_components(g);
    if (comps.largest < 0)
        return out;
    const int k = comps.sizes[std::size_t(comps.largest)];
    std::int64_t total = 0;
    int diam = 0;
    for (int s = 0; s < g.size(); ++s) {
        if (comps.label[std::size_t(s)] != comps.largest)
            continue;
        for (int d : bfs_distances(g, s))
            if (d > 0) {
                total += d;
                diam = std::max(diam, d);
            }
    }
    if (g.size() >= 2)
        out.diameter = diam;
    if (k >= 2)
        out.average_shortest_path = double(total) / (double(k) * double(k - 1));
    return out;
}

inline std::optional<double> average_shortest_path(const Graph& g)
{
    return path_stats(g).average_shortest_path;
}

inline std::optional<int> diameter(const Graph& g) { return path_stats(g).diameter; }

/// Degree assortativity: Pearson correlation of endpoint degrees over both
/// orientations of every edge. Accumulated in exact integers.
inline std::optional<double> assortativity(const Graph& g)
{
    if (g.edge_count() == 0)
        return std::nullopt;
    __int128 n = 0, sx = 0, sxx = 0, sxy = 0;
    for (int u = 0; u < g.size(); ++u) {
        const __int128 du = g.degree(u);
        for (int v : g.neighbors(u)) {
            const __int128 dv = g.degree(v);
            ++n;
            sx += du;
            sxx += du * du;
            sxy += du * dv;
        }
    }
    // Both orientations make the two marginals identical.
    const __int128 var = n * sxx - sx * sx;
    if (var == 0)
        return std::nullopt;
    const __int128 cov = n * sxy - sx * sx;
    return double(cov) / double(var);
}

// ---------------------------------------------------------------------------
// Modularity

struct ModularityResult {
    std::vector<int> community;  // per node; id = smallest node index in the community
    double q = 0;
};

/// Weighted Newman modularity of a partition.
inline std::optional<double> modularity_of(const Graph& g, const std::vector<int>& community)
{
    std::int64_t total = 0;
    std::map<int, std::int64_t> inside, strength;
    for (int u = 0; u < g.size(); ++u) {
        const auto& nb = g.neighbors(u);
        const auto& w = g.weights(u);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            strength[community[std::size_t(u)]] += w[k];
            if (nb[k] > u) {
                total += w[k];
                if (community[std::size_t(u)] == community[std::size_t(nb[k])])
                    inside[community[std::size_t(u)]] += w[k];
            }
        }
    }
    if (total == 0)
        return std::nullopt;
    const double m = double(total);
    double q = 0;
    for (const auto& [c, s] : strength) {
        const auto it = inside.find(c);
        const double in = it == inside.end() ? 0.0 : double(it->second);
        const double a = double(s) / (2.0 * m);
        q += in / m - a * a;
    }
    return q;
}

/// Deterministic greedy agglomeration (Clauset-Newman-Moore style). Repeatedly
/// merges the adjacent community pair with the largest modularity gain, ties
/// to the smallest (id, id) pair, until no merge increases modularity.
inline std::optional<ModularityResult> greedy_modularity(const Graph& g)
{
    const int n = g.size();
    std::int64_t total = 0;
    std::vector<std::map<int, std::int64_t>> links(static_cast<std::size_t>(n));
    std::vector<std::int64_t> strength(std::size_t(n), 0);
    for (int u = 0; u < n; ++u) {
        const auto& nb = g.neighbors(u);
        const auto& w = g.weights(u);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            links[std::size_t(u)][nb[k]] += w[k];
            strength[std::size_t(u)] += w[k];
            if (nb[k] > u)
                total += w[k];
        }
    }
    if (total == 0)
        return std::nullopt;

    std::vector<int> parent(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        parent[std::size_t(i)] = i;

    // Gain of merging i and j, scaled by 2m^2 so it stays an exact integer.
    auto gain = [&](int i, int j, std::int64_t wij) {
        return __int128(2) * total * wij - __int128(strength[std::size_t(i)]) * strength[std::size_t(j)];
    };

    while (true) {
        bool found = false;
        __int128 best = 0;
        int bi = -1, bj = -1;
        for (int i = 0; i < n; ++i) {
            for (const auto& [j, wij] : links[std::size_t(i)]) {
                if (j <= i)
                    continue;
                const auto dq = gain(i, j, wij);
                if (!found || dq > best) {  // scan order already yields the smallest pair on ties
                    found = true;
                    best = dq;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (!found || best <= 0)
            break;
        // Merge bj into bi.
        auto moved = std::move(links[std::size_t(bj)]);
        links[std::size_t(bj)].clear();
        for (const auto& [k, w] : moved) {
            if (k == bi)
                continue;
            links[std::size_t(bi)][k] += w;
            auto& lk = links[std::size_t(k)];
            lk.erase(bj);
            lk[bi] += w;
        }
        links[std::size_t(bi)].erase(bj);
        strength[std::size_t(bi)] += strength[std::size_t(bj)];
        strength[std::size_t(bj)] = 0;
        parent[std::size_t(bj)] = bi;
    }

    ModularityResult out;
    out.community.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        int r = i;
        while (parent[std::size_t(r)] != r)
            r = parent[std::size_t(r)];
        out.community[std::size_t(i)] = r;
    }
    out.q = *modularity_of(g, out.community);
    return out;
}

// ---------------------------------------------------------------------------

struct MacroRecord {
    Date date;
    std::optional<double> avg_degree;
    std::optional<double> avg_clustering;
    std::optional<double> avg_shortest_path;
    std::optional<double> assortativity;
    std::optional<double> modularity;
    std::optional<double> density;
    std::optional<int> diameter;
    int giant_component_size = 0;
};

inline MacroRecord compute_macro(const Graph& g, Date date)
{
    MacroRecord r;
    r.date = date;
    r.avg_degree = average_degree(g);
    r.avg_clustering = average_clustering(g);
    const auto paths = path_stats(g);
    r.avg_shortest_path = paths.average_shortest_path;
    r.diameter = paths.diameter;
    r.assortativity = assortativity(g);
    if (auto mod = greedy_modularity(g))
        r.modularity = mod->q;
    r.density = density(g);
    r.giant_component_size = giant_component_size(g);
    return r;
}

/// Metric names in output order; the first four are the ones compared across sources.
inline const std::vector<std::string>& macro_metric_names()
{
    static const std::vector<std::string> names{
        "avg_degree", "avg_clustering", "avg_shortest_path", "assortativity",
        "modularity", "density",        "diameter",          "giant_component_size"};
    return names;
}

inline std::optional<double> macro_value(const MacroRecord& r, const std::string& name)
{
    if (name == "avg_degree") return r.avg_degree;
    if (name == "avg_clustering") return r.avg_clustering;
    if (name == "avg_shortest_path") return r.avg_shortest_path;
    if (name == "assortativity") return r.assortativity;
    if (name == "modularity") return r.modularity;
    if (name == "density") return r.density;
    if (name == "diameter") return r.diameter ? std::optional<double>(*r.diameter) : std::nullopt;
    if (name == "giant_component_size") return double(r.giant_component_size);
    throw std::invalid_argument("unknown macro metric " + name);
}

}  // namespace mobnet
