#pragma once

// Four-node motif census.
//
// Every 4-node subset of a network induces one of seven motif types:
//
//   type 1  K4            6 edges  degrees 3,3,3,3
//   type 2  diamond       5 edges  degrees 2,2,3,3
//   type 3  4-cycle       4 edges  degrees 2,2,2,2
//   type 4  paw           4 edges  degrees 1,2,2,3  (triangle + pendant)
//   type 5  path          3 edges  degrees 1,1,2,2
//   type 6  star          3 edges  degrees 1,1,1,3
//   type 0  disconnected  anything else
//
// Connected quads are enumerated once each with ESU (subgraph extension
// rooted at the smallest node); type 0 is C(n,4) minus the rest.

#include "mobnet/geo.hpp"
#include "mobnet/network.hpp"
#include "mobnet/parallel.hpp"
#include "mobnet/util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mobnet {

inline constexpr int kMotifTypes = 7;

using MotifCounts = std::array<std::uint64_t, kMotifTypes>;

namespace motif_detail {

// Bit k of a quad mask is the pair kPairs[k] of quad positions.
inline constexpr std::array<std::array<int, 2>, 6> kPairs{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

constexpr int classify_mask(unsigned mask)
{
    int deg[4] = {0, 0, 0, 0};
    int edges = 0;
    for (int k = 0; k < 6; ++k)
        if (mask & (1u << k)) {
            ++edges;
            ++deg[kPairs[std::size_t(k)][0]];
            ++deg[kPairs[std::size_t(k)][1]];
        }
    int mx = 0, mn = 3;
    for (int d : deg) {
        mx = d > mx ? d : mx;
        mn = d < mn ? d : mn;
    }
    if (mn == 0 || edges < 3)
        return 0;
    switch (edges) {
    case 6: return 1;
    case 5: return 2;
    case 4: return mx == 2 ? 3 : 4;
    case 3: return mx == 3 ? 6 : 5;  // 3 edges, no isolated node: path or star
    default: return 0;
    }
}

constexpr std::array<std::uint8_t, 64> make_table()
{
    std::array<std::uint8_t, 64> t{};
    for (unsigned m = 0; m < 64; ++m)
        t[m] = std::uint8_t(classify_mask(m));
    return t;
}

inline constexpr auto kClassTable = make_table();

/// Dense adjacency bitset for O(1) edge tests during enumeration.
class AdjacencyBits {
public:
    explicit AdjacencyBits(const Graph& g)
        : n_(std::size_t(g.size())), words_((n_ + 63) / 64), bits_(n_ * words_, 0)
    {
        for (int u = 0; u < g.size(); ++u)
            for (int v : g.neighbors(u))
                bits_[std::size_t(u) * words_ + std::size_t(v) / 64] |= 1ULL << (unsigned(v) % 64);
    }

    bool operator()(int u, int v) const
    {
        return (bits_[std::size_t(u) * words_ + std::size_t(v) / 64] >> (unsigned(v) % 64)) & 1ULL;
    }

private:
    std::size_t n_, words_;
    std::vector<std::uint64_t> bits_;
};

inline unsigned quad_mask(const AdjacencyBits& adj, const std::array<int, 4>& q)
{
    unsigned mask = 0;
    for (int k = 0; k < 6; ++k)
        if (adj(q[std::size_t(kPairs[std::size_t(k)][0])], q[std::size_t(kPairs[std::size_t(k)][1])]))
            mask |= 1u << k;
    return mask;
}

}  // namespace motif_detail

/// Motif type of the subgraph whose induced edges are given as a 6-bit pair mask
/// over positions (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
inline int classify_quad(unsigned edge_mask) { return motif_detail::kClassTable[edge_mask & 63u]; }

/// Motif type of the subgraph induced by four distinct nodes.
inline int classify_quad(const Graph& g, const std::array<int, 4>& q)
{
    unsigned mask = 0;
    for (int k = 0; k < 6; ++k) {
        const auto [a, b] = motif_detail::kPairs[std::size_t(k)];
        if (g.has_edge(q[std::size_t(a)], q[std::size_t(b)]))
            mask |= 1u << k;
    }
    return classify_quad(mask);
}

inline std::uint64_t choose4(std::uint64_t n)
{
    if (n < 4)
        return 0;
    const unsigned __int128 c = (unsigned __int128)n * (n - 1) * (n - 2) * (n - 3) / 24;
    return std::uint64_t(c);
}

/// Calls visit(quad, type) once for every connected 4-node set containing
/// `root` as its smallest node. Quad order is discovery order.
template <typename Visit>
void enumerate_connected_quads(const Graph& g, const motif_detail::AdjacencyBits& adj, int root,
                               Visit&& visit)
{
    const int v = root;
    const auto& nv = g.neighbors(v);
    std::vector<int> ext1;
    for (auto it = std::upper_bound(nv.begin(), nv.end(), v); it != nv.end(); ++it)
        ext1.push_back(*it);

    std::vector<int> ext2, ext3;
    for (std::size_t i1 = 0; i1 < ext1.size(); ++i1) {
        const int w1 = ext1[i1];
        // Extension after adding w1: remaining candidates plus w1's exclusive neighbours.
        ext2.assign(ext1.begin() + std::ptrdiff_t(i1) + 1, ext1.end());
        for (int u : g.neighbors(w1))
            if (u > v && !adj(u, v))
                ext2.push_back(u);

        for (std::size_t i2 = 0; i2 < ext2.size(); ++i2) {
            const int w2 = ext2[i2];
            const bool w2v = adj(w2, v);
            const unsigned base = 1u /* v-w1 */ | (w2v ? 2u : 0u) | (adj(w1, w2) ? 8u : 0u);
            ext3.assign(ext2.begin() + std::ptrdiff_t(i2) + 1, ext2.end());
            for (int u : g.neighbors(w2))
                if (u > v && u != w1 && !adj(u, v) && !adj(u, w1))
                    ext3.push_back(u);

            for (int u : ext3) {
                unsigned mask = base;
                if (adj(u, v))
                    mask |= 4u;
                if (adj(u, w1))
                    mask |= 16u;
                if (adj(u, w2))
                    mask |= 32u;
                visit(std::array<int, 4>{v, w1, w2, u}, classify_quad(mask));
            }
        }
    }
}

struct MotifCensus {
    MotifCounts counts{};                        // index = motif type
    std::array<double, kMotifTypes> shares{};
    std::uint64_t n_quads_total = 0;             // C(|V|, 4)
    std::uint64_t n_samples = 0;                 // 0 for an exhaustive census
    bool sampled() const { return n_samples != 0; }
};

inline std::array<double, kMotifTypes> shares_of(const MotifCounts& counts, std::uint64_t total)
{
    std::array<double, kMotifTypes> s{};
    for (int t = 0; t < kMotifTypes; ++t)
        s[std::size_t(t)] = total ? double(counts[std::size_t(t)]) / double(total) : 0.0;
    return s;
}

/// Exhaustive census: exact counts of all seven types.
inline MotifCensus motif_census(const Graph& g, unsigned threads = 1)
{
    if (g.size() < 4)
        throw std::invalid_argument("motif census: network too small");
    const motif_detail::AdjacencyBits adj(g);
    const unsigned workers = resolve_threads(threads);
    std::vector<MotifCounts> partial(workers, MotifCounts{});
    parallel_for(std::size_t(g.size()), workers, [&](std::size_t root, unsigned w) {
        auto& c = partial[w];
        enumerate_connected_quads(g, adj, int(root),
                                  [&](const std::array<int, 4>&, int type) { ++c[std::size_t(type)]; });
    });
    MotifCensus out;
    out.n_quads_total = choose4(std::uint64_t(g.size()));
    for (const auto& p : partial)
        for (int t = 1; t < kMotifTypes; ++t)
            out.counts[std::size_t(t)] += p[std::size_t(t)];
    std::uint64_t connected = 0;
    for (int t = 1; t < kMotifTypes; ++t)
        connected += out.counts[std::size_t(t)];
    out.counts[0] = out.n_quads_total - connected;
    out.shares = shares_of(out.counts, out.n_quads_total);
    return out;
}

// ---------------------------------------------------------------------------
// Attributes

enum class VolumeMode { Mean, Sum };

struct MotifOptions {
    std::uint64_t median_threshold = 10'000'000;  // per-type quad count for exact medians
    double distance_bin_m = 50.0;
    double volume_bin = 1.0;
    VolumeMode volume_mode = VolumeMode::Mean;
    unsigned threads = 1;
};

struct MotifAttributes {
    // Index = motif type; type 0 is always absent.
    std::array<std::optional<double>, kMotifTypes> median_avg_distance_m{};
    std::array<std::optional<double>, kMotifTypes> median_avg_volume{};
    std::array<bool, kMotifTypes> approximate{};  // histogram quantile was used
};

/// Lower median: element (n-1)/2 of the sorted values.
inline std::optional<double> lower_median(std::vector<double> values)
{
    if (values.empty())
        return std::nullopt;
    const auto mid = values.begin() + std::ptrdiff_t((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

namespace motif_detail {

/// Per-quad attribute values: mean centroid distance and mean (or summed) weight
/// over the induced edges. Edges are visited in sorted node order so the
/// floating-point sums do not depend on discovery order.
struct QuadAttributes {
    double avg_distance = 0;
    double volume = 0;
};

inline QuadAttributes quad_attributes(const IndexedNetwork& net, std::array<int, 4> q,
                                      VolumeMode mode)
{
    std::sort(q.begin(), q.end());
    double dist = 0;
    double weight = 0;
    int edges = 0;
    for (const auto& [a, b] : kPairs) {
        const std::int64_t w = net.graph.weight(q[std::size_t(a)], q[std::size_t(b)]);
        if (w == 0)
            continue;
        ++edges;
        dist += haversine(net.centroids[std::size_t(q[std::size_t(a)])],
                          net.centroids[std::size_t(q[std::size_t(b)])]);
        weight += double(w);
    }
    return {dist / edges, mode == VolumeMode::Mean ? weight / edges : weight};
}

/// Either every value (exact) or a fixed-width histogram.
class ValueCollector {
public:
    ValueCollector() = default;
    ValueCollector(bool exact, double bin) : exact_(exact), bin_(bin) {}

    void add(double v)
    {
        if (exact_) {
            values_.push_back(v);
            return;
        }
        const auto b = std::size_t(std::max(0.0, std::floor(v / bin_)));
        if (b >= hist_.size())
            hist_.resize(b + 1, 0);
        ++hist_[b];
    }

    void merge(ValueCollector&& other)
    {
        values_.insert(values_.end(), other.values_.begin(), other.values_.end());
        if (other.hist_.size() > hist_.size())
            hist_.resize(other.hist_.size(), 0);
        for (std::size_t i = 0; i < other.hist_.size(); ++i)
            hist_[i] += other.hist_[i];
    }

    /// Lower median; from the histogram it is the midpoint of the bin holding
    /// that rank, so within half a bin of the exact value.
    std::optional<double> median() const
    {
        if (exact_)
            return lower_median(values_);
        std::uint64_t n = 0;
        for (auto c : hist_)
            n += c;
        if (n == 0)
            return std::nullopt;
        const std::uint64_t rank = (n - 1) / 2;
        std::uint64_t seen = 0;
        for (std::size_t b = 0; b < hist_.size(); ++b) {
            seen += hist_[b];
            if (seen > rank)
                return (double(b) + 0.5) * bin_;
        }
        return std::nullopt;
    }

    bool exact() const { return exact_; }

private:
    bool exact_ = true;
    double bin_ = 1.0;
    std::vector<double> values_;
    std::vector<std::uint64_t> hist_;
};

struct TypeCollectors {
    std::array<ValueCollector, kMotifTypes> distance;
    std::array<ValueCollector, kMotifTypes> volume;

    TypeCollectors(const MotifCounts& counts, const MotifOptions& opt)
    {
        for (int t = 0; t < kMotifTypes; ++t) {
            const bool exact = counts[std::size_t(t)] <= opt.median_threshold;
            distance[std::size_t(t)] = ValueCollector(exact, opt.distance_bin_m);
            volume[std::size_t(t)] = ValueCollector(exact, opt.volume_bin);
        }
    }

    void merge(TypeCollectors&& o)
    {
        for (int t = 0; t < kMotifTypes; ++t) {
            distance[std::size_t(t)].merge(std::move(o.distance[std::size_t(t)]));
            volume[std::size_t(t)].merge(std::move(o.volume[std::size_t(t)]));
        }
    }

    MotifAttributes result() const
    {
        MotifAttributes out;
        for (int t = 1; t < kMotifTypes; ++t) {
            out.median_avg_distance_m[std::size_t(t)] = distance[std::size_t(t)].median();
            out.median_avg_volume[std::size_t(t)] = volume[std::size_t(t)].median();
            out.approximate[std::size_t(t)] = !distance[std::size_t(t)].exact();
        }
        return out;
    }
};

}  // namespace motif_detail

/// Per-type medians of the quad-level mean link distance and link volume.
/// `counts` decides, per type, between exact medians and the histogram path.
inline MotifAttributes motif_attributes(const IndexedNetwork& net, const MotifCounts& counts,
                                        const MotifOptions& opt = {})
{
    const Graph& g = net.graph;
    if (g.size() < 4)
        throw std::invalid_argument("motif attributes: network too small");
    const motif_detail::AdjacencyBits adj(g);
    const unsigned workers = resolve_threads(opt.threads);
    std::vector<motif_detail::TypeCollectors> partial(workers,
                                                      motif_detail::TypeCollectors(counts, opt));
    parallel_for(std::size_t(g.size()), workers, [&](std::size_t root, unsigned w) {
        auto& c = partial[w];
        enumerate_connected_quads(g, adj, int(root), [&](const std::array<int, 4>& q, int type) {
            const auto a = motif_detail::quad_attributes(net, q, opt.volume_mode);
            c.distance[std::size_t(type)].add(a.avg_distance);
            c.volume[std::size_t(type)].add(a.volume);
        });
    });
    for (unsigned w = 1; w < workers; ++w)
        partial[0].merge(std::move(partial[w]));
    return partial[0].result();
}

struct MotifAnalysis {
    MotifCensus census;
    MotifAttributes attributes;
};

inline MotifAnalysis analyze_motifs(const IndexedNetwork& net, const MotifOptions& opt = {})
{
    MotifAnalysis out;
    out.census = motif_census(net.graph, opt.threads);
    out.attributes = motif_attributes(net, out.census.counts, opt);
    return out;
}

/// Census and attribute medians from uniformly drawn 4-node subsets. When
/// C(n,4) <= n_samples the exhaustive result is returned instead.
inline MotifAnalysis sample_motifs(const IndexedNetwork& net, std::uint64_t n_samples,
                                   std::uint64_t seed, const MotifOptions& opt = {},
                                   bool with_attributes = true)
{
    const Graph& g = net.graph;
    if (g.size() < 4)
        throw std::invalid_argument("motif sampling: network too small");
    if (n_samples == 0)
        throw std::invalid_argument("motif sampling: n_samples must be positive");
    const std::uint64_t total = choose4(std::uint64_t(g.size()));
    if (total <= n_samples) {
        MotifAnalysis exact;
        exact.census = motif_census(g, opt.threads);
        if (with_attributes)
            exact.attributes = motif_attributes(net, exact.census.counts, opt);
        return exact;
    }

    const motif_detail::AdjacencyBits adj(g);
    Rng rng(seed);
    const auto n = std::uint64_t(g.size());
    MotifCounts counts{};
    MotifCounts all_exact{};  // sampled values are few: keep them all
    motif_detail::TypeCollectors collect(all_exact, opt);
    for (std::uint64_t s = 0; s < n_samples; ++s) {
        std::array<int, 4> q{};
        for (int k = 0; k < 4; ++k) {
            bool dup;
            do {
                q[std::size_t(k)] = int(rng.below(n));
                dup = false;
                for (int j = 0; j < k; ++j)
                    dup = dup || q[std::size_t(j)] == q[std::size_t(k)];
            } while (dup);
        }
        std::sort(q.begin(), q.end());
        const int type = classify_quad(motif_detail::quad_mask(adj, q));
        ++counts[std::size_t(type)];
        if (with_attributes && type != 0) {
            const auto a = motif_detail::quad_attributes(net, q, opt.volume_mode);
            collect.distance[std::size_t(type)].add(a.avg_distance);
            collect.volume[std::size_t(type)].add(a.volume);
        }
    }
    MotifAnalysis out;
    out.census.counts = counts;
    out.census.n_quads_total = total;
    out.census.n_samples = n_samples;
    out.census.shares = shares_of(counts, n_samples);
    if (with_attributes)
        out.attributes = collect.result();
    return out;
}

/// Trailing mean over up to seven days (the day itself and up to six before).
/// Missing days are skipped; a window with no values stays missing.
inline std::vector<std::optional<double>> moving_average_7d(
    const std::vector<std::optional<double>>& series)
{
    std::vector<std::optional<double>> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        double sum = 0;
        int n = 0;
        for (std::size_t j = i >= 6 ? i - 6 : 0; j <= i; ++j)
            if (series[j]) {
                sum += *series[j];
                ++n;
            }
        if (n > 0)
            out[i] = sum / n;
    }
    return out;
}

inline std::vector<double> moving_average_7d(const std::vector<double>& series)
{
    std::vector<std::optional<double>> in(series.begin(), series.end());
    std::vector<double> out;
    for (const auto& v : moving_average_7d(in))
        out.push_back(*v);
    return out;
}

}  // namespace mobnet
