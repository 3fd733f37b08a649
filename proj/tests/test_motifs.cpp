#include "mobnet/motifs.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace mobnet;

namespace {

Graph make(int n, std::initializer_list<std::pair<int, int>> edges, std::int64_t w = 1)
{
    std::vector<Graph::Edge> e;
    for (auto [u, v] : edges)
        e.push_back({u, v, w});
    return Graph(n, e);
}

IndexedNetwork indexed(Graph g, std::vector<GeoPoint> centroids)
{
    IndexedNetwork net;
    for (int i = 0; i < g.size(); ++i)
        net.geoids.push_back("T" + std::to_string(i));
    net.graph = std::move(g);
    net.centroids = std::move(centroids);
    return net;
}

constexpr double kDegPerMeter = 180.0 / (M_PI * kEarthRadiusM);

IndexedNetwork random_indexed(int n, double p, std::uint64_t seed)
{
    auto g = oracle::erdos_renyi(n, p, seed, 9);
    Rng rng(seed ^ 0xabcdef);
    std::vector<GeoPoint> c;
    for (int i = 0; i < n; ++i)
        c.push_back({41.8 + rng.uniform(0, 0.1), -88.0 + rng.uniform(0, 0.1)});
    return indexed(std::move(g), std::move(c));
}

}  // namespace

TEST(Motifs, ClassificationTable)
{
    const auto k4 = make(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    EXPECT_EQ(classify_quad(k4, {0, 1, 2, 3}), 1);
    EXPECT_EQ(classify_quad(make(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}), {0, 1, 2, 3}), 4);
    EXPECT_EQ(classify_quad(Graph(4), {0, 1, 2, 3}), 0);
    EXPECT_EQ(classify_quad(make(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}}), {0, 1, 2, 3}), 2);
    EXPECT_EQ(classify_quad(make(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}), {0, 1, 2, 3}), 3);
    EXPECT_EQ(classify_quad(make(4, {{0, 1}, {1, 2}, {2, 3}}), {0, 1, 2, 3}), 5);
    EXPECT_EQ(classify_quad(make(4, {{0, 1}, {0, 2}, {0, 3}}), {0, 1, 2, 3}), 6);
    EXPECT_EQ(classify_quad(make(4, {{0, 1}, {2, 3}}), {0, 1, 2, 3}), 0);           // 2+2 split
    EXPECT_EQ(classify_quad(make(4, {{0, 1}, {1, 2}, {0, 2}}), {0, 1, 2, 3}), 0);   // isolated node

    // Every 6-bit mask agrees with the first-principles classifier.
    for (unsigned mask = 0; mask < 64; ++mask) {
        std::vector<Graph::Edge> e;
        for (int k = 0; k < 6; ++k)
            if (mask & (1u << k))
                e.push_back({motif_detail::kPairs[std::size_t(k)][0],
                             motif_detail::kPairs[std::size_t(k)][1], 1});
        const Graph g(4, e);
        EXPECT_EQ(classify_quad(mask), oracle::motif_type(oracle::adjacency(g), {0, 1, 2, 3}))
            << "mask " << mask;
    }
}

TEST(Motifs, CensusExamples)
{
    const auto k4 = make(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    const auto c = motif_census(k4);
    EXPECT_EQ(c.counts, (MotifCounts{0, 1, 0, 0, 0, 0, 0}));
    EXPECT_EQ(c.shares[1], 1.0);
    EXPECT_EQ(c.n_quads_total, 1u);

    const auto star = make(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    EXPECT_EQ(motif_census(star).counts, (MotifCounts{1, 0, 0, 0, 0, 0, 4}));

    const auto p4 = make(4, {{0, 1}, {1, 2}, {2, 3}});
    EXPECT_EQ(motif_census(p4).counts, (MotifCounts{0, 0, 0, 0, 0, 1, 0}));

    try {
        motif_census(make(3, {{0, 1}}));
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("network too small"), std::string::npos);
    }
}

TEST(Motifs, CensusMatchesOracleAndThreadCounts)
{
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const double p = 0.1 + 0.2 * double(seed % 3);
        const auto g = oracle::erdos_renyi(16 + int(seed % 5), p, seed);
        const auto want = oracle::motif_counts(g);
        const auto one = motif_census(g, 1);
        const auto four = motif_census(g, 4);
        EXPECT_EQ(one.counts, want) << "seed " << seed;
        EXPECT_EQ(four.counts, one.counts);
        EXPECT_EQ(four.shares, one.shares);
        double sum = 0;
        for (double s : one.shares)
            sum += s;
        EXPECT_NEAR(sum, 1.0, 1e-12);
        EXPECT_EQ(std::accumulate(one.counts.begin(), one.counts.end(), std::uint64_t(0)),
                  choose4(std::uint64_t(g.size())));
    }
}

TEST(Motifs, RemovingAnEdgeNeverAddsCliques)
{
    const auto g = oracle::erdos_renyi(18, 0.6, 42);
    const auto base = motif_census(g).counts[1];
    auto edges = g.edges();
    for (std::size_t drop = 0; drop < edges.size(); drop += 7) {
        auto fewer = edges;
        fewer.erase(fewer.begin() + std::ptrdiff_t(drop));
        EXPECT_LE(motif_census(Graph(g.size(), fewer)).counts[1], base);
    }
}

TEST(Motifs, RelabelingInvariance)
{
    const auto g = oracle::erdos_renyi(20, 0.3, 9);
    std::vector<int> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(1);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    std::vector<Graph::Edge> e;
    for (auto x : g.edges())
        e.push_back({perm[std::size_t(x.u)], perm[std::size_t(x.v)], x.weight});
    EXPECT_EQ(motif_census(Graph(20, e)).counts, motif_census(g).counts);
}

TEST(Motifs, AttributeExamples)
{
    // Path 0-1-2-3 along a meridian with gaps of 1000, 2000 and 3000 m.
    const double d = kDegPerMeter;
    auto p4 = indexed(make(4, {{0, 1}, {1, 2}, {2, 3}}),
                      {{0, 0}, {1000 * d, 0}, {3000 * d, 0}, {6000 * d, 0}});
    const auto a = analyze_motifs(p4);
    EXPECT_NEAR(*a.attributes.median_avg_distance_m[5], 2000.0, 1e-6);
    EXPECT_FALSE(a.attributes.median_avg_distance_m[1]);

    auto k4 = indexed(make(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, 5),
                      {{0, 0}, {0, 0.01}, {0.01, 0}, {0.01, 0.01}});
    EXPECT_EQ(*analyze_motifs(k4).attributes.median_avg_volume[1], 5.0);

    // Two path quads with mean distances 1000 and 3000 m: lower median is 1000.
    // Components 0-1-2-3 and 4-5-6-7 each hold one path; every other quad is disconnected.
    auto two = indexed(make(8, {{0, 1}, {1, 2}, {2, 3}, {4, 5}, {5, 6}, {6, 7}}),
                       {{0, 0}, {1000 * d, 0}, {2000 * d, 0}, {3000 * d, 0},
                        {1, 0}, {1 + 3000 * d, 0}, {1 + 6000 * d, 0}, {1 + 9000 * d, 0}});
    const auto t = analyze_motifs(two);
    EXPECT_EQ(t.census.counts[5], 2u);
    EXPECT_NEAR(*t.attributes.median_avg_distance_m[5], 1000.0, 1e-6);
}

TEST(Motifs, VolumeModes)
{
    std::vector<Graph::Edge> e{{0, 1, 2}, {1, 2, 4}, {2, 3, 9}};
    auto net = indexed(Graph(4, e), {{0, 0}, {0, 0.01}, {0, 0.02}, {0, 0.03}});
    MotifOptions opt;
    EXPECT_EQ(*analyze_motifs(net, opt).attributes.median_avg_volume[5], 5.0);
    opt.volume_mode = VolumeMode::Sum;
    EXPECT_EQ(*analyze_motifs(net, opt).attributes.median_avg_volume[5], 15.0);
}

TEST(Motifs, AttributesMatchOracle)
{
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto net = random_indexed(14 + int(seed), 0.35, seed);
        MotifOptions opt;
        opt.threads = 1 + unsigned(seed % 3);
        const auto got = analyze_motifs(net, opt).attributes;
        const auto want = oracle::motif_medians(net.graph, [&](int a, int b) {
            return haversine(net.centroids[std::size_t(a)], net.centroids[std::size_t(b)]);
        });
        for (int t = 1; t < kMotifTypes; ++t) {
            ASSERT_EQ(got.median_avg_distance_m[std::size_t(t)].has_value(),
                      want.distance[std::size_t(t)].has_value());
            if (!want.distance[std::size_t(t)])
                continue;
            // The oracle sums edges in the same canonical pair order.
            EXPECT_EQ(*got.median_avg_distance_m[std::size_t(t)], *want.distance[std::size_t(t)]);
            EXPECT_EQ(*got.median_avg_volume[std::size_t(t)], *want.volume[std::size_t(t)]);
            EXPECT_FALSE(got.approximate[std::size_t(t)]);
        }
    }
}

TEST(Motifs, HistogramMedianIsWithinHalfABin)
{
    const auto net = random_indexed(22, 0.4, 5);
    MotifOptions exact_opt;
    MotifOptions hist_opt;
    hist_opt.median_threshold = 0;
    const auto exact = analyze_motifs(net, exact_opt).attributes;
    const auto approx = analyze_motifs(net, hist_opt).attributes;
    for (int t = 1; t < kMotifTypes; ++t) {
        if (!exact.median_avg_distance_m[std::size_t(t)])
            continue;
        EXPECT_TRUE(approx.approximate[std::size_t(t)]);
        EXPECT_LE(std::abs(*approx.median_avg_distance_m[std::size_t(t)] -
                           *exact.median_avg_distance_m[std::size_t(t)]),
                  hist_opt.distance_bin_m / 2 + 1e-9);
        EXPECT_LE(std::abs(*approx.median_avg_volume[std::size_t(t)] -
                           *exact.median_avg_volume[std::size_t(t)]),
                  hist_opt.volume_bin / 2 + 1e-9);
    }
}

TEST(Motifs, Sampling)
{
    auto k4 = indexed(make(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}),
                      {{0, 0}, {0, 0.01}, {0.01, 0}, {0.01, 0.01}});
    for (std::uint64_t seed : {1u, 2u, 3u})
        EXPECT_EQ(sample_motifs(k4, 50, seed).census.shares, (std::array<double, 7>{0, 1, 0, 0, 0, 0, 0}));

    // Exhaustion: n_samples >= C(n,4) gives the exact census.
    const auto small = random_indexed(10, 0.4, 3);
    EXPECT_EQ(sample_motifs(small, 210, 7).census.counts, motif_census(small.graph).counts);

    // Binomial bound: 100k samples put each share within 0.01 of the truth.
    const auto er = random_indexed(50, 0.3, 11);  // C(50,4) = 230300 > 100k
    const auto exact = motif_census(er.graph);
    const auto sampled = sample_motifs(er, 100000, 7, {}, false);
    EXPECT_TRUE(sampled.census.sampled());
    for (int t = 0; t < kMotifTypes; ++t)
        EXPECT_LT(std::abs(sampled.census.shares[std::size_t(t)] - exact.shares[std::size_t(t)]), 0.01);

    // Seeded determinism.
    const auto again = sample_motifs(er, 100000, 7, {}, false);
    EXPECT_EQ(again.census.counts, sampled.census.counts);
}

TEST(Motifs, MovingAverage)
{
    EXPECT_EQ(moving_average_7d(std::vector<double>(10, 2.5)), std::vector<double>(10, 2.5));
    EXPECT_EQ(moving_average_7d(std::vector<double>{0, 0, 0, 0, 0, 0, 7})[6], 1.0);
    EXPECT_EQ(moving_average_7d(std::vector<double>{3, 6, 9, 12, 15})[2], 6.0);
    const std::vector<std::optional<double>> gaps{std::nullopt, 4.0, std::nullopt};
    const auto ma = moving_average_7d(gaps);
    EXPECT_FALSE(ma[0]);
    EXPECT_EQ(ma[1], 4.0);
    EXPECT_EQ(ma[2], 4.0);
}
