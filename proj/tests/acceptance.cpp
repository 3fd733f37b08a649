// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include "mobnet/pipeline.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <unistd.h>

using namespace mobnet;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why)
    {
        if (pass)
            detail = why;
        pass = false;
    }
    void check(bool ok, const std::string& why)
    {
        if (!ok)
            fail(why);
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

IndexedNetwork with_positions(Graph g, std::uint64_t seed)
{
    IndexedNetwork net;
    Rng rng(seed);
    for (int i = 0; i < g.size(); ++i) {
        net.geoids.push_back("T" + std::to_string(i));
        net.centroids.push_back({41.8 + rng.uniform(0, 0.2), -88.0 + rng.uniform(0, 0.2)});
    }
    net.graph = std::move(g);
    return net;
}

/// G(n, m): exactly m distinct edges drawn uniformly, weights 1..max_weight.
Graph random_gnm(int n, std::size_t m, std::uint64_t seed, int max_weight)
{
    Rng rng(seed);
    std::set<std::pair<int, int>> seen;
    std::vector<Graph::Edge> edges;
    while (edges.size() < m) {
        int u = int(rng.below(std::uint64_t(n))), v = int(rng.below(std::uint64_t(n)));
        if (u == v)
            continue;
        if (u > v)
            std::swap(u, v);
        if (seen.insert({u, v}).second)
            edges.push_back({u, v, 1 + std::int64_t(rng.below(std::uint64_t(max_weight)))});
    }
    return Graph(n, edges);
}

struct ErCase {
    int n;
    double p;
    std::uint64_t seed;
};

std::vector<ErCase> er_cases()
{
    static constexpr double ps[] = {0.1, 0.3, 0.5};
    std::vector<ErCase> out;
    for (std::uint64_t s = 0; s < 50; ++s)
        out.push_back({20 + int(s % 6), ps[s % 3], 1000 + s});
    return out;
}

// ---------------------------------------------------------------------------

Outcome motif_census_matches_oracle()
{
    Outcome o;
    const auto t0 = Clock::now();
    for (const auto& c : er_cases()) {
        const auto g = oracle::erdos_renyi(c.n, c.p, c.seed, 9);
        const auto got = motif_census(g);
        const auto want = oracle::motif_counts(g);
        for (int t = 0; t < kMotifTypes; ++t)
            o.check(got.counts[std::size_t(t)] == want[std::size_t(t)],
                    fmt("seed %llu type %d: %llu vs oracle %llu", (unsigned long long)c.seed, t,
                        (unsigned long long)got.counts[std::size_t(t)],
                        (unsigned long long)want[std::size_t(t)]));
        const double total = std::accumulate(got.shares.begin(), got.shares.end(), 0.0);
        o.check(std::abs(total - 1.0) <= 1e-12, fmt("shares sum to %.17g", total));
    }
    const double secs = seconds_since(t0);
    o.check(secs < 60, fmt("%.1f s", secs));
    if (o.pass)
        o.detail = fmt("50 graphs, all 7 types exact, %.2f s", secs);
    return o;
}

Outcome motif_attributes_match_oracle()
{
    Outcome o;
    int compared = 0;
    for (const auto& c : er_cases()) {
        const auto net = with_positions(oracle::erdos_renyi(c.n, c.p, c.seed, 9), c.seed ^ 0x5eed);
        const auto got = analyze_motifs(net).attributes;
        const auto want = oracle::motif_medians(net.graph, [&](int a, int b) {
            return haversine(net.centroids[std::size_t(a)], net.centroids[std::size_t(b)]);
        });
        for (std::size_t t = 1; t < std::size_t(kMotifTypes); ++t) {
            o.check(!got.approximate[t], fmt("seed %llu type %zu used the histogram", (unsigned long long)c.seed, t));
            o.check(got.median_avg_distance_m[t] == want.distance[t],
                    fmt("seed %llu type %zu distance median differs", (unsigned long long)c.seed, t));
            o.check(got.median_avg_volume[t] == want.volume[t],
                    fmt("seed %llu type %zu volume median differs", (unsigned long long)c.seed, t));
            compared += want.distance[t].has_value();
        }
    }
    if (o.pass)
        o.detail = fmt("%d (graph, type) medians equal exactly", compared);
    return o;
}

Graph from_edges(int n, std::initializer_list<std::pair<int, int>> edges)
{
    std::vector<Graph::Edge> e;
    for (auto [u, v] : edges)
        e.push_back({u, v, 1});
    return Graph(n, e);
}

Outcome macro_metrics_match_oracle()
{
    Outcome o;
    const Date day = Date::parse("2020-02-01");
    auto near = [](std::optional<double> a, std::optional<double> b) {
        return a.has_value() == b.has_value() && (!a || std::abs(*a - *b) <= 1e-9);
    };
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(s);
        const int n = 2 + int(rng.below(49));
        const auto g = oracle::erdos_renyi(n, rng.uniform(0.02, 0.6), 500 + s, 5);
        const auto r = compute_macro(g, day);
        const auto paths = oracle::paths(g);
        const double m = double(g.edge_count());
        const std::string at = fmt("graph %llu (n=%d)", (unsigned long long)s, n);
        o.check(near(r.avg_degree, 2 * m / n), at + " degree");
        o.check(near(r.density, 2 * m / (double(n) * (n - 1))), at + " density");
        o.check(near(r.avg_clustering, oracle::clustering(g)), at + " clustering");
        o.check(near(r.avg_shortest_path, paths.aspl), at + " shortest path");
        o.check(r.diameter == paths.diameter, at + " diameter");
        o.check(r.giant_component_size == paths.giant, at + " giant component");
        o.check(near(r.assortativity, oracle::assortativity(g)), at + " assortativity");
    }
    const auto k4 = compute_macro(from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}), day);
    o.check(k4.avg_degree == 3.0 && k4.avg_clustering == 1.0 && k4.avg_shortest_path == 1.0 && k4.density == 1.0,
            "K4 spot check");
    const auto star = compute_macro(from_edges(4, {{0, 1}, {0, 2}, {0, 3}}), day);
    o.check(star.assortativity && std::abs(*star.assortativity + 1.0) <= 1e-12, "star assortativity");
    if (o.pass)
        o.detail = "100 graphs within 1e-9; K4 and star spot checks";
    return o;
}

Outcome modularity_checks()
{
    Outcome o;
    int graphs = 0;
    for (const auto& c : er_cases()) {
        const auto q = greedy_modularity(oracle::erdos_renyi(c.n, c.p, c.seed, 9));
        ++graphs;
        o.check(!q || q->q >= 0, fmt("seed %llu: Q = %.6g", (unsigned long long)c.seed, q ? q->q : 0.0));
    }
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto q = greedy_modularity(oracle::erdos_renyi(2 + int(s % 49), 0.1 + 0.004 * double(s), 900 + s, 4));
        ++graphs;
        o.check(!q || q->q >= 0, fmt("graph %llu: negative Q", (unsigned long long)s));
    }
    const auto two = greedy_modularity(from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}));
    o.check(two && std::abs(two->q - 0.5) <= 1e-12, "two triangles: Q != 0.5");
    o.check(two && two->community == std::vector<int>{0, 0, 0, 3, 3, 3}, "two triangles: partition");
    if (o.pass)
        o.detail = fmt("Q >= 0 on %d graphs; two triangles Q = %.17g", graphs, two->q);
    return o;
}

Outcome dtw_matches_oracle()
{
    Outcome o;
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        auto series = [&] {
            std::vector<double> v(1 + rng.below(29));
            for (auto& x : v)
                x = rng.uniform(0, 10);
            return v;
        };
        const auto a = series(), b = series();
        const double d = dtw(a, b);
        o.check(d == oracle::dtw(a, b), fmt("pair %d differs from full DP", i));
        o.check(dtw(a, a) == 0.0, fmt("pair %d: dtw(a,a) != 0", i));
        o.check(d == dtw(b, a), fmt("pair %d: asymmetric", i));
        if (a.size() == b.size()) {
            double l1 = 0;
            for (std::size_t k = 0; k < a.size(); ++k)
                l1 += std::abs(a[k] - b[k]);
            o.check(d <= l1, fmt("pair %d: exceeds L1", i));
        }
    }
    if (o.pass)
        o.detail = "1000 pairs exact; identity, symmetry, L1 bound hold";
    return o;
}

Outcome noiseless_round_trip()
{
    Outcome o;
    WorldParams wp;
    wp.tracts_per_side = 8;
    wp.n_devices = 700;
    wp.seed = 77;
    const auto world = generate_world(wp);
    const auto index = load_tracts(tracts_to_geojson(world.tracts));
    const ProviderProfile clean{"clean", 1.0, 300, 0, 0};
    const auto dates = date_range(Date::parse("2020-02-01"), Date::parse("2020-02-08"));
    std::vector<std::size_t> device_days(dates.size()), trips(dates.size()), bad(dates.size());
    std::vector<std::string> first_bad(dates.size());
    parallel_for(dates.size(), 0, [&](std::size_t i, unsigned) {
        const auto day = emit_day(world, clean, dates[i], 5);
        std::map<std::string, std::vector<const TruthTrip*>> truth;
        for (const auto& t : day.truth)
            truth[t.device_id].push_back(&t);
        const auto groups = group_by_device(day.pings);
        device_days[i] = groups.size();
        for (const auto& dev : groups) {
            auto stops = detect_stops(dev);
            assign_geoids(stops, index);
            const auto got = extract_trips(stops).trips;
            const auto& want = truth[dev.front().device_id];
            trips[i] += want.size();
            bool ok = got.size() == want.size();
            for (std::size_t k = 0; ok && k < got.size(); ++k)
                ok = got[k].origin.geoid == want[k]->o_geoid && got[k].dest.geoid == want[k]->d_geoid &&
                     std::abs(got[k].duration_s() - (want[k]->arrive_t - want[k]->depart_t)) <=
                         std::int64_t(clean.ping_interval_s);
            if (!ok && bad[i]++ == 0)
                first_bad[i] = dev.front().device_id + " on " + dates[i].str();
        }
    });
    const auto total_dd = std::accumulate(device_days.begin(), device_days.end(), std::size_t(0));
    const auto total_trips = std::accumulate(trips.begin(), trips.end(), std::size_t(0));
    const auto total_bad = std::accumulate(bad.begin(), bad.end(), std::size_t(0));
    o.check(total_dd >= 5000, fmt("only %zu device-days", total_dd));
    for (std::size_t i = 0; i < dates.size(); ++i)
        o.check(bad[i] == 0, fmt("%zu mismatched device-days, first %s", total_bad, first_bad[i].c_str()));
    if (o.pass)
        o.detail = fmt("%zu device-days, %zu trips match ground truth", total_dd, total_trips);
    return o;
}

// Criteria 7 and 8 share one pair of runs.
struct EndToEnd {
    bool ran = false;
    std::string error;
    double synth_s[2]{}, pipeline_s[2]{};
    std::vector<ManifestEntry> synth_files[2], run_files[2];
    std::vector<std::string> verdicts;
};

EndToEnd& end_to_end()
{
    static EndToEnd e;
    if (e.ran)
        return e;
    e.ran = true;
    const auto root = fs::temp_directory_path() / ("mobnet_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    try {
        const unsigned threads[2] = {1, 8};
        SynthConfig s;
        s.world.tracts_per_side = 10;
        s.world.n_devices = 5000;
        s.date_start = Date::parse("2020-02-01");
        s.date_end = Date::parse("2020-02-29");
        for (int r = 0; r < 2; ++r) {
            const auto world_dir = root / ("world" + std::to_string(r));
            std::ostringstream log;
            auto t0 = Clock::now();
            cmd_synth(s, world_dir, threads[r], log);
            e.synth_s[r] = seconds_since(t0);
            e.synth_files[r] = read_manifest(world_dir);

            auto cfg = load_config((world_dir / "config.json").string());
            cfg.output_dir = (root / ("run" + std::to_string(r))).string();
            cfg.threads = threads[r];
            t0 = Clock::now();
            cmd_ingest(cfg, log);
            cmd_build_network(cfg, log);
            for (auto scale : {Scale::Macro, Scale::Motif, Scale::Micro})
                cmd_analyze(cfg, scale, log);
            cmd_compare(cfg, log);
            cmd_report(cfg, log);
            e.pipeline_s[r] = seconds_since(t0);
            e.run_files[r] = read_manifest(cfg.output_dir);

            if (r == 0) {
                const RunPaths paths{cfg.output_dir};
                const auto labels = pair_labels(cfg.sources);
                for (const char* name : {"macro_verdicts.csv", "micro_verdicts.csv"})
                    for (const auto& row : parse_verdicts(labels, read_text_file(paths.compare(name).string())))
                        e.verdicts.push_back(row.verdict.pair);
                std::istringstream summary(read_text_file(paths.report("summary.txt").string()));
                for (std::string line; std::getline(summary, line);)
                    std::printf("    | %s\n", line.c_str());
            }
        }
    } catch (const std::exception& ex) {
        e.error = ex.what();
    }
    fs::remove_all(root);
    return e;
}

Outcome end_to_end_determinism()
{
    Outcome o;
    const auto& e = end_to_end();
    if (!e.error.empty()) {
        o.fail("pipeline error: " + e.error);
        return o;
    }
    o.check(e.synth_files[0] == e.synth_files[1], "synthetic inputs differ between thread counts");
    o.check(!e.run_files[0].empty() && e.run_files[0] == e.run_files[1], "outputs differ between thread counts");
    for (int r = 0; r < 2; ++r)
        o.check(e.synth_s[r] + e.pipeline_s[r] < 600, fmt("run %d took %.0f s", r, e.synth_s[r] + e.pipeline_s[r]));
    if (o.pass)
        o.detail = fmt("%zu output files identical at 1 and 8 threads; run times %.0f s and %.0f s",
                       e.run_files[0].size(), e.synth_s[0] + e.pipeline_s[0], e.synth_s[1] + e.pipeline_s[1]);
    return o;
}

Outcome verdicts_vary()
{
    Outcome o;
    const auto& e = end_to_end();
    if (!e.error.empty()) {
        o.fail("pipeline error: " + e.error);
        return o;
    }
    const std::set<std::string> distinct(e.verdicts.begin(), e.verdicts.end());
    std::string list;
    for (const auto& v : distinct)
        list += (list.empty() ? "" : " ") + v;
    o.check(distinct.size() >= 2, "every verdict is " + list);
    if (o.pass)
        o.detail = fmt("%zu verdict rows name pairs {%s}", e.verdicts.size(), list.c_str());
    return o;
}

Outcome scale_and_sampling()
{
    Outcome o;
    const auto big = with_positions(random_gnm(609, 30328, 609, 50), 30328);
    auto t0 = Clock::now();
    const auto census = motif_census(big.graph, 0);
    const double census_s = seconds_since(t0);
    o.check(census_s <= 300, fmt("exhaustive census took %.0f s", census_s));

    t0 = Clock::now();
    const auto sampled_big = sample_motifs(big, 100000, 7);
    const double sample_s = seconds_since(t0);
    o.check(sample_s <= 60, fmt("100k-quad sampled medians took %.1f s", sample_s));
    o.check(sampled_big.census.sampled(), "609-node run did not sample");

    const auto ref = with_positions(random_gnm(100, 2000, 100, 9), 2000);
    const auto exact = motif_census(ref.graph);
    const auto sampled = sample_motifs(ref, 100000, 7, {}, false);
    o.check(sampled.census.sampled(), "100-node run did not sample");
    double worst = 0;
    for (std::size_t t = 0; t < std::size_t(kMotifTypes); ++t)
        worst = std::max(worst, std::abs(sampled.census.shares[t] - exact.shares[t]));
    o.check(worst < 0.01, fmt("sampled share error %.4f", worst));

    if (o.pass)
        o.detail = fmt("census of 609 nodes / 30328 edges in %.1f s (%llu connected quads); "
                       "100k-sample medians in %.2f s; max share error %.4f",
                       census_s,
                       (unsigned long long)(census.n_quads_total - census.counts[0]), sample_s, worst);
    return o;
}

Outcome unit_examples()
{
    Outcome o;
    // Seven-day moving average.
    o.check(moving_average_7d(std::vector<double>(12, 3.25)) == std::vector<double>(12, 3.25), "MA constant");
    o.check(moving_average_7d(std::vector<double>{0, 0, 0, 0, 0, 0, 7})[6] == 1.0, "MA [0..0,7]");
    o.check(moving_average_7d(std::vector<double>{3, 6, 9, 12, 15, 18})[2] == 6.0, "MA partial window");
    // Ranking with ties.
    const std::vector<std::string> abc{"A", "B", "C"};
    o.check(rank_tracts(abc, {{"A", 5}, {"B", 3}, {"C", 1}}) == std::vector<double>{1, 2, 3}, "rank strict");
    o.check(rank_tracts(abc, {{"A", 5}, {"B", 5}, {"C", 1}}) == std::vector<double>{1.5, 1.5, 3}, "rank ties");
    o.check(rank_tracts({"A"}, {{"A", 4}}) == std::vector<double>{1}, "rank singleton");
    // Cosine.
    const std::vector<double> v{1, 2, 3};
    o.check(cosine(v, v) == 1.0, "cosine a=a");
    o.check(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0, "cosine orthogonal");
    o.check(cosine(std::vector<double>{1, 2}, std::vector<double>{-1, -2}) == -1.0, "cosine opposite");
    // MAPE.
    o.check(mape(v, v, MapeMode::Symmetric).value == 0.0, "MAPE a=a");
    o.check(mape(std::vector<double>{2}, std::vector<double>{3}, MapeMode::BaseA).value == 0.5, "MAPE base-a");
    o.check(mape(std::vector<double>{2}, std::vector<double>{3}, MapeMode::Symmetric).value == 0.4, "MAPE symmetric");
    // Pearson.
    const std::vector<double> a{1, 4, 2, 8, 5};
    std::vector<double> affine, neg;
    for (double x : a) {
        affine.push_back(2 * x + 1);
        neg.push_back(-x);
    }
    o.check(pearson(a, affine) && std::abs(*pearson(a, affine) - 1.0) < 1e-15, "Pearson affine");
    o.check(pearson(a, neg) && std::abs(*pearson(a, neg) + 1.0) < 1e-15, "Pearson negated");
    o.check(!pearson(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), "Pearson constant");
    // Euclidean.
    o.check(euclidean(a, a) == 0.0, "Euclidean a=a");
    o.check(euclidean(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == 5.0, "Euclidean 3-4-5");
    bool threw = false;
    try {
        euclidean(std::vector<double>{}, std::vector<double>{});
    } catch (const std::invalid_argument&) {
        threw = true;
    }
    o.check(threw, "Euclidean on empty input did not raise");
    if (o.pass)
        o.detail = "moving average, ranks, cosine, MAPE, Pearson, Euclidean";
    return o;
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"motif census equals brute-force oracle", motif_census_matches_oracle},
        {"motif attribute medians equal sort-based oracle", motif_attributes_match_oracle},
        {"macro metrics equal brute-force oracle", macro_metrics_match_oracle},
        {"modularity", modularity_checks},
        {"DTW equals full dynamic program", dtw_matches_oracle},
        {"noiseless ingest recovers ground truth", noiseless_round_trip},
        {"end-to-end determinism", end_to_end_determinism},
        {"verdict table is not constant", verdicts_vary},
        {"census scale and sampling accuracy", scale_and_sampling},
        {"unit examples", unit_examples},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::printf("criterion %2zu %s  %s: %s (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
