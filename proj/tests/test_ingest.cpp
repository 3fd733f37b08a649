#include "mobnet/ingest.hpp"

#include <gtest/gtest.h>

using namespace mobnet;

namespace {

// Meters to degrees of latitude on the model sphere.
constexpr double kDegPerMeter = 180.0 / (M_PI * kEarthRadiusM);

std::vector<Ping> dwell(const std::string& id, GeoPoint at, std::int64_t t0, std::int64_t t1,
                        std::int64_t step)
{
    std::vector<Ping> out;
    for (std::int64_t t = t0; t <= t1; t += step)
        out.push_back({id, t, at});
    return out;
}

}  // namespace

TEST(ParsePings, ValidRow)
{
    const auto r = parse_pings("d1,1580515200,41.8,-88.0\n");
    ASSERT_EQ(r.pings.size(), 1u);
    EXPECT_EQ(r.pings[0], (Ping{"d1", 1580515200, {41.8, -88.0}}));
    EXPECT_TRUE(r.rejected.empty());
}

TEST(ParsePings, MalformedTimestampRejectedWithLine)
{
    const auto r = parse_pings("d1,notatime,41.8,-88.0");
    EXPECT_TRUE(r.pings.empty());
    ASSERT_EQ(r.rejected.size(), 1u);
    EXPECT_EQ(r.rejected[0].line, 1u);
}

TEST(ParsePings, LatitudeOutOfRangeRejected)
{
    const auto r = parse_pings("device_id,timestamp,lat,lon\nd1,100,95,-88.0\nd1,200,41,-88\n");
    ASSERT_EQ(r.rejected.size(), 1u);
    EXPECT_EQ(r.rejected[0].line, 2u);
    EXPECT_EQ(r.rejected[0].reason, "coordinate out of range");
    EXPECT_EQ(r.pings.size(), 1u);
}

TEST(ParsePings, EmptyInput)
{
    const auto r = parse_pings("");
    EXPECT_TRUE(r.pings.empty());
    EXPECT_EQ(r.total_rows(), 0u);
}

TEST(ParsePings, RowConservation)
{
    Rng rng(5);
    std::string text = "device_id,timestamp,lat,lon\n";
    const char* bad[] = {"x,1,2", "x,abc,1,1", "x,1,1,200", ",1,1,1", "x,-5,1,1", "x,1,nan,1"};
    std::size_t expect_bad = 0;
    for (int i = 0; i < 500; ++i) {
        if (rng.bernoulli(0.2)) {
            text += bad[rng.below(6)];
            ++expect_bad;
        } else {
            text += "d" + std::to_string(rng.below(10)) + "," + std::to_string(rng.below(100000)) +
                    ",41.5,-87.5";
        }
        text += '\n';
    }
    const auto r = parse_pings(text);
    EXPECT_EQ(r.total_rows(), 500u);
    EXPECT_EQ(r.rejected.size(), expect_bad);
}

TEST(DetectStops, SingleCluster)
{
    const auto pings = dwell("d", {41.8, -88.0}, 0, 600, 60);  // 11 pings
    const auto stops = detect_stops(pings);
    ASSERT_EQ(stops.size(), 1u);
    EXPECT_EQ(stops[0].t_end - stops[0].t_start, 600);
}

TEST(DetectStops, DwellTooShort)
{
    const std::vector<Ping> pings{{"d", 0, {41.8, -88.0}}, {"d", 60, {41.8 + 10000 * kDegPerMeter, -88.0}}};
    EXPECT_TRUE(detect_stops(pings).empty());
}

TEST(DetectStops, TwoClustersHandTrace)
{
    // Cluster A spans 0..400 s at p1; cluster B spans 500..900 s at p2, 1 km away.
    // Anchor 0: pings 0..400 are within radius, 500 is not -> span 400 >= 300, Stop A.
    // Anchor 500: pings 500..900 -> span 400, Stop B.
    const GeoPoint p1{41.8, -88.0}, p2{41.8 + 1000 * kDegPerMeter, -88.0};
    auto pings = dwell("d", p1, 0, 400, 100);
    const auto b = dwell("d", p2, 500, 900, 100);
    pings.insert(pings.end(), b.begin(), b.end());
    const auto stops = detect_stops(pings);
    ASSERT_EQ(stops.size(), 2u);
    EXPECT_EQ(stops[0].t_start, 0);
    EXPECT_EQ(stops[0].t_end, 400);
    EXPECT_EQ(stops[0].pos, p1);
    EXPECT_EQ(stops[1].t_start, 500);
    EXPECT_EQ(stops[1].t_end, 900);
    EXPECT_EQ(stops[1].pos, p2);
}

TEST(DetectStops, MedoidIsRobustToOutlier)
{
    const GeoPoint c{41.8, -88.0};
    std::vector<Ping> pings;
    for (int i = 0; i < 5; ++i)
        pings.push_back({"d", i * 100, {c.lat + (i == 2 ? 80 : i) * kDegPerMeter, c.lon}});
    const auto stops = detect_stops(pings);
    ASSERT_EQ(stops.size(), 1u);
    // Offsets 0,1,80,3,4 m: the 3 m ping minimises the summed distance.
    EXPECT_NEAR(stops[0].pos.lat, c.lat + 3 * kDegPerMeter, 1e-12);
}

TEST(DetectStops, UnsortedInputIsAnError)
{
    const std::vector<Ping> pings{{"d", 100, {0, 0}}, {"d", 50, {0, 0}}};
    EXPECT_THROW(detect_stops(pings), DataError);
}

TEST(DetectStops, EmptyInput) { EXPECT_TRUE(detect_stops({}).empty()); }

TEST(DetectStops, ConcatenationInvariance)
{
    // Random walk alternating dwells and moves; splitting at any stop boundary
    // and re-running on both halves must reproduce the same stops.
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Ping> pings;
        GeoPoint at{41.8, -88.0};
        std::int64_t t = 0;
        for (int seg = 0; seg < 8; ++seg) {
            const int n = 2 + int(rng.below(12));
            for (int k = 0; k < n; ++k) {
                pings.push_back({"d", t, {at.lat + rng.uniform(-30, 30) * kDegPerMeter, at.lon}});
                t += 20 + std::int64_t(rng.below(90));
            }
            at.lat += rng.uniform(150, 2000) * kDegPerMeter;
        }
        const auto all = detect_stops(pings);
        for (const auto& s : all) {
            // Split right after the stop's last ping.
            std::size_t cut = 0;
            while (cut < pings.size() && pings[cut].t <= s.t_end)
                ++cut;
            const std::span<const Ping> span(pings);
            auto left = detect_stops(span.first(cut));
            const auto right = detect_stops(span.subspan(cut));
            left.insert(left.end(), right.begin(), right.end());
            EXPECT_EQ(left, all);
        }
    }
}

TEST(ExtractTrips, ConsecutivePairs)
{
    std::vector<Stop> stops{{"d", 0, 100, {0, 0}, "A"}, {"d", 200, 300, {0, 0.01}, "B"},
                            {"d", 400, 500, {0, 0.02}, "C"}};
    const auto r = extract_trips(stops);
    ASSERT_EQ(r.trips.size(), 2u);
    EXPECT_EQ(r.trips[0].origin.geoid, "A");
    EXPECT_EQ(r.trips[0].dest.geoid, "B");
    EXPECT_EQ(r.trips[1].origin.geoid, "B");
    EXPECT_EQ(r.trips[1].dest.geoid, "C");
    EXPECT_NEAR(r.trips[0].distance_m, haversine({0, 0}, {0, 0.01}), 1e-9);
}

TEST(ExtractTrips, SingleStopHasNoTrips)
{
    std::vector<Stop> stops{{"d", 0, 100, {0, 0}, "A"}};
    EXPECT_TRUE(extract_trips(stops).trips.empty());
}

TEST(ExtractTrips, DurationExcludesDwell)
{
    std::vector<Stop> stops{{"d", 0, 1000, {0, 0}, "A"}, {"d", 1600, 3000, {0, 0.01}, "B"}};
    const auto r = extract_trips(stops);
    ASSERT_EQ(r.trips.size(), 1u);
    EXPECT_EQ(r.trips[0].duration_s(), 600);
}

TEST(ExtractTrips, DropsTripsWithNoGeoidAtEitherEnd)
{
    std::vector<Stop> stops{{"d", 0, 100, {0, 0}, std::nullopt},
                            {"d", 200, 300, {0, 0}, std::nullopt},
                            {"d", 400, 500, {0, 0}, "C"}};
    const auto r = extract_trips(stops);
    EXPECT_EQ(r.dropped_no_geoid, 1u);
    ASSERT_EQ(r.trips.size(), 1u);  // one-sided geoid is kept
    for (const auto& t : r.trips)
        EXPECT_GE(t.duration_s(), 0);
}

TEST(ReadTextFile, GzipAndPlain)
{
    const std::string text = "device_id,timestamp,lat,lon\nd1,10,1,2\n";
    const std::string plain = ::testing::TempDir() + "pings_plain.csv";
    const std::string gz = ::testing::TempDir() + "pings.csv.gz";
    {
        FILE* f = std::fopen(plain.c_str(), "wb");
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
        gzFile g = gzopen(gz.c_str(), "wb");
        gzwrite(g, text.data(), unsigned(text.size()));
        gzclose(g);
    }
    EXPECT_EQ(read_text_file(plain), text);
    EXPECT_EQ(read_text_file(gz), text);
    EXPECT_THROW(read_text_file(::testing::TempDir() + "does_not_exist.csv"), DataError);
}
