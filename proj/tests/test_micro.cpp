#include "mobnet/micro.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace mobnet;

namespace {

constexpr double kDegPerMeter = 180.0 / (M_PI * kEarthRadiusM);
const Date kDay = Date::parse("2020-02-03");

Stop stop_at(const std::string& device, std::int64_t t0, std::int64_t t1, const std::string& geoid,
             GeoPoint pos = {41.8, -88.0})
{
    return {device, t0, t1, pos, geoid};
}

Trip make_trip(const std::string& device, const std::string& o, const std::string& d, double dist,
               std::int64_t depart = 0, std::int64_t arrive = 0)
{
    Trip t;
    t.device_id = device;
    t.origin = stop_at(device, depart - 10, depart, o);
    t.dest = stop_at(device, arrive, arrive + 10, d);
    t.distance_m = dist;
    return t;
}

}  // namespace

TEST(Micro, TractDayExamples)
{
    const std::vector<Trip> one_device{make_trip("d1", "A", "B", 1000), make_trip("d1", "B", "A", 3000)};
    const auto m = tract_day_metrics(one_device, {}, "A", kDay);
    ASSERT_TRUE(m);
    EXPECT_EQ(m->avg_trip_count, 2.0);
    EXPECT_EQ(m->avg_distance_m, 2000.0);
    EXPECT_EQ(m->trip_count, 2);

    const std::vector<Trip> timed{make_trip("d1", "A", "B", 10, 1000, 1600)};
    EXPECT_EQ(tract_day_metrics(timed, {}, "A", kDay)->avg_travel_time_s, 600.0);

    const std::vector<Trip> two_devices{make_trip("d1", "A", "B", 10), make_trip("d2", "C", "A", 10)};
    const auto two = tract_day_metrics(two_devices, {}, "A", kDay);
    EXPECT_EQ(two->avg_trip_count, 1.0);
    EXPECT_EQ(two->device_count, 2);

    EXPECT_FALSE(tract_day_metrics(two_devices, {}, "Z", kDay));
}

TEST(Micro, RadiusOfGyration)
{
    const GeoPoint p{41.8, -88.0};
    EXPECT_EQ(radius_of_gyration(std::vector{p}), 0.0);

    const double half = 500 * kDegPerMeter;
    const std::vector<GeoPoint> two{{-half, 0}, {half, 0}};
    EXPECT_NEAR(radius_of_gyration(two), 500.0, 0.1);

    // Square of side s at the equator: every corner sits s/sqrt(2) from the centre.
    const double s = 200.0, h = s / 2 * kDegPerMeter;
    const std::vector<GeoPoint> square{{-h, -h}, {-h, h}, {h, h}, {h, -h}};
    EXPECT_NEAR(radius_of_gyration(square), s / std::sqrt(2.0), s / std::sqrt(2.0) * 1e-3);

    EXPECT_THROW(radius_of_gyration({}), std::invalid_argument);
}

TEST(Micro, RadiusOfGyrationProperties)
{
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<GeoPoint> pts;
        const int n = 1 + int(rng.below(8));
        for (int i = 0; i < n; ++i)
            pts.push_back({41.8 + rng.uniform(-0.05, 0.05), -88.0 + rng.uniform(-0.05, 0.05)});
        const double r = radius_of_gyration(pts);
        auto shuffled = pts;
        std::shuffle(shuffled.begin(), shuffled.end(), rng.engine());
        EXPECT_NEAR(radius_of_gyration(shuffled), r, 1e-6);

        // A point far outside the current spread cannot shrink it.
        GeoPoint c{0, 0};
        for (auto& q : pts) {
            c.lat += q.lat / n;
            c.lon += q.lon / n;
        }
        auto more = pts;
        more.push_back({c.lat + (r + 5000) * kDegPerMeter, c.lon});
        EXPECT_GE(radius_of_gyration(more), r - 1e-9);
    }
}

TEST(Micro, AverageRadiusUsesContributingDevices)
{
    const double d = kDegPerMeter;
    const std::vector<Stop> stops{stop_at("d1", 0, 10, "A", {0, 0}), stop_at("d1", 20, 30, "B", {1000 * d, 0}),
                                  stop_at("d2", 0, 10, "C", {0, 0})};
    const std::vector<Trip> trips{make_trip("d1", "A", "B", 1000)};
    const auto m = tract_day_metrics(trips, stops, "A", kDay);
    EXPECT_NEAR(m->avg_rog_m, 500.0, 0.1);
}

TEST(Micro, AllTractsCountsIntraTractTripOnce)
{
    const std::vector<Trip> trips{make_trip("d1", "A", "A", 100), make_trip("d1", "A", "B", 300)};
    const auto all = all_tract_day_metrics(trips, {}, kDay);
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0].geoid, "A");
    EXPECT_EQ(all[0].trip_count, 2);
    EXPECT_EQ(all[1].geoid, "B");
    EXPECT_EQ(all[1].trip_count, 1);
    EXPECT_EQ(*tract_day_metrics(trips, {}, "A", kDay), all[0]);

    const auto only_b = all_tract_day_metrics(trips, {}, kDay, [](const std::string& g) { return g == "B"; });
    ASSERT_EQ(only_b.size(), 1u);
}

TEST(Micro, DisjointDevicesCompose)
{
    Rng rng(4);
    const char* tracts[] = {"A", "B", "C", "D"};
    std::vector<Trip> left, right;
    for (int i = 0; i < 200; ++i) {
        const std::string dev = "d" + std::to_string(rng.below(20));
        auto t = make_trip(dev, tracts[rng.below(4)], tracts[rng.below(4)], rng.uniform(0, 5000));
        (dev < "d10" ? left : right).push_back(t);
    }
    auto both = left;
    both.insert(both.end(), right.begin(), right.end());
    for (const char* g : tracts) {
        const auto u = tract_day_metrics(both, {}, g, kDay);
        const auto a = tract_day_metrics(left, {}, g, kDay);
        const auto b = tract_day_metrics(right, {}, g, kDay);
        ASSERT_TRUE(u && a && b);
        EXPECT_EQ(u->trip_count, a->trip_count + b->trip_count);
        EXPECT_EQ(u->device_count, a->device_count + b->device_count);
        EXPECT_NEAR(u->avg_distance_m * double(u->trip_count),
                    a->avg_distance_m * double(a->trip_count) + b->avg_distance_m * double(b->trip_count),
                    1e-6);
        EXPECT_GE(u->avg_trip_count, 1.0);
    }
}

TEST(Micro, Ranking)
{
    const std::vector<std::string> order{"A", "B", "C"};
    EXPECT_EQ(rank_tracts(order, {{"A", 5}, {"B", 3}, {"C", 1}}), (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(rank_tracts(order, {{"A", 5}, {"B", 5}, {"C", 1}}), (std::vector<double>{1.5, 1.5, 3}));
    EXPECT_EQ(rank_tracts({"A"}, {{"A", 7}}), (std::vector<double>{1}));
    // Omitted tracts are padded with k + 1.
    EXPECT_EQ(rank_tracts(order, {{"B", 2}}), (std::vector<double>{2, 1, 2}));
}

TEST(Micro, RanksSumToTriangularNumber)
{
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> order;
        std::map<std::string, double> values;
        const int n = 1 + int(rng.below(15));
        for (int i = 0; i < n; ++i) {
            order.push_back("T" + std::to_string(i));
            if (rng.bernoulli(0.7))
                values[order.back()] = double(rng.below(5));
        }
        const auto ranks = rank_tracts(order, values);
        const double k = double(values.size());
        double sum = 0;
        for (std::size_t i = 0; i < order.size(); ++i)
            if (values.count(order[i]))
                sum += ranks[i];
            else
                EXPECT_EQ(ranks[i], k + 1);
        EXPECT_EQ(sum, k * (k + 1) / 2);
    }
}
