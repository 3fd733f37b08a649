#pragma once

// Census-tract geometry: GeoJSON loading, point-in-polygon lookup behind a
// bounding-box R-tree, and great-circle distance.

#include "mobnet/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <json.hpp>

namespace mobnet {

inline constexpr double kEarthRadiusM = 6371008.8;

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    bool valid() const
    {
        return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
               lon >= -180.0 && lon <= 180.0;
    }
    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
inline double haversine(const GeoPoint& a, const GeoPoint& b)
{
    constexpr double rad = M_PI / 180.0;
    const double dlat = (b.lat - a.lat) * rad;
    const double dlon = (b.lon - a.lon) * rad;
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    double h = s1 * s1 + std::cos(a.lat * rad) * std::cos(b.lat * rad) * s2 * s2;
    h = std::min(1.0, h);
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

/// Polygon vertex in GeoJSON order.
struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
    friend bool operator==(const LonLat&, const LonLat&) = default;
};

using Ring = std::vector<LonLat>;

struct Polygon {
    Ring outer;
    std::vector<Ring> holes;
};

struct BBox {
    double min_lon = 0, min_lat = 0, max_lon = 0, max_lat = 0;

    bool contains(const GeoPoint& p) const
    {
        return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat && p.lat <= max_lat;
    }
};

struct Tract {
    std::string geoid;
    std::vector<Polygon> polygons;
    BBox bbox;
    GeoPoint centroid;
};

namespace geo_detail {

inline bool on_segment(const LonLat& a, const LonLat& b, double x, double y)
{
    const double cross = (b.lon - a.lon) * (y - a.lat) - (b.lat - a.lat) * (x - a.lon);
    if (cross != 0.0)
        return false;
    return x >= std::min(a.lon, b.lon) && x <= std::max(a.lon, b.lon) &&
           y >= std::min(a.lat, b.lat) && y <= std::max(a.lat, b.lat);
}

inline bool ring_boundary(const Ring& ring, double x, double y)
{
    for (std::size_t i = 0; i + 1 < ring.size(); ++i)
        if (on_segment(ring[i], ring[i + 1], x, y))
            return true;
    return false;
}

// Number of crossings of the rightward ray from (x, y) with the ring.
inline int ring_crossings(const Ring& ring, double x, double y)
{
    int crossings = 0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const LonLat& a = ring[i];
        const LonLat& b = ring[i + 1];
        if ((a.lat > y) != (b.lat > y)) {
            const double xi = a.lon + (y - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
            if (x < xi)
                ++crossings;
        }
    }
    return crossings;
}

/// Twice the signed area and the (unnormalised) first moments of a closed ring.
struct RingMoments {
    double area2 = 0, mx = 0, my = 0;
};

inline RingMoments ring_moments(const Ring& ring)
{
    RingMoments m;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const double cross = ring[i].lon * ring[i + 1].lat - ring[i + 1].lon * ring[i].lat;
        m.area2 += cross;
        m.mx += (ring[i].lon + ring[i + 1].lon) * cross;
        m.my += (ring[i].lat + ring[i + 1].lat) * cross;
    }
    return m;
}

}  // namespace geo_detail

/// True if the point is inside the tract or on its boundary (even-odd rule over all rings).
inline bool tract_contains(const Tract& tract, const GeoPoint& p)
{
    using namespace geo_detail;
    if (!tract.bbox.contains(p))
        return false;
    int crossings = 0;
    for (const auto& poly : tract.polygons) {
        if (ring_boundary(poly.outer, p.lon, p.lat))
            return true;
        crossings += ring_crossings(poly.outer, p.lon, p.lat);
        for (const auto& hole : poly.holes) {
            if (ring_boundary(hole, p.lon, p.lat))
                return true;
            crossings += ring_crossings(hole, p.lon, p.lat);
        }
    }
    return crossings % 2 == 1;
}

/// Area-weighted planar centroid of the outer rings, in lon/lat space.
inline GeoPoint planar_centroid(const std::vector<Polygon>& polygons)
{
    double area = 0, mx = 0, my = 0;
    for (const auto& poly : polygons) {
        auto m = geo_detail::ring_moments(poly.outer);
        // Normalise orientation so every outer ring adds positive area.
        if (m.area2 < 0) {
            m.area2 = -m.area2;
            m.mx = -m.mx;
            m.my = -m.my;
        }
        area += m.area2;
        mx += m.mx;
        my += m.my;
    }
    if (area > 0)
        return GeoPoint{my / (3.0 * area), mx / (3.0 * area)};
    // Degenerate rings: mean of distinct vertices.
    double sx = 0, sy = 0;
    std::size_t n = 0;
    for (const auto& poly : polygons)
        for (std::size_t i = 0; i + 1 < poly.outer.size(); ++i, ++n) {
            sx += poly.outer[i].lon;
            sy += poly.outer[i].lat;
        }
    return GeoPoint{sy / double(n), sx / double(n)};
}

/// Fills bbox and centroid, validating ring closure and size.
inline Tract make_tract(std::string geoid, std::vector<Polygon> polygons)
{
    if (polygons.empty())
        throw DataError("tract " + geoid + ": no polygons");
    Tract t;
    t.geoid = std::move(geoid);
    t.polygons = std::move(polygons);
    t.bbox = {180, 90, -180, -90};
    auto check_ring = [&](const Ring& ring, bool outer) {
        if (ring.size() < 4)
            throw DataError("tract " + t.geoid + ": ring has fewer than 4 vertices");
        if (!(ring.front() == ring.back()))
            throw DataError("tract " + t.geoid + ": unclosed ring");
        for (const auto& v : ring) {
            if (!GeoPoint{v.lat, v.lon}.valid())
                throw DataError("tract " + t.geoid + ": vertex out of range");
            if (outer) {
                t.bbox.min_lon = std::min(t.bbox.min_lon, v.lon);
                t.bbox.max_lon = std::max(t.bbox.max_lon, v.lon);
                t.bbox.min_lat = std::min(t.bbox.min_lat, v.lat);
                t.bbox.max_lat = std::max(t.bbox.max_lat, v.lat);
            }
        }
    };
    for (const auto& poly : t.polygons) {
        check_ring(poly.outer, true);
        for (const auto& hole : poly.holes)
            check_ring(hole, false);
    }
    t.centroid = planar_centroid(t.polygons);
    return t;
}

/// Immutable set of tracts with a bounding-box R-tree for point lookup.
class TractIndex {
public:
    TractIndex() = default;

    explicit TractIndex(std::vector<Tract> tracts, std::vector<std::string> diagnostics = {})
        : tracts_(std::move(tracts)), diagnostics_(std::move(diagnostics))
    {
        if (tracts_.empty())
            throw DataError("no tracts");
        std::sort(tracts_.begin(), tracts_.end(),
                  [](const Tract& a, const Tract& b) { return a.geoid < b.geoid; });
        for (std::size_t i = 0; i + 1 < tracts_.size(); ++i)
            if (tracts_[i].geoid == tracts_[i + 1].geoid)
                throw DataError("duplicate GEOID " + tracts_[i].geoid);
        std::vector<Entry> entries;
        entries.reserve(tracts_.size());
        for (std::size_t i = 0; i < tracts_.size(); ++i) {
            const auto& b = tracts_[i].bbox;
            entries.emplace_back(Box(Point(b.min_lon, b.min_lat), Point(b.max_lon, b.max_lat)), i);
        }
        tree_ = Tree(entries.begin(), entries.end());  // packed bulk load
    }

    std::size_t size() const { return tracts_.size(); }
    const std::vector<Tract>& tracts() const { return tracts_; }
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

    const Tract* find(std::string_view geoid) const
    {
        auto it = std::lower_bound(tracts_.begin(), tracts_.end(), geoid,
                                   [](const Tract& t, std::string_view g) { return t.geoid < g; });
        return it != tracts_.end() && it->geoid == geoid ? &*it : nullptr;
    }

    /// Geoid of the tract containing p. Boundary points go to the smallest candidate geoid.
    std::optional<std::string> locate(const GeoPoint& p) const
    {
        std::vector<Entry> hits;
        tree_.query(boost::geometry::index::intersects(Point(p.lon, p.lat)),
                    std::back_inserter(hits));
        std::vector<std::size_t> candidates;
        candidates.reserve(hits.size());
        for (const auto& h : hits)
            candidates.push_back(h.second);
        std::sort(candidates.begin(), candidates.end());
        for (auto i : candidates)
            if (tract_contains(tracts_[i], p))
                return tracts_[i].geoid;
        return std::nullopt;
    }

    /// Same contract as locate() without the R-tree.
    std::optional<std::string> locate_scan(const GeoPoint& p) const
    {
        for (const auto& t : tracts_)
            if (tract_contains(t, p))
                return t.geoid;
        return std::nullopt;
    }

private:
    using Point = boost::geometry::model::point<double, 2, boost::geometry::cs::cartesian>;
    using Box = boost::geometry::model::box<Point>;
    using Entry = std::pair<Box, std::size_t>;
    using Tree = boost::geometry::index::rtree<Entry, boost::geometry::index::rstar<16>>;

    std::vector<Tract> tracts_;
    std::vector<std::string> diagnostics_;
    Tree tree_;
};

namespace geo_detail {

inline Ring parse_ring(const nlohmann::json& coords)
{
    Ring ring;
    for (const auto& v : coords) {
        if (!v.is_array() || v.size() < 2 || !v[0].is_number() || !v[1].is_number())
            throw DataError("bad coordinate");
        ring.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return ring;
}

inline Polygon parse_polygon(const nlohmann::json& rings)
{
    if (!rings.is_array() || rings.empty())
        throw DataError("polygon without rings");
    Polygon poly;
    poly.outer = parse_ring(rings[0]);
    for (std::size_t i = 1; i < rings.size(); ++i)
        poly.holes.push_back(parse_ring(rings[i]));
    return poly;
}

}  // namespace geo_detail

/// Builds a TractIndex from a GeoJSON FeatureCollection. Features without the id
/// property are skipped and reported in diagnostics().
inline TractIndex load_tracts(std::string_view geojson, const std::string& id_key = "GEOID")
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(geojson);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("geojson parse error: ") + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
        !doc.contains("features") || !doc["features"].is_array())
        throw DataError("geojson is not a FeatureCollection");

    std::vector<Tract> tracts;
    std::vector<std::string> diagnostics;
    std::size_t index = 0;
    for (const auto& feature : doc["features"]) {
        const std::size_t n = index++;
        const auto props = feature.find("properties");
        if (props == feature.end() || !props->is_object() || !props->contains(id_key) ||
            !(*props)[id_key].is_string()) {
            diagnostics.push_back("feature " + std::to_string(n) + ": missing " + id_key);
            continue;
        }
        std::string geoid = (*props)[id_key].get<std::string>();
        const auto geom = feature.find("geometry");
        if (geom == feature.end() || !geom->is_object())
            throw DataError("tract " + geoid + ": missing geometry");
        const std::string type = geom->value("type", "");
        const auto& coords = (*geom)["coordinates"];
        std::vector<Polygon> polygons;
        try {
            if (type == "Polygon") {
                polygons.push_back(geo_detail::parse_polygon(coords));
            } else if (type == "MultiPolygon") {
                for (const auto& p : coords)
                    polygons.push_back(geo_detail::parse_polygon(p));
            } else {
                throw DataError("unsupported geometry type '" + type + "'");
            }
        } catch (const DataError& e) {
            throw DataError("tract " + geoid + ": " + e.what());
        }
        tracts.push_back(make_tract(std::move(geoid), std::move(polygons)));
    }
    return TractIndex(std::move(tracts), std::move(diagnostics));
}

/// GeoJSON FeatureCollection for a set of tracts (inverse of load_tracts).
inline std::string tracts_to_geojson(const std::vector<Tract>& tracts,
                                     const std::string& id_key = "GEOID")
{
    auto ring_json = [](const Ring& ring) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& v : ring)
            r.push_back({v.lon, v.lat});
        return r;
    };
    nlohmann::json features = nlohmann::json::array();
    for (const auto& t : tracts) {
        nlohmann::json geometry;
        auto poly_json = [&](const Polygon& p) {
            nlohmann::json rings = nlohmann::json::array();
            rings.push_back(ring_json(p.outer));
            for (const auto& h : p.holes)
                rings.push_back(ring_json(h));
            return rings;
        };
        if (t.polygons.size() == 1) {
            geometry = {{"type", "Polygon"}, {"coordinates", poly_json(t.polygons[0])}};
        } else {
            nlohmann::json all = nlohmann::json::array();
            for (const auto& p : t.polygons)
                all.push_back(poly_json(p));
            geometry = {{"type", "MultiPolygon"}, {"coordinates", all}};
        }
        features.push_back(
            {{"type", "Feature"}, {"properties", {{id_key, t.geoid}}}, {"geometry", geometry}});
    }
    nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
    return doc.dump(1);
}

}  // namespace mobnet
