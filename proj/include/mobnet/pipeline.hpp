#pragma once

// Subcommands over a run directory: synth, ingest, build-network, analyze
// (macro | motif | micro), compare and report. Each one reads the stores
// written by the previous stage and rewrites the run manifest.

#include "mobnet/config.hpp"
#include "mobnet/digest.hpp"
#include "mobnet/geo.hpp"
#include "mobnet/ingest.hpp"
#include "mobnet/macro.hpp"
#include "mobnet/micro.hpp"
#include "mobnet/motifs.hpp"
#include "mobnet/network.hpp"
#include "mobnet/parallel.hpp"
#include "mobnet/similarity.hpp"
#include "mobnet/stores.hpp"
#include "mobnet/synth.hpp"

#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace mobnet {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Run directory layout

struct RunPaths {
    fs::path root;

    fs::path trips(const std::string& src, const std::string& fips, Date d) const
    {
        return root / "trips" / src / fips / (d.str() + ".csv");
    }
    fs::path stops(const std::string& src, const std::string& fips, Date d) const
    {
        return root / "stops" / src / fips / (d.str() + ".csv");
    }
    fs::path ingest_report(const std::string& src, const std::string& fips) const
    {
        return root / "ingest" / (src + "_" + fips + ".json");
    }
    fs::path network(const std::string& src, const std::string& fips, const std::string& part) const
    {
        return root / "networks" / src / (fips + "_" + part + ".csv");
    }
    fs::path macro(const std::string& src, const std::string& fips, const std::string& metric) const
    {
        return root / "macro" / src / fips / (metric + ".csv");
    }
    fs::path motif(const std::string& src, const std::string& fips) const
    {
        return root / "motif" / src / (fips + ".csv");
    }
    fs::path micro(const std::string& src, const std::string& fips) const
    {
        return root / "micro" / src / (fips + ".csv");
    }
    fs::path compare(const std::string& name) const { return root / "compare" / name; }
    fs::path figure(const std::string& name) const { return root / "compare" / "figures" / name; }
    fs::path report(const std::string& name) const { return root / "report" / name; }
    fs::path manifest() const { return root / "manifest.json"; }
};

// ---------------------------------------------------------------------------
// File helpers

inline void write_file(const fs::path& path, std::string_view content)
{
    fs::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), std::streamsize(content.size()));
        if (!out)
            throw DataError("cannot write " + path.string());
    }
    fs::rename(tmp, path);
}

inline void write_gzip(const fs::path& path, std::string_view content)
{
    fs::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    gzFile f = gzopen(tmp.c_str(), "wb6");
    if (!f)
        throw DataError("cannot write " + path.string());
    // gzip headers carry no timestamp when written through gzopen, so equal
    // content gives equal bytes.
    std::size_t done = 0;
    while (done < content.size()) {
        const unsigned chunk = unsigned(std::min<std::size_t>(content.size() - done, 1u << 30));
        if (gzwrite(f, content.data() + done, chunk) != int(chunk)) {
            gzclose(f);
            throw DataError("cannot write " + path.string());
        }
        done += chunk;
    }
    if (gzclose(f) != Z_OK)
        throw DataError("cannot write " + path.string());
    fs::rename(tmp, path);
}

inline std::string read_required(const fs::path& path, const std::string& what)
{
    if (!fs::exists(path))
        throw DataError(what + ": missing " + path.string());
    return read_text_file(path.string());
}

// ---------------------------------------------------------------------------
// Manifest

/// Lists every file under the run directory with its SHA-256, plus the
/// resolved settings. Rewritten after each subcommand.
inline void write_manifest(const fs::path& root, const nlohmann::json& settings)
{
    std::vector<std::string> files;
    if (fs::exists(root))
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file()) {
                const auto rel = fs::relative(e.path(), root).generic_string();
                if (rel != "manifest.json")
                    files.push_back(rel);
            }
    std::sort(files.begin(), files.end());
    nlohmann::json list = nlohmann::json::array();
    for (const auto& rel : files) {
        const auto full = (root / rel).string();
        list.push_back({{"path", rel}, {"bytes", fs::file_size(full)}, {"sha256", sha256_file(full)}});
    }
    const nlohmann::json manifest{{"tool", "mobnet"}, {"version", kVersion}, {"settings", settings},
                                  {"files", list}};
    write_file(root / "manifest.json", manifest.dump(2) + "\n");
}

struct ManifestEntry {
    std::string path;
    std::uintmax_t bytes = 0;
    std::string sha256;
    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline std::vector<ManifestEntry> read_manifest(const fs::path& root)
{
    const auto j = nlohmann::json::parse(read_required(root / "manifest.json", "manifest"));
    std::vector<ManifestEntry> out;
    for (const auto& f : j.at("files"))
        out.push_back({f.at("path").get<std::string>(), f.at("bytes").get<std::uintmax_t>(),
                       f.at("sha256").get<std::string>()});
    return out;
}

// ---------------------------------------------------------------------------

namespace pipeline_detail {

inline TractIndex load_county_tracts(const RunConfig& cfg, const CountyConfig& county)
{
    std::string text;
    try {
        text = read_text_file(county.tracts);
    } catch (const DataError& e) {
        throw DataError("county " + county.fips + ": cannot read tracts: " + e.what());
    }
    try {
        return load_tracts(text, cfg.geoid_property);
    } catch (const std::exception& e) {
        throw DataError("county " + county.fips + ": " + e.what());
    }
}

/// Sorted geoids of the index that belong to the county.
inline std::vector<std::string> county_geoids(const TractIndex& index, const std::string& fips)
{
    std::vector<std::string> out;
    for (const auto& t : index.tracts())
        if (geoid_in_county(t.geoid, fips))
            out.push_back(t.geoid);
    return out;
}

inline std::optional<fs::path> find_ping_file(const fs::path& dir, Date d)
{
    for (const char* ext : {".csv.gz", ".csv"}) {
        const auto p = dir / (d.str() + ext);
        if (fs::exists(p))
            return p;
    }
    return std::nullopt;
}

inline std::vector<MobilityNetwork> load_networks(const RunPaths& paths, const RunConfig& cfg,
                                                  const std::string& src, const std::string& fips,
                                                  std::map<Date, MobilityNetwork>& by_date)
{
    const std::string what = "source " + src + " county " + fips + " (run build-network first)";
    const auto days = parse_network_days(read_required(paths.network(src, fips, "days"), what));
    const auto nets = parse_networks(read_required(paths.network(src, fips, "edges"), what),
                                     read_required(paths.network(src, fips, "nodes"), what), fips);
    for (const auto& d : days) {
        MobilityNetwork empty;
        empty.county_fips = fips;
        empty.date = d.date;
        by_date.emplace(d.date, std::move(empty));
    }
    for (const auto& n : nets)
        by_date[n.date] = n;
    std::vector<MobilityNetwork> out;
    for (Date d : cfg.dates())
        if (auto it = by_date.find(d); it != by_date.end())
            out.push_back(it->second);
    return out;
}

inline std::string log_prefix(const std::string& src, const std::string& fips)
{
    return "[" + src + " " + fips + "] ";
}

}  // namespace pipeline_detail

// ---------------------------------------------------------------------------
// synth

/// Writes a synthetic county (tracts, devices, per-provider daily ping files,
/// ground-truth trips) and a ready-to-run config.json pointing at it.
inline void cmd_synth(const SynthConfig& s, const fs::path& out_dir, unsigned threads, std::ostream& log)
{
    validate(s);
    const auto world = generate_world(s.world);
    write_file(out_dir / "tracts.geojson", tracts_to_geojson(world.tracts));
    write_file(out_dir / "devices.csv", serialize_devices(world));
    const auto dates = date_range(s.date_start, s.date_end);
    for (const auto& profile : s.profiles) {
        std::vector<std::string> truth(dates.size());
        std::vector<std::size_t> devices(dates.size());
        parallel_for(dates.size(), threads, [&](std::size_t i, unsigned) {
            const auto day = emit_day(world, profile, dates[i], s.emit_seed, s.utc_offset_s);
            write_gzip(out_dir / "pings" / profile.name / (dates[i].str() + ".csv.gz"),
                       serialize_pings(day.pings));
            truth[i] = serialize_truth(day.truth);
        });
        std::string all = "date,device_id,o_geoid,d_geoid,depart_t,arrive_t\n";
        for (auto& t : truth)
            all += t.substr(t.find('\n') + 1);
        write_file(out_dir / "truth" / (profile.name + ".csv"), all);
        log << "synth: profile " << profile.name << " written for " << dates.size() << " days\n";
    }

    nlohmann::json pings = nlohmann::json::object();
    nlohmann::json sources = nlohmann::json::array();
    for (const auto& p : s.profiles) {
        pings[p.name] = "pings/" + p.name;
        sources.push_back(p.name);
    }
    const nlohmann::json cfg{
        {"counties",
         nlohmann::json::array({{{"fips", s.world.county_fips},
                                 {"name", s.county_name},
                                 {"tracts", "tracts.geojson"},
                                 {"pings", pings}}})},
        {"sources", sources},
        {"date_start", s.date_start.str()},
        {"date_end", s.date_end.str()},
        {"utc_offset_s", s.utc_offset_s},
        {"output_dir", "run"},
    };
    write_file(out_dir / "config.json", cfg.dump(2) + "\n");

    nlohmann::json profiles = nlohmann::json::array();
    for (const auto& p : s.profiles)
        profiles.push_back({{"name", p.name},
                            {"penetration", p.penetration},
                            {"ping_interval_s", p.ping_interval_s},
                            {"noise_sigma_m", p.noise_sigma_m},
                            {"dropout_p", p.dropout_p}});
    write_manifest(out_dir, {{"synth",
                              {{"tracts_per_side", s.world.tracts_per_side},
                               {"n_devices", s.world.n_devices},
                               {"seed", s.world.seed},
                               {"emit_seed", s.emit_seed},
                               {"county_fips", s.world.county_fips},
                               {"date_start", s.date_start.str()},
                               {"date_end", s.date_end.str()},
                               {"utc_offset_s", s.utc_offset_s},
                               {"profiles", profiles}}}});
}

// ---------------------------------------------------------------------------
// ingest

/// Pings -> stops -> trips for every (source, county, date). Writes one stop
/// store and one trip store per day that has a ping file, and a JSON report
/// per (source, county). Trips are assigned to the local day of departure.
inline void cmd_ingest(const RunConfig& cfg, std::ostream& log)
{
    using namespace pipeline_detail;
    const RunPaths paths{cfg.output_dir};
    const auto dates = cfg.dates();
    for (const auto& county : cfg.counties) {
        const auto index = load_county_tracts(cfg, county);
        for (const auto& diag : index.diagnostics())
            log << "warning: county " << county.fips << ": " << diag << '\n';
        for (const auto& src : cfg.sources) {
            const fs::path dir = county.pings.at(src);
            if (!fs::is_directory(dir))
                throw DataError("source " + src + " county " + county.fips + ": ping directory not found: " +
                                dir.string());
            std::map<Date, std::vector<Stop>> stops_by_day;
            std::map<Date, std::vector<Trip>> trips_by_day;
            std::set<Date> present;
            nlohmann::json days = nlohmann::json::array();
            nlohmann::json examples = nlohmann::json::array();
            std::size_t tot_accepted = 0, tot_rejected = 0, tot_dropped = 0;

            for (Date date : dates) {
                const auto file = find_ping_file(dir, date);
                if (!file) {
                    days.push_back({{"date", date.str()}, {"status", "missing"}});
                    log << "warning: " << log_prefix(src, county.fips) << "no ping file for " << date.str()
                        << '\n';
                    continue;
                }
                present.insert(date);
                auto parsed = parse_pings(read_text_file(file->string()));
                for (std::size_t k = 0; k < parsed.rejected.size() && examples.size() < 20; ++k)
                    examples.push_back({{"file", file->filename().string()},
                                        {"line", parsed.rejected[k].line},
                                        {"reason", parsed.rejected[k].reason}});
                const std::size_t accepted = parsed.pings.size(), rejected = parsed.rejected.size();
                if (accepted == 0)
                    log << "warning: " << log_prefix(src, county.fips) << "no accepted rows in "
                        << file->string() << '\n';

                const auto groups = group_by_device(std::move(parsed.pings));
                std::vector<std::vector<Stop>> dev_stops(groups.size());
                std::vector<TripExtraction> dev_trips(groups.size());
                parallel_for(groups.size(), cfg.threads, [&](std::size_t i, unsigned) {
                    auto s = detect_stops(groups[i], cfg.stops);
                    assign_geoids(s, index);
                    dev_trips[i] = extract_trips(s);
                    dev_stops[i] = std::move(s);
                });
                std::size_t n_stops = 0, n_trips = 0, dropped = 0;
                for (std::size_t i = 0; i < groups.size(); ++i) {
                    for (auto& s : dev_stops[i])
                        stops_by_day[Date::from_unix(s.t_start, cfg.utc_offset_s)].push_back(std::move(s));
                    for (auto& t : dev_trips[i].trips)
                        trips_by_day[Date::from_unix(t.depart_t(), cfg.utc_offset_s)].push_back(std::move(t));
                    n_stops += dev_stops[i].size();
                    n_trips += dev_trips[i].trips.size();
                    dropped += dev_trips[i].dropped_no_geoid;
                }
                tot_accepted += accepted;
                tot_rejected += rejected;
                tot_dropped += dropped;
                days.push_back({{"date", date.str()},
                                {"status", accepted ? "ok" : "empty"},
                                {"rows", accepted + rejected},
                                {"accepted", accepted},
                                {"rejected", rejected},
                                {"devices", groups.size()},
                                {"stops", n_stops},
                                {"trips", n_trips},
                                {"dropped_no_geoid", dropped}});
            }
            for (Date date : present) {
                write_file(paths.stops(src, county.fips, date), serialize_stops(stops_by_day[date]));
                write_file(paths.trips(src, county.fips, date), serialize_trips(trips_by_day[date]));
            }
            const nlohmann::json report{{"source", src},
                                        {"county", county.fips},
                                        {"accepted", tot_accepted},
                                        {"rejected", tot_rejected},
                                        {"dropped_no_geoid", tot_dropped},
                                        {"days", days},
                                        {"rejected_examples", examples}};
            write_file(paths.ingest_report(src, county.fips), report.dump(2) + "\n");
            log << "ingest: " << log_prefix(src, county.fips) << present.size() << " days, " << tot_accepted
                << " pings accepted, " << tot_rejected << " rejected\n";
        }
    }
    write_manifest(paths.root, config_echo(cfg));
}

// ---------------------------------------------------------------------------
// build-network

inline void cmd_build_network(const RunConfig& cfg, std::ostream& log)
{
    using namespace pipeline_detail;
    const RunPaths paths{cfg.output_dir};
    for (const auto& county : cfg.counties) {
        const auto index = load_county_tracts(cfg, county);
        for (const auto& src : cfg.sources) {
            std::vector<MobilityNetwork> nets;
            std::vector<NetworkDay> days;
            for (Date date : cfg.dates()) {
                const auto store = paths.trips(src, county.fips, date);
                if (!fs::exists(store))
                    continue;
                const auto trips = parse_trips(read_text_file(store.string()));
                auto build = build_daily_network(trips, county.fips, date, index);
                days.push_back({date, std::int64_t(build.network.node_count()),
                                std::int64_t(build.network.edge_count()), std::int64_t(build.filtered_trips)});
                nets.push_back(std::move(build.network));
            }
            if (days.empty())
                throw DataError("source " + src + " county " + county.fips + ": no trip stores (run ingest first)");
            write_file(paths.network(src, county.fips, "edges"), serialize_edges(nets));
            write_file(paths.network(src, county.fips, "nodes"), serialize_nodes(nets));
            write_file(paths.network(src, county.fips, "days"), serialize_network_days(days));
            const auto summary = network_size_summary(nets);
            log << "build-network: " << log_prefix(src, county.fips) << nets.size() << " days, mean nodes "
                << summary.nodes_str() << ", mean edges " << summary.edges_str() << '\n';
        }
    }
    write_manifest(paths.root, config_echo(cfg));
}

// ---------------------------------------------------------------------------
// analyze

enum class Scale { Macro, Motif, Micro };

inline Scale parse_scale(const std::string& s)
{
    if (s == "macro") return Scale::Macro;
    if (s == "motif") return Scale::Motif;
    if (s == "micro") return Scale::Micro;
    throw ConfigError("unknown scale '" + s + "' (expected macro, motif or micro)");
}

namespace pipeline_detail {

inline void analyze_macro(const RunConfig& cfg, const RunPaths& paths, const CountyConfig& county,
                          const std::string& src, std::ostream& log)
{
    std::map<Date, MobilityNetwork> by_date;
    load_networks(paths, cfg, src, county.fips, by_date);
    const auto dates = cfg.dates();
    std::vector<std::optional<MacroRecord>> records(dates.size());
    parallel_for(dates.size(), cfg.threads, [&](std::size_t i, unsigned) {
        const auto it = by_date.find(dates[i]);
        if (it == by_date.end())
            return;
        records[i] = compute_macro(index_network(it->second).graph, dates[i]);
    });
    std::size_t missing = 0;
    for (const auto& name : macro_metric_names()) {
        DatedValues series;
        for (std::size_t i = 0; i < dates.size(); ++i)
            series.emplace_back(dates[i], records[i] ? macro_value(*records[i], name) : std::nullopt);
        write_file(paths.macro(src, county.fips, name), serialize_series(series));
    }
    for (const auto& r : records)
        missing += !r;
    log << "analyze macro: " << log_prefix(src, county.fips) << dates.size() - missing << " days, " << missing
        << " missing\n";
}

inline void analyze_motif(const RunConfig& cfg, const RunPaths& paths, const CountyConfig& county,
                          const std::string& src, std::ostream& log)
{
    std::map<Date, MobilityNetwork> by_date;
    load_networks(paths, cfg, src, county.fips, by_date);
    const auto dates = cfg.dates();
    MotifOptions opt = cfg.motif.options;
    opt.threads = cfg.threads;
    std::vector<std::optional<MotifAnalysis>> results(dates.size());
    for (std::size_t i = 0; i < dates.size(); ++i) {
        const auto it = by_date.find(dates[i]);
        if (it == by_date.end() || it->second.node_count() < 4)
            continue;
        const auto net = index_network(it->second);
        if (cfg.motif.mode == MotifMode::Exact)
            results[i] = analyze_motifs(net, opt);
        else
            results[i] = sample_motifs(net, cfg.motif.sample_size,
                                       mix_seed(cfg.motif.seed, {std::uint64_t(dates[i].days()),
                                                                 hash_string(county.fips)}),
                                       opt);
    }
    std::vector<MotifRow> rows;
    for (int t = 0; t < kMotifTypes; ++t) {
        std::vector<std::optional<double>> shares;
        for (const auto& r : results)
            shares.push_back(r ? std::optional(r->census.shares[std::size_t(t)]) : std::nullopt);
        const auto ma = moving_average_7d(shares);
        for (std::size_t i = 0; i < dates.size(); ++i) {
            MotifRow row;
            row.date = dates[i];
            row.type = t;
            if (results[i]) {
                row.count = results[i]->census.counts[std::size_t(t)];
                row.share = shares[i];
                row.median_avg_distance_m = results[i]->attributes.median_avg_distance_m[std::size_t(t)];
                row.median_avg_volume = results[i]->attributes.median_avg_volume[std::size_t(t)];
            }
            row.share_ma7 = ma[i];
            rows.push_back(row);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const MotifRow& a, const MotifRow& b) {
        return a.date != b.date ? a.date < b.date : a.type < b.type;
    });
    write_file(paths.motif(src, county.fips), serialize_motif_rows(rows));
    std::size_t done = 0;
    for (const auto& r : results)
        done += r.has_value();
    log << "analyze motif: " << log_prefix(src, county.fips) << done << " days with a census\n";
}

inline void analyze_micro(const RunConfig& cfg, const RunPaths& paths, const CountyConfig& county,
                          const std::string& src, std::ostream& log)
{
    const auto index = load_county_tracts(cfg, county);
    auto keep = [&](const std::string& g) { return geoid_in_county(g, county.fips) && index.find(g); };
    const auto dates = cfg.dates();
    std::vector<std::vector<TractDayMetrics>> per_day(dates.size());
    std::vector<char> present(dates.size(), 0);
    for (std::size_t i = 0; i < dates.size(); ++i)
        present[i] = fs::exists(paths.trips(src, county.fips, dates[i]));
    if (std::none_of(present.begin(), present.end(), [](char c) { return c; }))
        throw DataError("source " + src + " county " + county.fips + ": no trip stores (run ingest first)");
    parallel_for(dates.size(), cfg.threads, [&](std::size_t i, unsigned) {
        if (!present[i])
            return;
        const auto trips = parse_trips(read_text_file(paths.trips(src, county.fips, dates[i]).string()));
        const auto stops = parse_stops(read_text_file(paths.stops(src, county.fips, dates[i]).string()));
        per_day[i] = all_tract_day_metrics(trips, stops, dates[i], keep);
    });
    std::vector<TractDayMetrics> rows;
    for (auto& d : per_day)
        rows.insert(rows.end(), d.begin(), d.end());
    write_file(paths.micro(src, county.fips), serialize_micro(rows));
    log << "analyze micro: " << log_prefix(src, county.fips) << rows.size() << " tract-day records\n";
}

}  // namespace pipeline_detail

inline void cmd_analyze(const RunConfig& cfg, Scale scale, std::ostream& log)
{
    const RunPaths paths{cfg.output_dir};
    for (const auto& county : cfg.counties)
        for (const auto& src : cfg.sources) {
            switch (scale) {
            case Scale::Macro: pipeline_detail::analyze_macro(cfg, paths, county, src, log); break;
            case Scale::Motif: pipeline_detail::analyze_motif(cfg, paths, county, src, log); break;
            case Scale::Micro: pipeline_detail::analyze_micro(cfg, paths, county, src, log); break;
            }
        }
    write_manifest(paths.root, config_echo(cfg));
}

// ---------------------------------------------------------------------------
// compare

/// Number of macro metrics compared across sources (degree, clustering,
/// shortest path, assortativity).
inline constexpr std::size_t kComparedMacroMetrics = 4;

inline std::vector<std::string> pair_labels(const std::vector<std::string>& sources)
{
    std::vector<std::string> out;
    for (const auto& [i, j] : source_pairs(sources.size()))
        out.push_back(pair_label(sources[i], sources[j]));
    return out;
}

namespace pipeline_detail {

inline MetricSeries read_macro_series(const RunPaths& paths, const RunConfig& cfg, const std::string& src,
                                      const std::string& fips, const std::string& metric)
{
    auto values = parse_series(read_required(paths.macro(src, fips, metric),
                                             "source " + src + " county " + fips +
                                                 " (run analyze --scale macro first)"));
    const auto dates = cfg.dates();
    if (values.size() != dates.size())
        throw DataError("source " + src + " county " + fips + ": macro series for " + metric +
                        " does not cover the configured dates");
    return {src, fips, metric, std::move(values)};
}

/// Point-wise measures for one pair; undefined cases become NA.
inline std::string pair_scores_row(const MetricSeries& a, const MetricSeries& b, MapeMode mode)
{
    const auto p = pairwise_delete(a.series(), b.series());
    std::optional<double> euc, mp, r, dist;
    std::size_t skipped = 0;
    if (!p.a.empty()) {
        euc = euclidean(p.a, p.b);
        try {
            const auto m = mape(p.a, p.b, mode);
            mp = m.value;
            skipped = m.skipped;
        } catch (const std::invalid_argument&) {
        }
        if (p.a.size() >= 2)
            r = pearson(p.a, p.b);
    }
    const auto da = drop_missing(a.series()), db = drop_missing(b.series());
    if (!da.empty() && !db.empty())
        dist = dtw(da, db);
    return format_optional(euc) + ',' + format_optional(mp) + ',' + format_optional(r) + ',' +
           format_optional(dist) + ',' + std::to_string(p.deleted) + ',' + std::to_string(skipped);
}

}  // namespace pipeline_detail

inline void cmd_compare(const RunConfig& cfg, std::ostream& log)
{
    using namespace pipeline_detail;
    if (cfg.sources.size() < 2)
        throw ConfigError("compare needs at least two sources");
    const RunPaths paths{cfg.output_dir};
    const auto labels = pair_labels(cfg.sources);
    const auto dates = cfg.dates();
    const auto& macro_names = macro_metric_names();

    std::vector<VerdictRow> macro_rows, micro_rows;
    std::string scores = "fips,county,metric,pair,euclidean,mape,pearson,dtw,points_deleted,mape_skipped\n";
    std::string macro_fig = "source,fips,metric,date,value\n";
    for (const auto& county : cfg.counties) {
        for (std::size_t m = 0; m < macro_names.size(); ++m) {
            std::vector<MetricSeries> series;
            for (const auto& src : cfg.sources)
                series.push_back(read_macro_series(paths, cfg, src, county.fips, macro_names[m]));
            for (const auto& s : series)
                for (const auto& [d, v] : s.values)
                    macro_fig += s.source_label + ',' + county.fips + ',' + s.metric_name + ',' + d.str() + ',' +
                                 format_optional(v) + '\n';
            if (m >= kComparedMacroMetrics)
                continue;
            macro_rows.push_back({county.fips, county.name, closest_pair_dtw(series)});
            const auto pairs = source_pairs(series.size());
            for (std::size_t p = 0; p < pairs.size(); ++p)
                scores += county.fips + ',' + county.name + ',' + macro_names[m] + ',' + labels[p] + ',' +
                          pair_scores_row(series[pairs[p].first], series[pairs[p].second],
                                          cfg.similarity.mape_mode) +
                          '\n';
        }

        const auto index = load_county_tracts(cfg, county);
        const auto order = county_geoids(index, county.fips);
        std::vector<std::map<Date, std::map<std::string, TractDayMetrics>>> by_source;
        for (const auto& src : cfg.sources) {
            const auto rows = parse_micro(read_required(
                paths.micro(src, county.fips), "source " + src + " county " + county.fips +
                                                   " (run analyze --scale micro first)"));
            auto& days = by_source.emplace_back();
            for (const auto& r : rows)
                days[r.date].emplace(r.geoid, r);
        }
        for (const auto& metric : micro_metric_names()) {
            std::vector<DailyRanks> ranks;
            for (std::size_t s = 0; s < cfg.sources.size(); ++s) {
                DailyRanks dr{cfg.sources[s], {}};
                for (Date d : dates) {
                    const auto it = by_source[s].find(d);
                    if (it == by_source[s].end() || it->second.empty()) {
                        dr.days.emplace_back();
                        continue;
                    }
                    std::map<std::string, double> values;
                    for (const auto& [g, rec] : it->second)
                        values.emplace(g, micro_value(rec, metric));
                    dr.days.emplace_back(rank_tracts(order, values));
                }
                ranks.push_back(std::move(dr));
            }
            micro_rows.push_back(
                {county.fips, county.name,
                 closest_pair_cosine(county.fips, metric, ranks, cfg.similarity.cosine_reduction)});
        }
    }
    write_file(paths.compare("macro_verdicts.csv"), serialize_verdicts(labels, macro_rows));
    write_file(paths.compare("macro_scores.csv"), scores);
    write_file(paths.compare("micro_verdicts.csv"), serialize_verdicts(labels, micro_rows));
    write_file(paths.figure("macro_series.csv"), macro_fig);

    // Motif figure data: shares per type per day, and attribute medians per type per day.
    std::string shares = "source,fips,date,type,share,share_ma7\n";
    std::string attrs = "source,fips,date,type,median_avg_distance_m,median_avg_volume\n";
    for (const auto& county : cfg.counties)
        for (const auto& src : cfg.sources) {
            const auto path = paths.motif(src, county.fips);
            if (!fs::exists(path)) {
                log << "warning: " << log_prefix(src, county.fips) << "no motif output; figure rows skipped\n";
                continue;
            }
            for (const auto& r : parse_motif_rows(read_text_file(path.string()))) {
                const auto head = src + ',' + county.fips + ',' + r.date.str() + ',' + std::to_string(r.type) + ',';
                shares += head + format_optional(r.share) + ',' + format_optional(r.share_ma7) + '\n';
                if (r.type != 0)
                    attrs += head + format_optional(r.median_avg_distance_m) + ',' +
                             format_optional(r.median_avg_volume) + '\n';
            }
        }
    write_file(paths.figure("motif_shares.csv"), shares);
    write_file(paths.figure("motif_attributes.csv"), attrs);

    for (const auto& r : macro_rows)
        log << "compare: " << r.county_fips << ' ' << r.verdict.metric_name << " -> " << r.verdict.pair
            << (r.verdict.tie ? " (tie)" : "") << '\n';
    for (const auto& r : micro_rows)
        log << "compare: " << r.county_fips << ' ' << r.verdict.metric_name << " -> " << r.verdict.pair
            << (r.verdict.tie ? " (tie)" : "") << '\n';
    write_manifest(paths.root, config_echo(cfg));
}

// ---------------------------------------------------------------------------
// report

struct NetworkSizeRow {
    std::string source, fips, county;
    std::size_t days = 0;
    NetworkSizeSummary summary;
};

/// Mean daily node and edge counts per (source, county).
inline std::vector<NetworkSizeRow> network_sizes(const RunConfig& cfg)
{
    const RunPaths paths{cfg.output_dir};
    std::vector<NetworkSizeRow> out;
    for (const auto& county : cfg.counties)
        for (const auto& src : cfg.sources) {
            std::map<Date, MobilityNetwork> by_date;
            const auto nets = pipeline_detail::load_networks(paths, cfg, src, county.fips, by_date);
            if (nets.empty())
                throw DataError("source " + src + " county " + county.fips + ": no networks in date range");
            out.push_back({src, county.fips, county.name, nets.size(), network_size_summary(nets)});
        }
    return out;
}

inline void cmd_report(const RunConfig& cfg, std::ostream& log)
{
    const RunPaths paths{cfg.output_dir};
    const auto rows = network_sizes(cfg);
    std::string csv = "source,fips,county,days,mean_nodes,mean_edges\n";
    std::string text = "Network size (mean over days)\n\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %-6s %-24s %6s %12s %12s\n", "source", "fips", "county", "days",
                  "nodes", "edges");
    text += line;
    for (const auto& r : rows) {
        csv += r.source + ',' + r.fips + ',' + r.county + ',' + std::to_string(r.days) + ',' +
               r.summary.nodes_str() + ',' + r.summary.edges_str() + '\n';
        std::snprintf(line, sizeof line, "%-8s %-6s %-24s %6zu %12s %12s\n", r.source.c_str(), r.fips.c_str(),
                      r.county.c_str(), r.days, r.summary.nodes_str().c_str(), r.summary.edges_str().c_str());
        text += line;
    }
    for (const char* name : {"macro_verdicts.csv", "micro_verdicts.csv"}) {
        const auto p = paths.compare(name);
        if (fs::exists(p))
            text += std::string("\n") + name + "\n\n" + read_text_file(p.string());
    }
    write_file(paths.report("network_sizes.csv"), csv);
    write_file(paths.report("summary.txt"), text);
    log << text;
    write_manifest(paths.root, config_echo(cfg));
}

}  // namespace mobnet
