#pragma once

// Time-series and vector similarity between data sources, and the
// closest-pair verdict over three (or more) sources.

#include "mobnet/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mobnet {

using Series = std::vector<std::optional<double>>;

struct PairedValues {
    std::vector<double> a, b;
    std::size_t deleted = 0;  // positions where either side was missing
};

/// Pairwise deletion for point-by-point comparisons.
inline PairedValues pairwise_delete(const Series& a, const Series& b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("series length mismatch");
    PairedValues out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && b[i]) {
            out.a.push_back(*a[i]);
            out.b.push_back(*b[i]);
        } else {
            ++out.deleted;
        }
    }
    return out;
}

inline std::vector<double> drop_missing(const Series& s)
{
    std::vector<double> out;
    for (const auto& v : s)
        if (v)
            out.push_back(*v);
    return out;
}

inline double euclidean(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("euclidean: length mismatch");
    if (a.empty())
        throw std::invalid_argument("euclidean: empty series");
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sum);
}

enum class MapeMode { BaseA, Symmetric };

struct MapeResult {
    double value = 0;
    std::size_t skipped = 0;  // points with a zero denominator
};

inline MapeResult mape(std::span<const double> a, std::span<const double> b, MapeMode mode)
{
    if (a.size() != b.size())
        throw std::invalid_argument("mape: length mismatch");
    MapeResult r;
    double sum = 0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = mode == MapeMode::BaseA ? std::abs(a[i])
                                                     : (std::abs(a[i]) + std::abs(b[i])) / 2.0;
        if (denom == 0) {
            ++r.skipped;
            continue;
        }
        sum += std::abs(a[i] - b[i]) / denom;
        ++used;
    }
    if (used == 0)
        throw std::invalid_argument("mape: all denominators are zero");
    r.value = sum / double(used);
    return r;
}

/// Sample Pearson correlation; nullopt when either input is constant.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("pearson: length mismatch");
    if (a.size() < 2)
        throw std::invalid_argument("pearson: need at least two points");
    const double n = double(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0 || sbb == 0)
        return std::nullopt;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// Unconstrained dynamic time warping with absolute-difference cost.
/// Uses two rolling rows of the cost table.
inline double dtw(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("dtw: empty series");
    const std::size_t m = b.size();
    std::vector<double> prev(m), cur(m);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double cost = std::abs(a[i] - b[j]);
            double best;
            if (i == 0 && j == 0)
                best = 0;
            else if (i == 0)
                best = cur[j - 1];
            else if (j == 0)
                best = prev[j];
            else
                best = std::min({prev[j], cur[j - 1], prev[j - 1]});
            cur[j] = cost + best;
        }
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

inline std::optional<double> cosine(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("cosine: length mismatch");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0)
        return std::nullopt;
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Verdicts

struct MetricSeries {
    std::string source_label;
    std::string county_fips;
    std::string metric_name;
    std::vector<std::pair<Date, std::optional<double>>> values;

    Series series() const
    {
        Series s;
        for (const auto& [d, v] : values)
            s.push_back(v);
        return s;
    }
};

/// Pair label: the two source labels concatenated in source order ("S","V" -> "SV").
inline std::string pair_label(const std::string& a, const std::string& b)
{
    return a.size() == 1 && b.size() == 1 ? a + b : a + "-" + b;
}

/// Source index pairs in column order. For three sources (S, X, V) this is
/// SV, XV, SX; otherwise every i < j in order.
inline std::vector<std::pair<std::size_t, std::size_t>> source_pairs(std::size_t n)
{
    if (n == 3)
        return {{0, 2}, {1, 2}, {0, 1}};
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            out.emplace_back(i, j);
    return out;
}

struct SimilarityVerdict {
    std::string county_fips;
    std::string metric_name;
    std::string pair;  // "n/a" with fewer than three sources
    std::vector<std::pair<std::string, std::optional<double>>> scores;  // column order
    bool tie = false;
};

enum class Preference { Min, Max };

namespace similarity_detail {

inline void decide(SimilarityVerdict& v, std::size_t n_sources, Preference pref)
{
    if (n_sources < 3) {
        v.pair = "n/a";
        return;
    }
    std::optional<double> best;
    std::vector<std::string> winners;
    for (const auto& [label, score] : v.scores) {
        if (!score)
            continue;
        const bool better = !best || (pref == Preference::Min ? *score < *best : *score > *best);
        if (better) {
            best = score;
            winners = {label};
        } else if (*score == *best) {
            winners.push_back(label);
        }
    }
    if (winners.empty()) {
        v.pair = "n/a";
        return;
    }
    std::sort(winners.begin(), winners.end());
    v.pair = winners.front();
    v.tie = winners.size() > 1;
}

}  // namespace similarity_detail

/// DTW distance for every source pair; the verdict is the closest pair.
inline SimilarityVerdict closest_pair_dtw(const std::vector<MetricSeries>& sources)
{
    if (sources.size() < 2)
        throw std::invalid_argument("closest_pair: need at least two sources");
    std::vector<std::vector<double>> clean;
    for (const auto& s : sources)
        clean.push_back(drop_missing(s.series()));
    SimilarityVerdict v;
    v.county_fips = sources.front().county_fips;
    v.metric_name = sources.front().metric_name;
    // A source with no defined values scores NA against everyone.
    for (const auto& [i, j] : source_pairs(sources.size()))
        v.scores.emplace_back(pair_label(sources[i].source_label, sources[j].source_label),
                              clean[i].empty() || clean[j].empty() ? std::nullopt
                                                                   : std::optional(dtw(clean[i], clean[j])));
    similarity_detail::decide(v, sources.size(), Preference::Min);
    return v;
}

enum class CosineReduction { Mean, Median, Majority };

/// One source's rank vectors, one entry per day (nullopt: no ranked tracts that day).
struct DailyRanks {
    std::string source_label;
    std::vector<std::optional<std::vector<double>>> days;
};

/// Daily cosine similarity of rank vectors for every source pair, reduced over
/// the month; the verdict is the most similar pair. With Majority the score is
/// the fraction of days on which the pair was the most similar.
inline SimilarityVerdict closest_pair_cosine(const std::string& county_fips,
                                             const std::string& metric,
                                             const std::vector<DailyRanks>& sources,
                                             CosineReduction reduction)
{
    if (sources.size() < 2)
        throw std::invalid_argument("closest_pair: need at least two sources");
    std::size_t n_days = sources.front().days.size();
    for (const auto& s : sources)
        if (s.days.size() != n_days)
            throw std::invalid_argument("closest_pair: sources cover different days");
    const auto pairs = source_pairs(sources.size());
    // daily[p][d]: cosine of pair p on day d
    std::vector<std::vector<std::optional<double>>> daily(pairs.size(),
                                                          std::vector<std::optional<double>>(n_days));
    for (std::size_t p = 0; p < pairs.size(); ++p)
        for (std::size_t d = 0; d < n_days; ++d) {
            const auto& a = sources[pairs[p].first].days[d];
            const auto& b = sources[pairs[p].second].days[d];
            if (a && b)
                daily[p][d] = cosine(*a, *b);
        }

    SimilarityVerdict v;
    v.county_fips = county_fips;
    v.metric_name = metric;
    std::vector<std::string> labels;
    for (const auto& [i, j] : pairs)
        labels.push_back(pair_label(sources[i].source_label, sources[j].source_label));

    if (reduction == CosineReduction::Majority) {
        std::vector<double> wins(pairs.size(), 0);
        std::size_t days_used = 0;
        for (std::size_t d = 0; d < n_days; ++d) {
            std::optional<std::size_t> best;
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                if (!daily[p][d])
                    continue;
                if (!best || *daily[p][d] > *daily[*best][d] ||
                    (*daily[p][d] == *daily[*best][d] && labels[p] < labels[*best]))
                    best = p;
            }
            if (best) {
                wins[*best] += 1;
                ++days_used;
            }
        }
        for (std::size_t p = 0; p < pairs.size(); ++p)
            v.scores.emplace_back(labels[p], days_used ? std::optional(wins[p] / double(days_used))
                                                       : std::nullopt);
    } else {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            std::vector<double> vals;
            for (const auto& c : daily[p])
                if (c)
                    vals.push_back(*c);
            std::optional<double> score;
            if (!vals.empty()) {
                if (reduction == CosineReduction::Mean) {
                    double sum = 0;
                    for (double x : vals)
                        sum += x;
                    score = sum / double(vals.size());
                } else {
                    std::sort(vals.begin(), vals.end());
                    score = vals[(vals.size() - 1) / 2];
                }
            }
            v.scores.emplace_back(labels[p], score);
        }
    }
    similarity_detail::decide(v, sources.size(), Preference::Max);
    return v;
}

}  // namespace mobnet
