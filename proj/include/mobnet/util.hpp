#pragma once

// Small shared pieces: error types, calendar dates, delimited-text helpers,
// exact number formatting and a portable seeded random source.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace mobnet {

/// Malformed or inconsistent input data (maps to CLI exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid run configuration (maps to CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Dates

/// Calendar day, stored as days since 1970-01-01.
class Date {
public:
    Date() = default;
    explicit constexpr Date(std::int64_t days_since_epoch) : days_(days_since_epoch) {}

    static Date parse(std::string_view text)
    {
        // YYYY-MM-DD
        if (text.size() != 10 || text[4] != '-' || text[7] != '-')
            throw DataError("bad date '" + std::string(text) + "'");
        int y = 0, m = 0, d = 0;
        auto ok = [](std::string_view s, int& out) {
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
            return ec == std::errc{} && p == s.data() + s.size();
        };
        if (!ok(text.substr(0, 4), y) || !ok(text.substr(5, 2), m) || !ok(text.substr(8, 2), d))
            throw DataError("bad date '" + std::string(text) + "'");
        std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
        if (!ymd.ok())
            throw DataError("bad date '" + std::string(text) + "'");
        return Date(std::chrono::sys_days(ymd).time_since_epoch().count());
    }

    /// Local calendar day of a unix timestamp for a fixed UTC offset.
    static Date from_unix(std::int64_t t, std::int64_t utc_offset_s = 0)
    {
        const std::int64_t local = t + utc_offset_s;
        std::int64_t days = local / 86400;
        if (local % 86400 < 0)
            --days;
        return Date(days);
    }

    std::string str() const
    {
        const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days_}}};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                      unsigned(ymd.day()));
        return buf;
    }

    /// "YYYY-MM"
    std::string month_str() const { return str().substr(0, 7); }

    /// 0 = Monday ... 6 = Sunday
    int weekday() const
    {
        const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{days_}}};
        return int(wd.iso_encoding()) - 1;
    }

    /// Unix time of local midnight starting this day.
    std::int64_t start_unix(std::int64_t utc_offset_s = 0) const
    {
        return days_ * 86400 - utc_offset_s;
    }

    std::int64_t days() const { return days_; }
    Date next() const { return Date(days_ + 1); }

    friend auto operator<=>(const Date&, const Date&) = default;

private:
    std::int64_t days_ = 0;
};

/// Inclusive list of days from first to last.
inline std::vector<Date> date_range(Date first, Date last)
{
    std::vector<Date> out;
    for (Date d = first; d <= last; d = d.next())
        out.push_back(d);
    return out;
}

// ---------------------------------------------------------------------------
// Delimited text

/// Splits one line on `sep`; no quoting (none of our formats quote).
inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',')
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    T value{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        return std::nullopt;
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value))
            return std::nullopt;
    }
    return value;
}

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline std::string format_fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

/// "NA" for missing values.
inline std::string format_optional(const std::optional<double>& v)
{
    return v ? format_double(*v) : std::string("NA");
}

inline std::optional<double> parse_optional(std::string_view s)
{
    if (trim(s) == "NA")
        return std::nullopt;
    auto v = parse_number<double>(s);
    if (!v)
        throw DataError("bad number '" + std::string(s) + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Random numbers
//
// std::mt19937_64 has a fully specified output sequence; the distributions
// below are written out so results do not depend on the standard library.

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a list of keys.
inline std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
{
    std::uint64_t h = splitmix64(seed);
    for (auto k : keys)
        h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

inline std::uint64_t hash_string(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), unbiased.
    std::uint64_t below(std::uint64_t n)
    {
        if (n == 0)
            throw std::invalid_argument("Rng::below(0)");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    /// Standard normal via Box-Muller (one value per call; the pair partner is dropped).
    double normal()
    {
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace mobnet
