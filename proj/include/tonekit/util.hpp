#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "tonekit/errors.hpp"

namespace tonekit::util {

/// Shortest round-trip decimal form of a double (locale-independent).
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(context + ": not a number: '" + std::string(s) + "'");
    }
    return v;
}

/// Splits one CSV line; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

/// Quotes a field only when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

/// SplitMix64 mix function; used to derive independent per-item seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. fn must be safe to run
/// concurrently for distinct i.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

} // namespace tonekit::util
