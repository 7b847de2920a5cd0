#pragma once

// Shared synthetic data for the test suites.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "sectorfolio/date.hpp"
#include "sectorfolio/market_data.hpp"
#include "sectorfolio/rng.hpp"

namespace fixtures {

using sectorfolio::Date;
using sectorfolio::PriceBar;
using sectorfolio::PriceSeries;

inline std::vector<Date> weekdays(Date from, Date to) {
    std::vector<Date> out;
    for (Date d = from; d <= to; d = d.shifted(1)) {
        std::chrono::weekday wd{d.days()};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday)
            out.push_back(d);
    }
    return out;
}

/// `n` trading dates spread evenly over the weekdays of [from, to], both ends included.
inline std::vector<Date> trading_dates(Date from, Date to, std::size_t n) {
    auto all = weekdays(from, to);
    std::vector<Date> out;
    for (std::size_t k = 0; k < n; ++k)
        out.push_back(all[(k * (all.size() - 1) + (n - 1) / 2) / (n - 1)]);
    return out;
}

inline PriceSeries make_series(const std::string& symbol, const std::vector<Date>& dates,
                               const std::vector<double>& closes) {
    PriceSeries s{symbol, {}};
    for (std::size_t i = 0; i < dates.size(); ++i) {
        const double c = closes[i];
        s.bars.push_back(PriceBar{dates[i], c * 0.995, c * 1.01, c * 0.99, c, 1000.0 + static_cast<double>(i), c});
    }
    return s;
}

/// Geometric random walk of daily log-returns ~ N(drift, vol).
inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed, double start = 100.0,
                                       double drift = 0.0004, double vol = 0.015) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> step(drift, vol);
    std::vector<double> out{start};
    while (out.size() < n)
        out.push_back(out.back() * std::exp(step(rng)));
    return out;
}

inline std::vector<double> sine(std::size_t n, double period = 40.0, double level = 100.0,
                                double amplitude = 20.0) {
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(level + amplitude * std::sin(2.0 * M_PI * static_cast<double>(i) / period));
    return out;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("sectorfolio_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter()++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path path_;
};

} // namespace fixtures
