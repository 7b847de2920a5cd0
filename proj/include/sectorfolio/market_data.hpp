#pragma once

// Historical price ingestion and per-asset return statistics.
//
// CSV schema (one file per symbol):
//
//     date,open,high,low,close,volume,adj_close
//     2016-01-01,4550.5,4580,4521.1,4566.2,431870,4421.7
//
// Only `close` feeds the downstream statistics; the other columns are
// validated and kept.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sectorfolio/date.hpp"
#include "sectorfolio/error.hpp"
#include "sectorfolio/io.hpp"

namespace sectorfolio {

inline constexpr int kTradingDays = 250;
inline constexpr std::string_view kPriceCsvHeader = "date,open,high,low,close,volume,adj_close";

struct PriceBar {
    Date date;
    double open = 0;
    double high = 0;
    double low = 0;
    double close = 0;
    double volume = 0;
    double adj_close = 0;

    /// Empty when the bar is valid, otherwise the first violated rule.
    std::optional<std::string> violation() const {
        if (!(low <= high))
            return "low > high";
        if (!(close > 0))
            return "close must be positive";
        if (!(volume >= 0))
            return "volume must be non-negative";
        if (!std::isfinite(open) || !std::isfinite(high) || !std::isfinite(low) ||
            !std::isfinite(close) || !std::isfinite(adj_close) || !std::isfinite(volume))
            return "non-finite field";
        return std::nullopt;
    }
};

struct PriceSeries {
    std::string symbol;
    std::vector<PriceBar> bars;

    std::size_t size() const { return bars.size(); }

    std::vector<double> closes() const {
        std::vector<double> out;
        out.reserve(bars.size());
        for (const auto& b : bars)
            out.push_back(b.close);
        return out;
    }

    /// Bars with start <= date <= end.
    PriceSeries slice(Date start, Date end) const {
        PriceSeries out{symbol, {}};
        for (const auto& b : bars)
            if (b.date >= start && b.date <= end)
                out.bars.push_back(b);
        return out;
    }
};

struct ReturnSeries {
    std::string symbol;
    std::vector<double> returns;
    std::vector<Date> dates; // dates[i] is the later date of returns[i]
};

struct AssetStats {
    double mean_daily_return = 0;
    double daily_volatility = 0;
    double annual_volatility = 0;
};

struct SectorMember {
    std::string symbol;
    std::optional<double> index_weight_percent; // metadata only
};

struct SectorUniverse {
    std::string sector_name;
    std::vector<SectorMember> members;

    std::vector<std::string> symbols() const {
        std::vector<std::string> out;
        for (const auto& m : members)
            out.push_back(m.symbol);
        return out;
    }

    void validate() const {
        if (sector_name.empty())
            throw std::invalid_argument("sector name is empty");
        if (members.empty())
            throw std::invalid_argument("sector '" + sector_name + "' has no members");
        std::set<std::string> seen;
        for (const auto& m : members) {
            if (!seen.insert(m.symbol).second)
                throw std::invalid_argument("sector '" + sector_name + "': duplicate symbol " +
                                            m.symbol);
            if (m.index_weight_percent && !(*m.index_weight_percent > 0))
                throw std::invalid_argument("sector '" + sector_name +
                                            "': index weight must be positive for " + m.symbol);
        }
    }
};

struct AlignedCloseMatrix {
    std::vector<std::string> symbols;
    std::vector<Date> dates;
    Eigen::MatrixXd closes; // rows = dates, cols = symbols
};

enum class Validation { strict, lenient };

struct ParseOptions {
    Validation validation = Validation::strict;
    /// Receives one message per dropped bar in lenient mode.
    std::function<void(const std::string&)> on_warning;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
        if (comma == std::string_view::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

} // namespace detail

inline PriceSeries parse_csv(std::string_view text, const std::string& symbol,
                             const ParseOptions& options = {}) {
    PriceSeries series{symbol, {}};
    std::vector<std::size_t> line_of;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        if (!header_seen) {
            if (line != kPriceCsvHeader)
                throw ParseError("expected header '" + std::string(kPriceCsvHeader) + "'", line_no);
            header_seen = true;
            continue;
        }
        auto fields = detail::split_fields(line);
        if (fields.size() != 7)
            throw ParseError("expected 7 fields, got " + std::to_string(fields.size()), line_no);
        PriceBar bar;
        try {
            bar.date = Date::parse(fields[0]);
            bar.open = io::parse_double(fields[1]);
            bar.high = io::parse_double(fields[2]);
            bar.low = io::parse_double(fields[3]);
            bar.close = io::parse_double(fields[4]);
            bar.volume = io::parse_double(fields[5]);
            bar.adj_close = io::parse_double(fields[6]);
        } catch (const std::exception& e) {
            throw ParseError(std::string("malformed row: ") + e.what(), line_no);
        }
        if (auto why = bar.violation()) {
            if (options.validation == Validation::strict)
                throw ParseError("invalid bar " + bar.date.to_string() + ": " + *why, line_no);
            if (options.on_warning)
                options.on_warning(symbol + ": dropped line " + std::to_string(line_no) + " (" +
                                   *why + ")");
            continue;
        }
        series.bars.push_back(bar);
        line_of.push_back(line_no);
    }
    if (!header_seen)
        throw ParseError("empty input for " + symbol);
    if (series.bars.empty())
        throw ParseError("no valid rows for " + symbol);

    std::vector<std::size_t> order(series.bars.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        return series.bars[a].date < series.bars[b].date;
    });
    std::vector<PriceBar> sorted;
    sorted.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& bar = series.bars[order[k]];
        if (!sorted.empty() && sorted.back().date == bar.date)
            throw ParseError("duplicate date " + bar.date.to_string(), line_of[order[k]]);
        sorted.push_back(bar);
    }
    series.bars = std::move(sorted);
    return series;
}

inline std::string serialize_csv(const PriceSeries& series) {
    std::string out(kPriceCsvHeader);
    out += '\n';
    for (const auto& b : series.bars) {
        out += b.date.to_string();
        for (double v : {b.open, b.high, b.low, b.close, b.volume, b.adj_close}) {
            out += ',';
            out += io::format_double(v);
        }
        out += '\n';
    }
    return out;
}

inline ReturnSeries daily_returns(const PriceSeries& series) {
    if (series.size() < 2)
        throw std::invalid_argument(series.symbol + ": need at least 2 bars for returns, got " +
                                    std::to_string(series.size()));
    ReturnSeries out{series.symbol, {}, {}};
    out.returns.reserve(series.size() - 1);
    out.dates.reserve(series.size() - 1);
    for (std::size_t i = 1; i < series.size(); ++i) {
        out.returns.push_back(series.bars[i].close / series.bars[i - 1].close - 1.0);
        out.dates.push_back(series.bars[i].date);
    }
    return out;
}

/// Sample statistics; volatility uses the n-1 denominator.
inline AssetStats asset_stats(const ReturnSeries& returns) {
    const auto& r = returns.returns;
    if (r.size() < 2)
        throw std::invalid_argument(returns.symbol + ": need at least 2 returns for statistics");
    double mean = 0;
    for (double x : r)
        mean += x;
    mean /= static_cast<double>(r.size());
    double ss = 0;
    for (double x : r)
        ss += (x - mean) * (x - mean);
    AssetStats s;
    s.mean_daily_return = mean;
    s.daily_volatility = std::sqrt(ss / static_cast<double>(r.size() - 1));
    s.annual_volatility = s.daily_volatility * std::sqrt(static_cast<double>(kTradingDays));
    return s;
}

/// Close matrix over the intersection of trading dates; no forward fill.
inline AlignedCloseMatrix align(const std::vector<PriceSeries>& series_list) {
    if (series_list.empty())
        throw std::invalid_argument("align: no series");
    std::vector<Date> common;
    for (const auto& b : series_list.front().bars)
        common.push_back(b.date);
    for (std::size_t s = 1; s < series_list.size(); ++s) {
        std::vector<Date> other;
        for (const auto& b : series_list[s].bars)
            other.push_back(b.date);
        std::vector<Date> next;
        std::set_intersection(common.begin(), common.end(), other.begin(), other.end(),
                              std::back_inserter(next));
        common = std::move(next);
    }
    if (common.empty())
        throw std::invalid_argument("align: empty date intersection");

    AlignedCloseMatrix out;
    out.dates = common;
    out.closes.resize(static_cast<Eigen::Index>(common.size()),
                      static_cast<Eigen::Index>(series_list.size()));
    for (std::size_t s = 0; s < series_list.size(); ++s) {
        out.symbols.push_back(series_list[s].symbol);
        std::size_t k = 0;
        for (const auto& b : series_list[s].bars) {
            if (k < common.size() && b.date == common[k]) {
                out.closes(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s)) = b.close;
                ++k;
            }
        }
    }
    return out;
}

} // namespace sectorfolio
