#pragma once

// The subcommands behind the `sectorfolio` CLI. Each one reads the config and
// data directory, writes its artifacts atomically into `out_dir`, and returns
// the paths it wrote.
//
// Seeds: every random consumer derives its seed from the run seed and a
// purpose tag, "frontier:<sector>" or "train:<symbol>".

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sectorfolio/backtest.hpp"
#include "sectorfolio/checkpoint.hpp"
#include "sectorfolio/fetch.hpp"
#include "sectorfolio/io.hpp"
#include "sectorfolio/market_data.hpp"
#include "sectorfolio/portfolio_opt.hpp"
#include "sectorfolio/reports.hpp"
#include "sectorfolio/run_config.hpp"
#include "sectorfolio/training.hpp"

namespace sectorfolio::pipeline {

namespace fs = std::filesystem;

inline PriceSeries load_series(const RunConfig& cfg, const std::string& symbol) {
    const auto path = cfg.data_file(symbol);
    if (!fs::exists(path))
        throw std::runtime_error("no price data for " + symbol + " (expected " + path.string() + ")");
    try {
        return parse_csv(io::read_file(path), symbol);
    } catch (const ParseError& e) {
        throw ParseError(symbol + " (" + path.string() + "): " + e.what());
    }
}

inline std::uint64_t frontier_seed(const RunConfig& cfg, const std::string& sector) {
    return derive_seed(cfg.seed, "frontier:" + sector);
}

inline forecast::LstmConfig lstm_config_for(const RunConfig& cfg, const std::string& symbol) {
    auto c = cfg.lstm;
    c.seed = derive_seed(cfg.seed, "train:" + symbol);
    return c;
}

inline fs::path checkpoint_path(const fs::path& out_dir, const std::string& symbol) {
    return out_dir / (symbol + ".ckpt");
}

/// Per-asset return statistics over the training window, one row per symbol.
inline std::vector<fs::path> cmd_stats(const RunConfig& cfg, const fs::path& out_dir,
                                       const std::optional<std::string>& sector = std::nullopt) {
    const auto symbols = sector ? cfg.sector(*sector).symbols() : cfg.all_symbols();
    std::vector<reports::StatsRow> rows;
    for (const auto& sym : symbols) {
        auto series = load_series(cfg, sym).slice(cfg.train_start, cfg.train_end);
        rows.push_back({sym, asset_stats(daily_returns(series))});
    }
    const auto path = out_dir / (sector ? "stats_" + *sector + ".csv" : std::string("stats.csv"));
    io::write_file_atomic(path, reports::stats_csv(rows));
    return {path};
}

inline FrontierCloud sector_frontier(const RunConfig& cfg, const std::string& sector) {
    const auto& universe = cfg.sector(sector);
    std::vector<PriceSeries> series;
    for (const auto& sym : universe.symbols())
        series.push_back(load_series(cfg, sym).slice(cfg.train_start, cfg.train_end));
    const auto mc = mean_and_covariance(align(series));
    FrontierOptions opt;
    opt.n_draws = cfg.n_draws;
    opt.risk_free = cfg.risk_free;
    opt.seed = frontier_seed(cfg, sector);
    opt.workers = std::max(1u, std::thread::hardware_concurrency());
    return build_frontier(mc.mean, mc.cov, opt);
}

inline std::vector<fs::path> cmd_frontier(const RunConfig& cfg, const std::string& sector,
                                          const fs::path& out_dir) {
    const auto cloud = sector_frontier(cfg, sector);
    const auto csv = out_dir / ("frontier_" + sector + ".csv");
    const auto json = out_dir / ("portfolio_" + sector + ".json");
    io::write_file_atomic(csv, reports::frontier_csv(cloud, cfg.sector(sector).symbols()));
    io::write_file_atomic(json, reports::portfolio_report(sector, cloud));
    return {csv, json};
}

inline std::vector<fs::path> cmd_train(const RunConfig& cfg, const std::string& symbol,
                                       const fs::path& out_dir) {
    const auto closes = load_series(cfg, symbol).slice(cfg.train_start, cfg.train_end).closes();
    const auto result = forecast::train(lstm_config_for(cfg, symbol), closes);
    const auto ckpt = checkpoint_path(out_dir, symbol);
    const auto trace = out_dir / (symbol + "_trace.csv");
    io::write_file_atomic(ckpt, forecast::serialize_checkpoint(result.model));
    io::write_file_atomic(trace, reports::trace_csv(result.trace));
    return {ckpt, trace};
}

inline forecast::LstmModel load_checkpoint(const fs::path& path, const std::string& symbol) {
    if (!fs::exists(path))
        throw std::runtime_error("no checkpoint for " + symbol + " (expected " + path.string() + ")");
    try {
        return forecast::deserialize_checkpoint(io::read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(symbol + " (" + path.string() + "): " + e.what());
    }
}

/// `symbol,price` rows (header required).
inline backtest::PriceMap read_price_overrides(const fs::path& path) {
    const auto text = io::read_file(path);
    backtest::PriceMap out;
    std::size_t line_no = 0, pos = 0;
    bool header = false;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (!header) {
            header = true;
            if (line.rfind("symbol,", 0) != 0)
                throw ParseError(path.string() + ": expected header 'symbol,<value>'", line_no);
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw ParseError(path.string() + ": expected 'symbol,value'", line_no);
        try {
            out[line.substr(0, comma)] = io::parse_double(std::string_view(line).substr(comma + 1));
        } catch (const std::invalid_argument& e) {
            throw ParseError(path.string() + ": " + e.what(), line_no);
        }
    }
    return out;
}

namespace detail {

/// Index of the first bar dated on or after `d`.
inline std::size_t bar_on_or_after(const PriceSeries& s, Date d) {
    auto it = std::lower_bound(s.bars.begin(), s.bars.end(), d,
                               [](const PriceBar& b, Date x) { return b.date < x; });
    if (it == s.bars.end())
        throw std::runtime_error(s.symbol + ": no price on or after " + d.to_string());
    return static_cast<std::size_t>(it - s.bars.begin());
}

} // namespace detail

struct BacktestOptions {
    std::optional<fs::path> predicted_prices; // overrides checkpoints
    std::optional<fs::path> weights;          // overrides the max-Sharpe weights
};

/// Buys at the first close on/after invest_date, values at the first close
/// on/after eval_date. Predicted end prices come from each symbol's
/// checkpoint fed the `window` closes preceding the valuation bar.
inline std::vector<fs::path> cmd_backtest(const RunConfig& cfg, const std::string& sector,
                                          const fs::path& out_dir, const BacktestOptions& options = {}) {
    const auto& universe = cfg.sector(sector);
    const auto symbols = universe.symbols();

    PortfolioWeights weights;
    if (options.weights) {
        auto w = read_price_overrides(*options.weights);
        weights.symbols = symbols;
        weights.weights.resize(static_cast<Eigen::Index>(symbols.size()));
        for (std::size_t k = 0; k < symbols.size(); ++k) {
            auto it = w.find(symbols[k]);
            if (it == w.end())
                throw std::invalid_argument("weights file lacks " + symbols[k]);
            weights.weights(static_cast<Eigen::Index>(k)) = it->second;
        }
    } else {
        weights = max_sharpe_portfolio(sector_frontier(cfg, sector)).weights;
    }

    std::optional<backtest::PriceMap> overrides;
    if (options.predicted_prices)
        overrides = read_price_overrides(*options.predicted_prices);

    backtest::PriceMap start, end_actual, end_predicted;
    for (const auto& sym : symbols) {
        const auto series = load_series(cfg, sym);
        start[sym] = series.bars[detail::bar_on_or_after(series, cfg.invest_date)].close;
        const auto eval_idx = detail::bar_on_or_after(series, cfg.eval_date);
        end_actual[sym] = series.bars[eval_idx].close;
        if (overrides) {
            auto it = overrides->find(sym);
            if (it == overrides->end())
                throw std::invalid_argument("predicted-prices file lacks " + sym);
            end_predicted[sym] = it->second;
        } else {
            const auto model = load_checkpoint(checkpoint_path(out_dir, sym), sym);
            const auto w = static_cast<std::size_t>(model.config.window);
            if (eval_idx < w)
                throw std::runtime_error(sym + ": not enough history before " + cfg.eval_date.to_string());
            std::vector<double> window;
            for (std::size_t i = eval_idx - w; i < eval_idx; ++i)
                window.push_back(series.bars[i].close);
            end_predicted[sym] = forecast::predict_next(model, window);
        }
    }

    const auto ledger = backtest::run_backtest(cfg.capital, weights, start, end_actual, end_predicted);
    const auto json = out_dir / ("ledger_" + sector + ".json");
    const auto csv = out_dir / ("ledger_" + sector + ".csv");
    io::write_file_atomic(json, reports::ledger_json(sector, ledger));
    io::write_file_atomic(csv, reports::ledger_csv(ledger));

    // Upsert this sector's row so reruns leave summary.csv unchanged.
    const auto summary = out_dir / "summary.csv";
    std::vector<std::string> lines;
    if (fs::exists(summary)) {
        const auto text = io::read_file(summary);
        std::size_t pos = 0;
        while (pos < text.size()) {
            auto nl = text.find('\n', pos);
            auto line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
            pos = nl == std::string::npos ? text.size() : nl + 1;
            if (!line.empty() && line != reports::kSummaryHeader)
                lines.push_back(line);
        }
    }
    const auto row = reports::summary_line(backtest::summarize({{sector, ledger}}).front());
    bool replaced = false;
    for (auto& line : lines)
        if (line.rfind(sector + ",", 0) == 0) {
            line = row;
            replaced = true;
        }
    if (!replaced)
        lines.push_back(row);
    std::string text = std::string(reports::kSummaryHeader) + '\n';
    for (const auto& line : lines)
        text += line + '\n';
    io::write_file_atomic(summary, text);
    return {json, csv, summary};
}

/// One-day-ahead predictions for every bar dated in [from, to], each fed the
/// preceding `window` actual closes.
inline std::vector<fs::path> cmd_plotdata(const RunConfig& cfg, const std::string& symbol, Date from,
                                          Date to, const fs::path& out_dir) {
    if (to < from)
        throw std::invalid_argument("plotdata: range end precedes start");
    const auto model = load_checkpoint(checkpoint_path(out_dir, symbol), symbol);
    const auto series = load_series(cfg, symbol);
    const auto w = static_cast<std::size_t>(model.config.window);
    std::vector<reports::PlotRow> rows;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& bar = series.bars[i];
        if (bar.date < from || bar.date > to)
            continue;
        if (i < w)
            throw std::runtime_error(symbol + ": " + bar.date.to_string() + " has fewer than " +
                                     std::to_string(w) + " prior closes");
        std::vector<double> window;
        for (std::size_t k = i - w; k < i; ++k)
            window.push_back(series.bars[k].close);
        rows.push_back({bar.date, bar.close, forecast::predict_next(model, window)});
    }
    if (rows.empty())
        throw std::runtime_error(symbol + ": no data between " + from.to_string() + " and " + to.to_string());
    const auto path = out_dir / ("plot_" + symbol + ".csv");
    io::write_file_atomic(path, reports::plot_csv(rows));
    return {path};
}

/// Downloads train_start..eval_date (plus a week of slack) for each symbol
/// into the data directory.
inline std::vector<fs::path> cmd_fetch(const RunConfig& cfg, const std::string& endpoint,
                                       const std::optional<std::string>& symbol = std::nullopt,
                                       const FetchOptions& options = {}) {
    const auto symbols = symbol ? std::vector<std::string>{*symbol} : cfg.all_symbols();
    std::vector<fs::path> written;
    for (const auto& sym : symbols) {
        auto series = fetch_history(sym, cfg.train_start, cfg.eval_date.shifted(7), endpoint, options);
        const auto path = cfg.data_file(sym);
        io::write_file_atomic(path, serialize_csv(series));
        written.push_back(path);
    }
    return written;
}

} // namespace sectorfolio::pipeline
