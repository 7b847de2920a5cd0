#pragma once

// Text exports: frontier CSV, portfolio report JSON, ledger JSON/CSV,
// summary CSV, stats CSV, training trace CSV, plot-data CSV.

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "sectorfolio/backtest.hpp"
#include "sectorfolio/io.hpp"
#include "sectorfolio/market_data.hpp"
#include "sectorfolio/portfolio_opt.hpp"
#include "sectorfolio/training.hpp"

namespace sectorfolio::reports {

namespace detail {

inline std::string sci17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// `draw_index,risk,return,sharpe,w_<SYM>...`, weights with 17 significant digits.
inline std::string frontier_csv(const FrontierCloud& cloud, const std::vector<std::string>& symbols) {
    std::string out = "draw_index,risk,return,sharpe";
    for (const auto& s : symbols)
        out += ",w_" + s;
    out += '\n';
    for (const auto& p : cloud.points) {
        out += std::to_string(p.draw_index);
        out += ',' + io::format_double(p.annual_risk);
        out += ',' + io::format_double(p.annual_return);
        out += ',' + io::format_double(p.sharpe);
        for (double w : p.weights.weights)
            out += ',' + detail::sci17(w);
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json portfolio_json(const FrontierPoint& p) {
    nlohmann::ordered_json weights = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < p.weights.symbols.size(); ++k)
        weights[p.weights.symbols[k]] = p.weights.weights(static_cast<Eigen::Index>(k));
    return {{"weights", weights},
            {"annual_return", p.annual_return},
            {"annual_risk", p.annual_risk},
            {"sharpe", p.sharpe},
            {"draw_index", p.draw_index}};
}

inline std::string portfolio_report(const std::string& sector, const FrontierCloud& cloud) {
    nlohmann::ordered_json j{{"sector", sector},
                             {"risk_free", cloud.risk_free},
                             {"n_draws", cloud.n_draws},
                             {"min_risk", portfolio_json(min_variance_portfolio(cloud))},
                             {"opt_risk", portfolio_json(max_sharpe_portfolio(cloud))}};
    return j.dump(2) + "\n";
}

inline std::string ledger_json(const std::string& sector, const backtest::BacktestLedger& l) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : l.rows)
        rows.push_back({{"symbol", r.allocation.symbol},
                        {"amount_invested", r.allocation.amount_invested},
                        {"buy_price", r.allocation.buy_price},
                        {"shares", r.allocation.shares},
                        {"actual_price", r.actual_price},
                        {"actual_value", r.actual_value},
                        {"predicted_price", r.predicted_price},
                        {"predicted_value", r.predicted_value}});
    nlohmann::ordered_json j{{"sector", sector},
                             {"capital", l.capital},
                             {"rows", rows},
                             {"total_invested", l.total_invested},
                             {"total_actual", l.total_actual},
                             {"total_predicted", l.total_predicted},
                             {"rounding_residual", l.rounding_residual()},
                             {"roi_actual_pct", l.roi_actual},
                             {"roi_predicted_pct", l.roi_predicted}};
    return j.dump(2) + "\n";
}

/// Display mirror of the ledger: whole currency units, shares to 2 d.p.,
/// then a TOTAL row and an ROI row (percent, 2 d.p.).
inline std::string ledger_csv(const backtest::BacktestLedger& l) {
    using backtest::round_to;
    auto units = [](double v) { return io::format_fixed(round_to(v, 0), 0); };
    std::string out =
        "symbol,amount_invested,buy_price,shares,actual_price,actual_value,predicted_price,predicted_value\n";
    for (const auto& r : l.rows) {
        out += r.allocation.symbol + ',' + units(r.allocation.amount_invested) + ',' +
               io::format_double(r.allocation.buy_price) + ',' +
               io::format_fixed(round_to(r.allocation.shares, 2), 2) + ',' +
               io::format_double(r.actual_price) + ',' + units(r.actual_value) + ',' +
               io::format_double(r.predicted_price) + ',' + units(r.predicted_value) + '\n';
    }
    out += "TOTAL," + units(l.total_invested) + ",,,," + units(l.total_actual) + ",," +
           units(l.total_predicted) + '\n';
    out += "ROI,,,,," + io::format_fixed(round_to(l.roi_actual, 2), 2) + ",," +
           io::format_fixed(round_to(l.roi_predicted, 2), 2) + '\n';
    return out;
}

inline constexpr const char* kSummaryHeader = "sector,predicted_return_pct,actual_return_pct";

inline std::string summary_line(const backtest::SummaryRow& r) {
    return r.sector + ',' + io::format_double(r.predicted_return_pct) + ',' +
           io::format_double(r.actual_return_pct);
}

inline std::string summary_csv(const std::vector<backtest::SummaryRow>& rows) {
    std::string out = std::string(kSummaryHeader) + '\n';
    for (const auto& r : rows)
        out += summary_line(r) + '\n';
    return out;
}

struct StatsRow {
    std::string symbol;
    AssetStats stats;
};

inline std::string stats_csv(const std::vector<StatsRow>& rows) {
    std::string out = "symbol,mean_daily_return,daily_volatility,annual_volatility\n";
    for (const auto& r : rows)
        out += r.symbol + ',' + io::format_double(r.stats.mean_daily_return) + ',' +
               io::format_double(r.stats.daily_volatility) + ',' +
               io::format_double(r.stats.annual_volatility) + '\n';
    return out;
}

inline std::string trace_csv(const std::vector<forecast::EpochStats>& trace) {
    std::string out = "epoch,train_loss,train_mae,val_loss,val_mae\n";
    for (const auto& e : trace)
        out += std::to_string(e.epoch) + ',' + io::format_double(e.train_loss) + ',' +
               io::format_double(e.train_mae) + ',' + io::format_double(e.val_loss) + ',' +
               io::format_double(e.val_mae) + '\n';
    return out;
}

struct PlotRow {
    Date date;
    double actual_close = 0;
    double predicted_close = 0;
};

inline std::string plot_csv(const std::vector<PlotRow>& rows) {
    std::string out = "date,actual_close,predicted_close\n";
    for (const auto& r : rows)
        out += r.date.to_string() + ',' + io::format_double(r.actual_close) + ',' +
               io::format_double(r.predicted_close) + '\n';
    return out;
}

} // namespace sectorfolio::reports
