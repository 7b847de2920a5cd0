#pragma once

// Buy-and-hold ledger: invest capital by portfolio weight at the start
// prices, then value the holdings at actual and predicted end prices.
// Invested amounts are whole currency units; shares stay fractional.

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sectorfolio/portfolio_opt.hpp"

namespace sectorfolio::backtest {

using PriceMap = std::map<std::string, double>;

struct Allocation {
    std::string symbol;
    double amount_invested = 0;
    double buy_price = 0;
    double shares = 0;
};

struct LedgerRow {
    Allocation allocation;
    double actual_price = 0;
    double actual_value = 0;
    double predicted_price = 0;
    double predicted_value = 0;
};

struct BacktestLedger {
    double capital = 0;
    std::vector<LedgerRow> rows;
    double total_invested = 0;
    double total_actual = 0;
    double total_predicted = 0;
    double roi_actual = 0;    // percent
    double roi_predicted = 0; // percent

    /// Capital left uninvested by rounding the per-asset amounts.
    double rounding_residual() const { return capital - total_invested; }
};

/// Half away from zero, the display rule for currency and share columns.
inline double round_to(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(v * scale) / scale;
}

namespace detail {

inline double price_for(const PriceMap& prices, const std::string& symbol, const char* what) {
    auto it = prices.find(symbol);
    if (it == prices.end())
        throw std::invalid_argument(std::string("missing ") + what + " price for " + symbol);
    if (!(it->second > 0) || !std::isfinite(it->second))
        throw std::invalid_argument(std::string("non-positive ") + what + " price for " + symbol);
    return it->second;
}

} // namespace detail

inline std::vector<Allocation> allocate(double capital, const PortfolioWeights& weights,
                                        const PriceMap& start_prices) {
    if (!(capital > 0))
        throw std::invalid_argument("allocate: capital must be positive");
    weights.validate();
    std::vector<Allocation> out;
    for (std::size_t k = 0; k < weights.symbols.size(); ++k) {
        Allocation a;
        a.symbol = weights.symbols[k];
        a.buy_price = detail::price_for(start_prices, a.symbol, "start");
        a.amount_invested = std::round(capital * weights.weights(static_cast<Eigen::Index>(k)));
        a.shares = a.amount_invested / a.buy_price;
        out.push_back(a);
    }
    return out;
}

struct Valuation {
    std::vector<double> values; // per allocation, same order
    double total = 0;
};

inline Valuation value_portfolio(const std::vector<Allocation>& allocs, const PriceMap& prices) {
    Valuation v;
    for (const auto& a : allocs) {
        auto it = prices.find(a.symbol);
        if (it == prices.end())
            throw std::invalid_argument("value_portfolio: missing price for " + a.symbol);
        v.values.push_back(a.shares * it->second);
        v.total += v.values.back();
    }
    return v;
}

inline double roi(double capital, double end_value) {
    if (!(capital > 0))
        throw std::invalid_argument("roi: capital must be positive");
    return (end_value - capital) / capital * 100.0;
}

inline BacktestLedger run_backtest(double capital, const PortfolioWeights& weights,
                                   const PriceMap& start_prices, const PriceMap& end_actual_prices,
                                   const PriceMap& end_predicted_prices) {
    BacktestLedger ledger;
    ledger.capital = capital;
    const auto allocs = allocate(capital, weights, start_prices);
    for (const auto& a : allocs) {
        LedgerRow row;
        row.allocation = a;
        row.actual_price = detail::price_for(end_actual_prices, a.symbol, "actual end");
        row.predicted_price = detail::price_for(end_predicted_prices, a.symbol, "predicted end");
        row.actual_value = a.shares * row.actual_price;
        row.predicted_value = a.shares * row.predicted_price;
        ledger.total_invested += a.amount_invested;
        ledger.total_actual += row.actual_value;
        ledger.total_predicted += row.predicted_value;
        ledger.rows.push_back(row);
    }
    ledger.roi_actual = roi(capital, ledger.total_actual);
    ledger.roi_predicted = roi(capital, ledger.total_predicted);
    return ledger;
}

struct SummaryRow {
    std::string sector;
    double predicted_return_pct = 0;
    double actual_return_pct = 0;
};

struct NamedLedger {
    std::string sector;
    BacktestLedger ledger;
};

inline std::vector<SummaryRow> summarize(const std::vector<NamedLedger>& ledgers) {
    std::vector<SummaryRow> out;
    for (const auto& l : ledgers)
        out.push_back({l.sector, l.ledger.roi_predicted, l.ledger.roi_actual});
    return out;
}

} // namespace sectorfolio::backtest
