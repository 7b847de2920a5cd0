// sectorfolio: sector portfolio construction, forecasting and backtest CLI.
//
//   sectorfolio --config run.json [--seed N] [--out DIR] <subcommand> [options]

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sectorfolio/pipeline.hpp"

namespace fs = std::filesystem;
using namespace sectorfolio;

int main(int argc, char** argv) {
    CLI::App app{"Sector portfolio optimizer, LSTM forecaster and backtester"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::optional<double> risk_free;
    std::optional<std::size_t> draws;
    app.add_option("--config", config_path, "Run configuration (JSON)")->required();
    app.add_option("--seed", seed, "Override the run seed");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--risk-free", risk_free, "Risk-free rate used in the Sharpe ratio");
    app.add_option("--draws", draws, "Monte-Carlo frontier draws");

    auto* stats = app.add_subcommand("stats", "Per-asset return and volatility statistics");
    std::optional<std::string> stats_sector;
    stats->add_option("--sector", stats_sector, "Restrict to one sector");

    auto* frontier = app.add_subcommand("frontier", "Efficient-frontier cloud and portfolio report");
    std::string frontier_sector;
    frontier->add_option("--sector", frontier_sector)->required();

    auto* train = app.add_subcommand("train", "Train the LSTM forecaster for one symbol");
    std::string train_symbol;
    train->add_option("--symbol", train_symbol)->required();

    auto* bt = app.add_subcommand("backtest", "Actual vs predicted ledger for one sector");
    std::string bt_sector;
    std::optional<std::string> predicted_prices, weights_file;
    bt->add_option("--sector", bt_sector)->required();
    bt->add_option("--predicted-prices", predicted_prices, "CSV symbol,price replacing model predictions");
    bt->add_option("--weights", weights_file, "CSV symbol,weight replacing the max-Sharpe weights");

    auto* plot = app.add_subcommand("plotdata", "Actual vs one-day-ahead predicted closes");
    std::string plot_symbol, plot_from, plot_to;
    plot->add_option("--symbol", plot_symbol)->required();
    plot->add_option("--from", plot_from, "First date (YYYY-MM-DD)")->required();
    plot->add_option("--to", plot_to, "Last date (YYYY-MM-DD)")->required();

    auto* fetch = app.add_subcommand("fetch", "Download price history into the data directory");
    std::optional<std::string> fetch_symbol, endpoint;
    fetch->add_option("--symbol", fetch_symbol, "Only this symbol");
    fetch->add_option("--endpoint", endpoint, "History endpoint URL (overrides config)");

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = load_run_config(config_path);
        if (seed)
            cfg.seed = *seed;
        if (risk_free)
            cfg.risk_free = *risk_free;
        if (draws)
            cfg.n_draws = *draws;
        cfg.validate();
        const fs::path out = out_dir;

        std::vector<fs::path> written;
        if (*stats) {
            written = pipeline::cmd_stats(cfg, out, stats_sector);
        } else if (*frontier) {
            written = pipeline::cmd_frontier(cfg, frontier_sector, out);
        } else if (*train) {
            written = pipeline::cmd_train(cfg, train_symbol, out);
        } else if (*bt) {
            pipeline::BacktestOptions opt;
            if (predicted_prices)
                opt.predicted_prices = *predicted_prices;
            if (weights_file)
                opt.weights = *weights_file;
            written = pipeline::cmd_backtest(cfg, bt_sector, out, opt);
        } else if (*plot) {
            written = pipeline::cmd_plotdata(cfg, plot_symbol, Date::parse(plot_from),
                                             Date::parse(plot_to), out);
        } else if (*fetch) {
            const auto url = endpoint ? endpoint : cfg.endpoint;
            if (!url)
                throw std::invalid_argument("fetch: no endpoint (use --endpoint or config 'endpoint')");
            written = pipeline::cmd_fetch(cfg, *url, fetch_symbol);
        }
        for (const auto& p : written)
            std::cout << p.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
