// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixtures.hpp"
#include "sectorfolio/backtest.hpp"
#include "sectorfolio/checkpoint.hpp"
#include "sectorfolio/io.hpp"
#include "sectorfolio/lstm.hpp"
#include "sectorfolio/portfolio_opt.hpp"
#include "sectorfolio/training.hpp"

#ifndef SECTORFOLIO_CLI
#error "SECTORFOLIO_CLI must name the CLI binary"
#endif

using namespace sectorfolio;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void check(bool cond, const std::string& what) {
        if (!detail.empty())
            detail += "; ";
        detail += what;
        if (!cond) {
            ok = false;
            detail += " [x]";
        }
    }
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// 1, 2: ledger fixtures.

struct LedgerRow { const char* sym; double amount, buy, actual, predicted, printed_shares; };

backtest::BacktestLedger run_rows(const std::vector<LedgerRow>& rows) {
    PortfolioWeights w;
    w.weights.resize(static_cast<Eigen::Index>(rows.size()));
    backtest::PriceMap start, actual, predicted;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        w.symbols.push_back(rows[k].sym);
        w.weights(static_cast<Eigen::Index>(k)) = rows[k].amount / 100000;
        start[rows[k].sym] = rows[k].buy;
        actual[rows[k].sym] = rows[k].actual;
        predicted[rows[k].sym] = rows[k].predicted;
    }
    return backtest::run_backtest(100000, w, start, actual, predicted);
}

Outcome c1() {
    const std::vector<LedgerRow> rows{{"IFY", 27192, 1260, 1387, 1413, 21.58},
                                      {"TCS", 27052, 2928, 3153, 3151, 9.24},
                                      {"WIP", 26930, 388, 543, 549, 69.41},
                                      {"TEM", 214, 978, 1031, 1029, 0.22},
                                      {"HCL", 18612, 951, 951, 962, 19.57}};
    auto l = run_rows(rows);
    Outcome o;
    double worst = 0;
    for (std::size_t k = 0; k < rows.size(); ++k)
        worst = std::max(worst, std::abs(l.rows[k].allocation.shares - rows[k].printed_shares));
    o.check(worst <= 0.01, "max share diff " + fmt("%.4f", worst));
    o.check(std::abs(l.total_actual - 115593) <= 10, "total " + fmt("%.1f", l.total_actual) + " vs 115593+-10");
    o.check(std::abs(l.roi_actual - 15.59) <= 0.05, "ROI " + fmt("%.3f", l.roi_actual) + "% vs 15.59+-0.05");
    return o;
}

Outcome c2() {
    Outcome o;
    const double a = backtest::roi(100000, 99490), p = backtest::roi(100000, 99614);
    o.check(std::abs(a - -0.51) <= 0.01, "actual " + fmt("%.3f", a) + "% vs -0.51+-0.01");
    o.check(std::abs(p - -0.37) <= 0.05, "predicted " + fmt("%.3f", p) + "% vs -0.37+-0.05");
    return o;
}

// 3: Sharpe arithmetic. Expected values are worked by hand:
//   (0.1326 - 0.01) / 0.2757 = 0.1226 / 0.2757 = 0.444686...
//   (0.6879 - 0.01) / 0.4105 = 0.6779 / 0.4105 = 1.651400...
Outcome c3() {
    Outcome o;
    const double s1 = sharpe_ratio(0.1326, 0.2757, 0.01);
    const double s2 = sharpe_ratio(0.6879, 0.4105, 0.01);
    o.check(std::abs(s1 - 0.4447) <= 1e-4, "auto " + fmt("%.6f", s1) + " vs 0.4447+-1e-4");
    o.check(std::abs(s2 - 1.6514) <= 1e-4, "metal " + fmt("%.6f", s2) + " vs 1.6514+-1e-4");
    o.detail += "; note: a stated 1.6512 differs from 0.6779/0.4105 by " + fmt("%.1e", std::abs(s2 - 1.6512));
    return o;
}

// 4, 5: Monte-Carlo frontier against exact optima.

CovarianceMatrix five_asset_cov() {
    Eigen::VectorXd vol(5);
    vol << 0.18, 0.22, 0.25, 0.30, 0.35;
    Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(5, 5, 0.2);
    corr.diagonal().setOnes();
    CovarianceMatrix c;
    c.symbols = {"A", "B", "C", "D", "E"};
    c.entries = vol.asDiagonal() * corr * vol.asDiagonal();
    return c;
}

Outcome c4() {
    Outcome o;
    const auto cov = five_asset_cov();
    Eigen::VectorXd mean(5);
    mean << 0.08, 0.10, 0.12, 0.15, 0.20;
    const auto w = analytic_min_variance(cov);
    o.check(w.weights.minCoeff() > 0, "analytic weights positive (min " + fmt("%.4f", w.weights.minCoeff()) + ")");
    const double exact = std::sqrt(w.weights.dot(cov.entries * w.weights));
    for (auto [draws, tol] : {std::pair<std::size_t, double>{10000, 0.05}, {100000, 0.02}}) {
        FrontierOptions opt;
        opt.n_draws = draws;
        opt.seed = 2021;
        opt.workers = 4;
        const double mc = min_variance_portfolio(build_frontier(mean, cov, opt)).annual_risk;
        const double rel = (mc - exact) / exact;
        o.check(rel >= -1e-12 && rel <= tol, std::to_string(draws) + " draws rel " + fmt("%.4f", rel) +
                                                  " <= " + fmt("%.2f", tol));
    }
    return o;
}

Outcome c5() {
    Outcome o;
    Eigen::VectorXd mean(2);
    mean << 0.06, 0.14;
    CovarianceMatrix cov;
    cov.symbols = {"A", "B"};
    cov.entries.resize(2, 2);
    cov.entries << 0.04, 0.006, 0.006, 0.09;
    double grid = -1e300;
    for (int i = 0; i < 10000; ++i) {
        Eigen::Vector2d w(static_cast<double>(i) / 9999.0, 1.0 - static_cast<double>(i) / 9999.0);
        const double r = mean.dot(w), s = std::sqrt(w.dot(cov.entries * w));
        grid = std::max(grid, (r - 0.01) / s);
    }
    FrontierOptions opt;
    opt.n_draws = 100000;
    opt.seed = 5;
    opt.workers = 4;
    const double mc = max_sharpe_portfolio(build_frontier(mean, cov, opt)).sharpe;
    const double rel = std::abs(mc - grid) / grid;
    o.check(rel <= 0.01, "MC " + fmt("%.6f", mc) + " grid " + fmt("%.6f", grid) + " rel " + fmt("%.2e", rel));
    return o;
}

// 6-8: forecaster.

Outcome c6() {
    Outcome o;
    forecast::LstmConfig c;
    c.window = 5;
    c.lstm_layers = {4};
    c.dense_width = 4;
    c.dropout_rate = 0;
    auto p = forecast::make_parameters(c);
    Rng rng(11);
    forecast::initialize(p, rng);
    Eigen::VectorXd x(5);
    for (auto& v : x)
        v = uniform01(rng);
    auto res = forecast::gradient_check(p, x, 0.8);
    o.check(res.max_relative_error < 1e-4, "max rel err " + fmt("%.2e", res.max_relative_error) + " over " +
                                               std::to_string(res.coordinates_checked) + " coords");
    int detected = 0, tensors = 0;
    p.for_each([&](const std::string& name, const Eigen::MatrixXd&) {
        forecast::GradientCheckOptions opt;
        opt.faulty_tensor = name;
        opt.fault_scale = 2.0;
        auto f = forecast::gradient_check(p, x, 0.8, opt);
        ++tensors;
        if (f.max_relative_error > 1e-2 && f.worst_tensor == name)
            ++detected;
    });
    o.check(detected == tensors, "x2 fault caught in " + std::to_string(detected) + "/" + std::to_string(tensors) + " tensors");
    return o;
}

Outcome c7() {
    Outcome o;
    forecast::LstmConfig c;
    c.window = 20;
    c.lstm_layers = {16};
    c.dense_width = 16;
    c.epochs = 200;
    c.dropout_rate = 0;
    const auto closes = fixtures::sine(300);
    auto r = forecast::train(c, closes);
    const double mae = r.trace.back().train_mae;
    o.check(mae < 0.05, "epoch-200 train MAE " + fmt("%.4f", mae) + " < 0.05");
    o.check(r.trace.back().train_loss < r.trace.front().train_loss,
            "loss " + fmt("%.5f", r.trace.front().train_loss) + " -> " + fmt("%.6f", r.trace.back().train_loss));
    return o;
}

Outcome c8() {
    Outcome o;
    forecast::LstmConfig c;
    auto p = forecast::make_parameters(c);
    Rng rng(1);
    forecast::initialize(p, rng);
    o.check(c.window == 50 && c.lstm_layers == std::vector<int>{256, 256} && c.dense_width == 256,
            std::to_string(p.count()) + " parameters");
    Eigen::MatrixXd x(c.window, c.batch_size);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x.data()[i] = uniform01(rng);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(c.batch_size, 0.5);
    const auto t0 = std::chrono::steady_clock::now();
    auto tr = forecast::forward_batch(p, x, c.dropout_rate, &rng);
    auto g = forecast::backward_batch(p, tr, forecast::huber_batch(tr.prediction, y, 1.0).d_prediction);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(g.all_finite(), "finite gradients");
    o.check(secs < 10, "batch of 64 in " + fmt("%.2f", secs) + " s");
    return o;
}

// 9: CLI determinism.

Outcome c9() {
    Outcome o;
    fixtures::TempDir dir("acceptance");
    const auto dates = fixtures::weekdays(Date(2019, 1, 1), Date(2021, 6, 30));
    nlohmann::json members = nlohmann::json::array();
    for (int k = 0; k < 4; ++k) {
        const std::string sym = "S" + std::to_string(k);
        auto s = fixtures::make_series(sym, dates, fixtures::random_walk(dates.size(), 70 + static_cast<std::uint64_t>(k)));
        io::write_file_atomic(dir.path() / "data" / (sym + ".csv"), serialize_csv(s));
        members.push_back({{"symbol", sym}});
    }
    nlohmann::json cfg{{"train_start", "2019-01-01"}, {"train_end", "2020-12-31"}, {"n_draws", 2000},
                       {"seed", 3},
                       {"lstm", {{"window", 20}, {"lstm_layers", {8}}, {"dense_width", 8}, {"epochs", 3}}},
                       {"sectors", {{{"name", "demo"}, {"members", members}}}}};
    io::write_file_atomic(dir.path() / "run.json", cfg.dump(2));

    auto run = [&](const std::string& out, const std::string& sub) {
        const std::string cmd = std::string("\"") + SECTORFOLIO_CLI + "\" --config \"" + (dir.path() / "run.json").string() +
                                "\" --out \"" + (dir.path() / out).string() + "\" " + sub + " > /dev/null";
        return std::system(cmd.c_str()) == 0;
    };
    bool ran = true;
    for (const char* out : {"a", "b"})
        ran = run(out, "frontier --sector demo") && run(out, "train --symbol S0") && ran;
    o.check(ran, "CLI runs succeeded");
    int same = 0, files = 0;
    for (const char* f : {"frontier_demo.csv", "portfolio_demo.json", "S0.ckpt", "S0_trace.csv"}) {
        ++files;
        const auto a = dir.path() / "a" / f, b = dir.path() / "b" / f;
        if (fs::exists(a) && fs::exists(b) && io::read_file(a) == io::read_file(b))
            ++same;
    }
    o.check(same == files, std::to_string(same) + "/" + std::to_string(files) + " artifacts byte-identical");
    return o;
}

Outcome c10() {
    Outcome o;
    o.detail = "disclosure: published sector weights and five-month returns depend on an unavailable price "
               "snapshot and unseeded random stream, so they are not reproduced; criteria 1-5 cover the "
               "arithmetic and optimizer against fixtures and exact oracles";
    return o;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, "IT ledger fixture", 1, c1},
        {2, "auto ledger totals", 1, c2},
        {3, "Sharpe ratio arithmetic", 1, c3},
        {4, "MC min-variance vs analytic", 10, c4},
        {5, "MC max-Sharpe vs grid", 10, c5},
        {6, "BPTT gradient check", 30, c6},
        {7, "sine learnability", 120, c7},
        {8, "full-size model smoke test", 10, c8},
        {9, "CLI determinism", 120, c9},
        {10, "non-reproducibility disclosure", 1, c10},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) {
            o.ok = false;
            o.detail += "; over budget";
        }
        failed += o.ok ? 0 : 1;
        std::printf("%s  C%-2d %-32s %7.2fs  %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
