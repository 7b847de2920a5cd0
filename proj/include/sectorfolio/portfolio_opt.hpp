#pragma once

// Mean-variance statistics and the Monte-Carlo frontier.
//
// The frontier is the full cloud of randomly weighted long-only portfolios.
// The minimum-variance pick is its left-most point and the optimum-risk pick
// is its maximum-Sharpe point. Both selectors scan the cloud; ties go to the
// lowest draw index.
//
// Each draw seeds its own generator from (seed, draw_index), so a cloud is
// identical for any worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sectorfolio/market_data.hpp"
#include "sectorfolio/rng.hpp"

namespace sectorfolio {

inline constexpr double kDefaultRiskFree = 0.01;
inline constexpr int kDefaultDraws = 10000;

struct CovarianceMatrix {
    std::vector<std::string> symbols;
    Eigen::MatrixXd entries;

    Eigen::Index size() const { return entries.rows(); }

    void validate() const {
        if (entries.rows() != entries.cols() ||
            entries.rows() != static_cast<Eigen::Index>(symbols.size()))
            throw std::invalid_argument("covariance: shape does not match symbol count");
        if (!entries.allFinite())
            throw std::invalid_argument("covariance: non-finite entry");
        if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("covariance: not symmetric");
        Eigen::MatrixXd sym = 0.5 * (entries + entries.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-9)
            throw std::invalid_argument("covariance: not positive semidefinite");
    }
};

struct PortfolioWeights {
    std::vector<std::string> symbols;
    Eigen::VectorXd weights;

    void validate() const {
        if (weights.size() != static_cast<Eigen::Index>(symbols.size()))
            throw std::invalid_argument("weights: size does not match symbol count");
        if (weights.size() == 0)
            throw std::invalid_argument("weights: empty");
        if ((weights.array() < 0).any())
            throw std::invalid_argument("weights: negative entry");
        if (std::abs(weights.sum() - 1.0) > 1e-9)
            throw std::invalid_argument("weights: sum is not 1");
    }
};

struct MeanCovariance {
    Eigen::VectorXd mean; // annualized
    CovarianceMatrix cov; // annualized
};

struct FrontierPoint {
    PortfolioWeights weights;
    double annual_return = 0;
    double annual_risk = 0;
    double sharpe = 0;
    std::size_t draw_index = 0;
};

struct FrontierCloud {
    std::vector<FrontierPoint> points;
    std::uint64_t seed = 0;
    std::size_t n_draws = 0;
    double risk_free = kDefaultRiskFree;
};

/// Annualized mean vector and sample covariance (n-1) of daily column returns.
inline MeanCovariance mean_and_covariance(const AlignedCloseMatrix& aligned) {
    const auto n_dates = aligned.closes.rows();
    if (n_dates < 3)
        throw std::invalid_argument("mean_and_covariance: need at least 3 aligned dates, got " +
                                    std::to_string(n_dates));
    const auto n_ret = n_dates - 1;
    Eigen::MatrixXd r = aligned.closes.bottomRows(n_ret).cwiseQuotient(aligned.closes.topRows(n_ret));
    r.array() -= 1.0;
    Eigen::RowVectorXd mean = r.colwise().mean();
    Eigen::MatrixXd centered = r.rowwise() - mean;
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n_ret - 1);
    cov = 0.5 * (cov + cov.transpose());

    MeanCovariance out;
    out.mean = mean.transpose() * static_cast<double>(kTradingDays);
    out.cov.symbols = aligned.symbols;
    out.cov.entries = cov * static_cast<double>(kTradingDays);
    return out;
}

struct PortfolioStats {
    double annual_return = 0;
    double annual_risk = 0;
};

inline PortfolioStats portfolio_stats(const Eigen::VectorXd& w, const Eigen::VectorXd& mean,
                                      const CovarianceMatrix& cov) {
    if (w.size() != mean.size() || w.size() != cov.entries.rows() ||
        cov.entries.rows() != cov.entries.cols())
        throw std::invalid_argument("portfolio_stats: dimension mismatch");
    const double variance = w.dot(cov.entries * w);
    if (variance < -1e-9)
        throw std::invalid_argument("portfolio_stats: negative variance (invalid covariance)");
    return {w.dot(mean), std::sqrt(std::max(variance, 0.0))};
}

inline PortfolioStats portfolio_stats(const PortfolioWeights& w, const Eigen::VectorXd& mean,
                                      const CovarianceMatrix& cov) {
    return portfolio_stats(w.weights, mean, cov);
}

/// Uniform(0,1) draws normalized by their sum.
inline Eigen::VectorXd random_weight_vector(std::size_t n, Rng& rng) {
    if (n == 0)
        throw std::invalid_argument("random_weights: n must be at least 1");
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    for (auto& x : w)
        x = uniform01(rng);
    double total = w.sum();
    if (total <= 0) { // every draw was exactly 0
        w.setOnes();
        total = static_cast<double>(n);
    }
    return w / total;
}

inline PortfolioWeights random_weights(const std::vector<std::string>& symbols, Rng& rng) {
    return {symbols, random_weight_vector(symbols.size(), rng)};
}

inline double sharpe_ratio(double annual_return, double annual_risk,
                           double risk_free = kDefaultRiskFree) {
    if (!(annual_risk > 0))
        throw std::invalid_argument("sharpe_ratio: annual_risk must be positive");
    return (annual_return - risk_free) / annual_risk;
}

namespace detail {

inline FrontierPoint frontier_draw(std::size_t index, std::uint64_t seed,
                                   const Eigen::VectorXd& mean, const CovarianceMatrix& cov,
                                   double risk_free) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
    FrontierPoint p;
    p.weights = random_weights(cov.symbols, rng);
    auto stats = portfolio_stats(p.weights, mean, cov);
    p.annual_return = stats.annual_return;
    p.annual_risk = stats.annual_risk;
    // A degenerate zero-risk point gets the sign of its excess return as +/- infinity.
    p.sharpe = stats.annual_risk > 0
                   ? sharpe_ratio(stats.annual_return, stats.annual_risk, risk_free)
                   : (stats.annual_return - risk_free) * std::numeric_limits<double>::infinity();
    p.draw_index = index;
    return p;
}

} // namespace detail

struct FrontierOptions {
    std::size_t n_draws = kDefaultDraws;
    double risk_free = kDefaultRiskFree;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

inline FrontierCloud build_frontier(const Eigen::VectorXd& mean, const CovarianceMatrix& cov,
                                    const FrontierOptions& options) {
    if (options.n_draws < 1)
        throw std::invalid_argument("build_frontier: n_draws must be at least 1");
    if (mean.size() != cov.size() || cov.symbols.size() != static_cast<std::size_t>(cov.size()))
        throw std::invalid_argument("build_frontier: dimension mismatch");

    FrontierCloud cloud;
    cloud.seed = options.seed;
    cloud.n_draws = options.n_draws;
    cloud.risk_free = options.risk_free;
    cloud.points.resize(options.n_draws);

    const unsigned workers =
        std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(options.n_draws)));
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            cloud.points[i] = detail::frontier_draw(i, options.seed, mean, cov, options.risk_free);
    };
    if (workers == 1) {
        run(0, options.n_draws);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (options.n_draws + workers - 1) / workers;
        for (unsigned k = 0; k < workers; ++k) {
            const std::size_t b = k * chunk, e = std::min(options.n_draws, b + chunk);
            if (b < e)
                pool.emplace_back(run, b, e);
        }
        for (auto& t : pool)
            t.join();
    }
    return cloud;
}

inline const FrontierPoint& min_variance_portfolio(const FrontierCloud& cloud) {
    if (cloud.points.empty())
        throw std::invalid_argument("min_variance_portfolio: empty cloud");
    const FrontierPoint* best = &cloud.points.front();
    for (const auto& p : cloud.points)
        if (p.annual_risk < best->annual_risk ||
            (p.annual_risk == best->annual_risk && p.draw_index < best->draw_index))
            best = &p;
    return *best;
}

inline const FrontierPoint& max_sharpe_portfolio(const FrontierCloud& cloud) {
    if (cloud.points.empty())
        throw std::invalid_argument("max_sharpe_portfolio: empty cloud");
    const FrontierPoint* best = &cloud.points.front();
    for (const auto& p : cloud.points)
        if (p.sharpe > best->sharpe || (p.sharpe == best->sharpe && p.draw_index < best->draw_index))
            best = &p;
    return *best;
}

/// Closed-form unconstrained minimum-variance weights, w = S^-1 1 / (1' S^-1 1).
/// Only meaningful as a reference when every component comes out non-negative.
inline PortfolioWeights analytic_min_variance(const CovarianceMatrix& cov) {
    const auto n = cov.size();
    if (n == 0 || cov.entries.cols() != n)
        throw std::invalid_argument("analytic_min_variance: covariance must be square and non-empty");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(cov.entries);
    if (!lu.isInvertible())
        throw std::invalid_argument("analytic_min_variance: singular covariance");
    Eigen::VectorXd x = lu.solve(Eigen::VectorXd::Ones(n));
    Eigen::VectorXd w = x / x.sum();
    if ((w.array() < 0).any())
        throw std::domain_error("analytic_min_variance: optimum has a negative weight");
    return {cov.symbols, w};
}

} // namespace sectorfolio
