#pragma once

// Data preparation and loss functions for the next-day close regressor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sectorfolio::forecast {

struct LstmConfig {
    int window = 50;
    int horizon = 1;
    std::vector<int> lstm_layers{256, 256};
    double dropout_rate = 0.3;
    int dense_width = 256;
    int batch_size = 64;
    int epochs = 100;
    double learning_rate = 1e-3;
    double huber_delta = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (window < 1)
            throw std::invalid_argument("lstm config: window must be >= 1");
        if (horizon < 1)
            throw std::invalid_argument("lstm config: horizon must be >= 1");
        if (lstm_layers.empty())
            throw std::invalid_argument("lstm config: need at least one LSTM layer");
        for (int w : lstm_layers)
            if (w < 1)
                throw std::invalid_argument("lstm config: layer width must be >= 1");
        if (!(dropout_rate >= 0 && dropout_rate < 1))
            throw std::invalid_argument("lstm config: dropout_rate must be in [0, 1)");
        if (dense_width < 1)
            throw std::invalid_argument("lstm config: dense_width must be >= 1");
        if (batch_size < 1)
            throw std::invalid_argument("lstm config: batch_size must be >= 1");
        if (epochs < 0)
            throw std::invalid_argument("lstm config: epochs must be >= 0");
        if (!(learning_rate > 0))
            throw std::invalid_argument("lstm config: learning_rate must be positive");
        if (!(huber_delta > 0))
            throw std::invalid_argument("lstm config: huber_delta must be positive");
    }

    bool operator==(const LstmConfig&) const = default;
};

/// Min-max scaling to [0, 1]. Values outside the fitted range pass through
/// the affine map unclipped.
struct Scaler {
    double min = 0;
    double max = 1;

    double transform(double x) const { return (x - min) / (max - min); }
    double inverse_transform(double y) const { return min + y * (max - min); }

    void validate() const {
        if (!(max > min) || !std::isfinite(min) || !std::isfinite(max))
            throw std::invalid_argument("scaler: max must exceed min");
    }
};

inline Scaler fit_scaler(std::span<const double> train_closes) {
    if (train_closes.empty())
        throw std::invalid_argument("fit_scaler: empty series");
    auto [lo, hi] = std::minmax_element(train_closes.begin(), train_closes.end());
    if (!(*hi > *lo))
        throw std::invalid_argument("fit_scaler: series is constant, cannot scale");
    return {*lo, *hi};
}

/// Sliding windows with stride 1. Column i of `inputs` holds
/// closes[i .. i+window), `targets[i]` = closes[i + window + horizon - 1].
struct WindowedDataset {
    Eigen::MatrixXd inputs;  // window x samples
    Eigen::VectorXd targets; // samples

    Eigen::Index size() const { return targets.size(); }
};

inline WindowedDataset make_windows(std::span<const double> closes, int window, int horizon) {
    if (window < 1 || horizon < 1)
        throw std::invalid_argument("make_windows: window and horizon must be >= 1");
    const auto len = static_cast<Eigen::Index>(closes.size());
    if (len < window + horizon)
        throw std::invalid_argument("make_windows: series of length " + std::to_string(len) +
                                    " is shorter than window + horizon = " +
                                    std::to_string(window + horizon));
    const Eigen::Index n = len - window - horizon + 1;
    WindowedDataset ds;
    ds.inputs.resize(window, n);
    ds.targets.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index t = 0; t < window; ++t)
            ds.inputs(t, i) = closes[static_cast<std::size_t>(i + t)];
        ds.targets(i) = closes[static_cast<std::size_t>(i + window + horizon - 1)];
    }
    return ds;
}

inline double huber_loss(double y, double y_hat, double delta) {
    const double r = std::abs(y - y_hat);
    return r <= delta ? 0.5 * r * r : delta * (r - 0.5 * delta);
}

/// d huber / d y_hat.
inline double huber_gradient(double y, double y_hat, double delta) {
    return -std::clamp(y - y_hat, -delta, delta);
}

inline double mae(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size())
        throw std::invalid_argument("mae: length mismatch");
    if (y.empty())
        throw std::invalid_argument("mae: empty input");
    double total = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        total += std::abs(y[i] - y_hat[i]);
    return total / static_cast<double>(y.size());
}

} // namespace sectorfolio::forecast
