#pragma once

// Mini-batch training of the LSTM regressor and one-day-ahead prediction.
//
// Windows are split chronologically: the last 10% (rounded down) validate,
// the rest train. The scaler is fit on the closes the training windows and
// their targets touch, never on validation data.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sectorfolio/error.hpp"
#include "sectorfolio/forecaster.hpp"
#include "sectorfolio/lstm.hpp"
#include "sectorfolio/rng.hpp"

namespace sectorfolio::forecast {

struct LstmModel {
    LstmConfig config;
    Scaler scaler;
    Parameters params;
};

/// Freshly initialized (untrained) model; weights drawn from the config seed.
inline LstmModel make_model(const LstmConfig& config, const Scaler& scaler) {
    config.validate();
    scaler.validate();
    LstmModel m{config, scaler, make_parameters(config)};
    Rng rng(derive_seed(config.seed, "init"));
    initialize(m.params, rng);
    return m;
}

struct EpochStats {
    int epoch = 0;
    double train_loss = 0;
    double train_mae = 0;
    double val_loss = std::numeric_limits<double>::quiet_NaN();
    double val_mae = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
    LstmModel model;
    std::vector<EpochStats> trace;
};

/// Adam with the usual decay constants.
class Adam {
public:
    Adam(const Parameters& like, double learning_rate)
        : lr_(learning_rate), m_(like.zeros_like()), v_(like.zeros_like()) {}

    void step(Parameters& params, const Parameters& grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(kBeta1, t_);
        const double c2 = 1.0 - std::pow(kBeta2, t_);
        std::vector<Eigen::MatrixXd*> p, m, v;
        std::vector<const Eigen::MatrixXd*> g;
        params.for_each([&](const std::string&, Eigen::MatrixXd& x) { p.push_back(&x); });
        m_.for_each([&](const std::string&, Eigen::MatrixXd& x) { m.push_back(&x); });
        v_.for_each([&](const std::string&, Eigen::MatrixXd& x) { v.push_back(&x); });
        grad.for_each([&](const std::string&, const Eigen::MatrixXd& x) { g.push_back(&x); });
        for (std::size_t k = 0; k < p.size(); ++k) {
            *m[k] = kBeta1 * *m[k] + (1.0 - kBeta1) * *g[k];
            *v[k] = kBeta2 * *v[k] + (1.0 - kBeta2) * g[k]->cwiseAbs2();
            p[k]->array() -= lr_ * (m[k]->array() / c1) / ((v[k]->array() / c2).sqrt() + kEpsilon);
        }
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-7;
    double lr_;
    int t_ = 0;
    Parameters m_, v_;
};

struct EvalResult {
    double loss = 0;
    double mae = 0;
};

/// Inference-mode Huber loss and MAE over samples [begin, end) of a scaled dataset.
inline EvalResult evaluate(const LstmModel& model, const WindowedDataset& scaled, Eigen::Index begin,
                           Eigen::Index end) {
    if (begin >= end)
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    EvalResult r;
    const Eigen::Index chunk = std::max(1, model.config.batch_size);
    for (Eigen::Index b = begin; b < end; b += chunk) {
        const Eigen::Index n = std::min(chunk, end - b);
        auto tr = forward_batch(model.params, scaled.inputs.middleCols(b, n));
        auto bl = huber_batch(tr.prediction, scaled.targets.segment(b, n), model.config.huber_delta);
        r.loss += bl.loss * static_cast<double>(n);
        r.mae += bl.mae * static_cast<double>(n);
    }
    r.loss /= static_cast<double>(end - begin);
    r.mae /= static_cast<double>(end - begin);
    return r;
}

struct SplitPlan {
    Eigen::Index samples = 0;
    Eigen::Index train = 0;
    Eigen::Index validation = 0;
    std::size_t train_closes = 0; // prefix of closes the training split touches
};

inline SplitPlan plan_split(std::size_t n_closes, const LstmConfig& config) {
    const auto n = static_cast<Eigen::Index>(n_closes) - config.window - config.horizon + 1;
    SplitPlan s;
    s.samples = std::max<Eigen::Index>(n, 0);
    s.validation = s.samples / 10;
    s.train = s.samples - s.validation;
    s.train_closes = static_cast<std::size_t>(std::max<Eigen::Index>(s.train + config.window + config.horizon - 1, 0));
    return s;
}

inline WindowedDataset scale_dataset(const WindowedDataset& raw, const Scaler& scaler) {
    WindowedDataset out = raw;
    out.inputs = ((raw.inputs.array() - scaler.min) / (scaler.max - scaler.min)).matrix();
    out.targets = ((raw.targets.array() - scaler.min) / (scaler.max - scaler.min)).matrix();
    return out;
}

/// Trains a model on a close-price series. `fixed_scaler` replaces the
/// training-split fit (useful when the series is constant).
inline TrainResult train(const LstmConfig& config, std::span<const double> closes,
                         std::optional<Scaler> fixed_scaler = std::nullopt) {
    config.validate();
    const auto split = plan_split(closes.size(), config);
    if (split.train < 1)
        throw std::invalid_argument("train: need at least " +
                                    std::to_string(config.window + config.horizon) +
                                    " closes for one training window, got " +
                                    std::to_string(closes.size()));
    const Scaler scaler = fixed_scaler ? *fixed_scaler : fit_scaler(closes.first(split.train_closes));

    TrainResult result{make_model(config, scaler), {}};
    LstmModel& model = result.model;
    const WindowedDataset data = scale_dataset(make_windows(closes, config.window, config.horizon), scaler);

    Adam adam(model.params, config.learning_rate);
    Rng rng(derive_seed(config.seed, "train"));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(split.train));
    const Eigen::Index batch = config.batch_size;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0, mae_sum = 0;
        int batch_no = 0;
        for (Eigen::Index b = 0; b < split.train; b += batch, ++batch_no) {
            const Eigen::Index n = std::min(batch, split.train - b);
            std::vector<Eigen::Index> idx(order.begin() + b, order.begin() + b + n);
            Eigen::MatrixXd x = data.inputs(Eigen::all, idx);
            Eigen::VectorXd y = data.targets(idx);
            ForwardTrace tr;
            try {
                tr = forward_batch(model.params, x, config.dropout_rate, &rng);
            } catch (const NumericalError& e) {
                throw NumericalError("train: epoch " + std::to_string(epoch) + " batch " +
                                     std::to_string(batch_no) + ": " + e.what());
            }
            auto bl = huber_batch(tr.prediction, y, config.huber_delta);
            if (!std::isfinite(bl.loss))
                throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                     " batch " + std::to_string(batch_no));
            adam.step(model.params, backward_batch(model.params, tr, bl.d_prediction));
            loss_sum += bl.loss * static_cast<double>(n);
            mae_sum += bl.mae * static_cast<double>(n);
        }
        if (!model.params.all_finite())
            throw NumericalError("train: non-finite parameters after epoch " + std::to_string(epoch));
        EpochStats st;
        st.epoch = epoch;
        st.train_loss = loss_sum / static_cast<double>(split.train);
        st.train_mae = mae_sum / static_cast<double>(split.train);
        auto val = evaluate(model, data, split.train, split.samples);
        st.val_loss = val.loss;
        st.val_mae = val.mae;
        result.trace.push_back(st);
    }
    return result;
}

/// Next-day close (horizon steps ahead) from the last `window` closes.
inline double predict_next(const LstmModel& model, std::span<const double> last_closes) {
    if (static_cast<int>(last_closes.size()) != model.config.window)
        throw std::invalid_argument("predict_next: expected " + std::to_string(model.config.window) +
                                    " closes, got " + std::to_string(last_closes.size()));
    Eigen::VectorXd w(model.config.window);
    for (int t = 0; t < model.config.window; ++t)
        w(t) = model.scaler.transform(last_closes[static_cast<std::size_t>(t)]);
    return model.scaler.inverse_transform(forward(model.params, w));
}

} // namespace sectorfolio::forecast
