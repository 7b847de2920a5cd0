#pragma once

// Stacked LSTM regressor: LSTM layers -> dense (ReLU) -> one logistic output.
//
// Every LSTM layer emits its full hidden sequence; the last layer's final
// hidden state feeds the dense head. Inverted dropout follows each LSTM layer
// at train time (on the whole sequence for inner layers, on the final hidden
// state for the last one).
//
// Gate tensors are stacked by rows in the order input, forget, output,
// candidate: w_input is 4H x in, w_hidden is 4H x H, bias is 4H x 1.
//
// Batched tensors keep one sample per column.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sectorfolio/error.hpp"
#include "sectorfolio/forecaster.hpp"
#include "sectorfolio/rng.hpp"

namespace sectorfolio::forecast {

enum Gate : int { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCandidateGate = 3 };

struct LstmLayer {
    Eigen::MatrixXd w_input;
    Eigen::MatrixXd w_hidden;
    Eigen::MatrixXd bias;

    Eigen::Index width() const { return w_hidden.cols(); }
    Eigen::Index input_width() const { return w_input.cols(); }
};

struct Parameters {
    std::vector<LstmLayer> lstm;
    Eigen::MatrixXd dense_weight;  // D x H_last
    Eigen::MatrixXd dense_bias;    // D x 1
    Eigen::MatrixXd output_weight; // 1 x D
    Eigen::MatrixXd output_bias;   // 1 x 1

    /// Visits every tensor with a stable name, in checkpoint order.
    template <typename Self, typename F>
    static void visit(Self& self, F&& f) {
        for (std::size_t l = 0; l < self.lstm.size(); ++l) {
            const std::string p = "lstm" + std::to_string(l) + ".";
            f(p + "w_input", self.lstm[l].w_input);
            f(p + "w_hidden", self.lstm[l].w_hidden);
            f(p + "bias", self.lstm[l].bias);
        }
        f(std::string("dense.weight"), self.dense_weight);
        f(std::string("dense.bias"), self.dense_bias);
        f(std::string("output.weight"), self.output_weight);
        f(std::string("output.bias"), self.output_bias);
    }
    template <typename F> void for_each(F&& f) { visit(*this, std::forward<F>(f)); }
    template <typename F> void for_each(F&& f) const { visit(*this, std::forward<F>(f)); }

    Eigen::MatrixXd& tensor(const std::string& name) {
        Eigen::MatrixXd* found = nullptr;
        for_each([&](const std::string& n, Eigen::MatrixXd& t) {
            if (n == name)
                found = &t;
        });
        if (!found)
            throw std::invalid_argument("no parameter tensor named " + name);
        return *found;
    }

    Parameters zeros_like() const {
        Parameters z = *this;
        z.for_each([](const std::string&, Eigen::MatrixXd& t) { t.setZero(); });
        return z;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for_each([&](const std::string&, const Eigen::MatrixXd& t) { n += static_cast<std::size_t>(t.size()); });
        return n;
    }

    bool all_finite() const {
        bool ok = true;
        for_each([&](const std::string&, const Eigen::MatrixXd& t) { ok = ok && t.allFinite(); });
        return ok;
    }
};

/// Zero tensors with the shapes implied by `config`.
inline Parameters make_parameters(const LstmConfig& config) {
    config.validate();
    Parameters p;
    Eigen::Index in = 1;
    for (int w : config.lstm_layers) {
        LstmLayer layer;
        layer.w_input = Eigen::MatrixXd::Zero(4 * w, in);
        layer.w_hidden = Eigen::MatrixXd::Zero(4 * w, w);
        layer.bias = Eigen::MatrixXd::Zero(4 * w, 1);
        p.lstm.push_back(std::move(layer));
        in = w;
    }
    p.dense_weight = Eigen::MatrixXd::Zero(config.dense_width, in);
    p.dense_bias = Eigen::MatrixXd::Zero(config.dense_width, 1);
    p.output_weight = Eigen::MatrixXd::Zero(1, config.dense_width);
    p.output_bias = Eigen::MatrixXd::Zero(1, 1);
    return p;
}

/// Glorot-uniform weights (limit sqrt(6 / (fan_in + fan_out)) per tensor),
/// zero biases except the forget gate at 1.
inline void initialize(Parameters& p, Rng& rng) {
    auto glorot = [&](Eigen::MatrixXd& t) {
        const double limit = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
        for (Eigen::Index j = 0; j < t.cols(); ++j)
            for (Eigen::Index i = 0; i < t.rows(); ++i)
                t(i, j) = uniform(rng, -limit, limit);
    };
    for (auto& layer : p.lstm) {
        glorot(layer.w_input);
        glorot(layer.w_hidden);
        layer.bias.setZero();
        const auto h = layer.width();
        layer.bias.middleRows(kForgetGate * h, h).setOnes();
    }
    glorot(p.dense_weight);
    p.dense_bias.setZero();
    glorot(p.output_weight);
    p.output_bias.setZero();
}

namespace detail {

inline Eigen::MatrixXd logistic(const Eigen::MatrixXd& z) {
    return (1.0 + (-z.array()).exp()).inverse().matrix();
}

/// Post-activation gates [i; f; o; g] for one timestep.
inline Eigen::MatrixXd gate_activations(const LstmLayer& layer, const Eigen::MatrixXd& x,
                                        const Eigen::MatrixXd& h_prev) {
    const auto h = layer.width();
    Eigen::MatrixXd z = layer.w_input * x + layer.w_hidden * h_prev;
    z.colwise() += layer.bias.col(0);
    Eigen::MatrixXd gates(z.rows(), z.cols());
    gates.topRows(3 * h) = logistic(z.topRows(3 * h));
    gates.bottomRows(h) = z.bottomRows(h).array().tanh().matrix();
    return gates;
}

} // namespace detail

struct CellState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

/// One LSTM timestep for a single sample.
inline CellState lstm_cell_step(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                                const Eigen::VectorXd& c_prev, const LstmLayer& layer) {
    const auto h = layer.width();
    if (x.size() != layer.input_width() || h_prev.size() != h || c_prev.size() != h ||
        layer.w_input.rows() != 4 * h || layer.bias.rows() != 4 * h)
        throw std::invalid_argument("lstm_cell_step: shape mismatch");
    Eigen::MatrixXd g = detail::gate_activations(layer, x, h_prev);
    CellState s;
    s.c = g.col(0).segment(kForgetGate * h, h).cwiseProduct(c_prev) +
          g.col(0).segment(kInputGate * h, h).cwiseProduct(g.col(0).segment(kCandidateGate * h, h));
    s.h = g.col(0).segment(kOutputGate * h, h).cwiseProduct(s.c.array().tanh().matrix());
    if (!s.c.allFinite() || !s.h.allFinite())
        throw NumericalError("lstm_cell_step: non-finite state (parameter blow-up)");
    return s;
}

/// Everything the backward pass needs from one batched forward pass.
struct ForwardTrace {
    struct Layer {
        std::vector<Eigen::MatrixXd> input;  // per t: in x B (after upstream dropout)
        std::vector<Eigen::MatrixXd> gates;  // per t: 4H x B
        std::vector<Eigen::MatrixXd> cell;   // per t: H x B
        std::vector<Eigen::MatrixXd> hidden; // per t: H x B (before dropout)
        std::vector<Eigen::MatrixXd> cell_tanh;
        std::vector<Eigen::MatrixXd> mask; // per t, inner layers with dropout only
    };
    std::vector<Layer> layers;
    Eigen::MatrixXd head_mask;  // H_last x B, empty without dropout
    Eigen::MatrixXd head_input; // final hidden state after dropout
    Eigen::MatrixXd dense_pre;
    Eigen::MatrixXd dense_out;
    Eigen::MatrixXd prediction; // 1 x B, in (0, 1)
};

namespace detail {

inline Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    const double keep = 1.0 / (1.0 - rate);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = uniform01(rng) < rate ? 0.0 : keep;
    return m;
}

} // namespace detail

/// Batched forward pass. `windows` is window x B (scaled closes). Dropout is
/// applied only when `rng` is non-null and `dropout_rate` > 0.
inline ForwardTrace forward_batch(const Parameters& params, const Eigen::MatrixXd& windows,
                                  double dropout_rate = 0.0, Rng* rng = nullptr) {
    if (params.lstm.empty() || params.lstm.front().input_width() != 1)
        throw std::invalid_argument("forward: first LSTM layer must take one feature");
    const Eigen::Index steps = windows.rows(), batch = windows.cols();
    const bool dropout = rng != nullptr && dropout_rate > 0;

    ForwardTrace tr;
    tr.layers.resize(params.lstm.size());
    std::vector<Eigen::MatrixXd> seq(static_cast<std::size_t>(steps));
    for (Eigen::Index t = 0; t < steps; ++t)
        seq[static_cast<std::size_t>(t)] = windows.row(t);

    for (std::size_t l = 0; l < params.lstm.size(); ++l) {
        const auto& layer = params.lstm[l];
        auto& lt = tr.layers[l];
        const auto h = layer.width();
        const bool last = l + 1 == params.lstm.size();
        Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(h, batch);
        Eigen::MatrixXd c_prev = Eigen::MatrixXd::Zero(h, batch);
        lt.input = std::move(seq);
        seq.assign(static_cast<std::size_t>(steps), {});
        for (Eigen::Index ti = 0; ti < steps; ++ti) {
            const auto t = static_cast<std::size_t>(ti);
            Eigen::MatrixXd g = detail::gate_activations(layer, lt.input[t], h_prev);
            Eigen::MatrixXd c = g.middleRows(kForgetGate * h, h).cwiseProduct(c_prev) +
                                g.middleRows(kInputGate * h, h).cwiseProduct(g.middleRows(kCandidateGate * h, h));
            Eigen::MatrixXd ct = c.array().tanh().matrix();
            Eigen::MatrixXd hid = g.middleRows(kOutputGate * h, h).cwiseProduct(ct);
            if (!last) {
                if (dropout) {
                    lt.mask.push_back(detail::dropout_mask(h, batch, dropout_rate, *rng));
                    seq[t] = hid.cwiseProduct(lt.mask.back());
                } else {
                    seq[t] = hid;
                }
            }
            lt.gates.push_back(std::move(g));
            lt.cell.push_back(c);
            lt.cell_tanh.push_back(std::move(ct));
            lt.hidden.push_back(hid);
            h_prev = std::move(hid);
            c_prev = std::move(c);
        }
    }

    const Eigen::MatrixXd& final_hidden = tr.layers.back().hidden.back();
    if (dropout) {
        tr.head_mask = detail::dropout_mask(final_hidden.rows(), batch, dropout_rate, *rng);
        tr.head_input = final_hidden.cwiseProduct(tr.head_mask);
    } else {
        tr.head_input = final_hidden;
    }
    tr.dense_pre = params.dense_weight * tr.head_input;
    tr.dense_pre.colwise() += params.dense_bias.col(0);
    tr.dense_out = tr.dense_pre.cwiseMax(0.0);
    Eigen::MatrixXd out = params.output_weight * tr.dense_out;
    out.array() += params.output_bias(0, 0);
    tr.prediction = detail::logistic(out);
    if (!tr.prediction.allFinite())
        throw NumericalError("forward: non-finite prediction (parameter blow-up)");
    return tr;
}

/// Single-window convenience wrapper; returns the scaled prediction.
inline double forward(const Parameters& params, const Eigen::VectorXd& window, bool training = false,
                      double dropout_rate = 0.0, Rng* rng = nullptr) {
    return forward_batch(params, Eigen::MatrixXd(window), dropout_rate, training ? rng : nullptr)
        .prediction(0, 0);
}

/// Backpropagation through time. `d_prediction` is dLoss/dPrediction (1 x B).
inline Parameters backward_batch(const Parameters& params, const ForwardTrace& tr,
                                 const Eigen::MatrixXd& d_prediction) {
    Parameters grad = params.zeros_like();
    const Eigen::MatrixXd& pred = tr.prediction;

    Eigen::MatrixXd d_out = d_prediction.cwiseProduct(pred.cwiseProduct((1.0 - pred.array()).matrix()));
    grad.output_weight = d_out * tr.dense_out.transpose();
    grad.output_bias(0, 0) = d_out.sum();
    Eigen::MatrixXd d_dense = params.output_weight.transpose() * d_out;
    d_dense = d_dense.cwiseProduct((tr.dense_pre.array() > 0).cast<double>().matrix());
    grad.dense_weight = d_dense * tr.head_input.transpose();
    grad.dense_bias = d_dense.rowwise().sum();
    Eigen::MatrixXd d_head = params.dense_weight.transpose() * d_dense;
    if (tr.head_mask.size() > 0)
        d_head = d_head.cwiseProduct(tr.head_mask);

    const auto n_layers = params.lstm.size();
    const auto steps = tr.layers.front().input.size();
    const Eigen::Index batch = pred.cols();

    // Gradient arriving at each timestep's hidden output from above.
    std::vector<Eigen::MatrixXd> d_hidden_ext(steps);
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& layer = params.lstm[l];
        const auto& lt = tr.layers[l];
        auto& lg = grad.lstm[l];
        const auto h = layer.width();
        std::vector<Eigen::MatrixXd> d_input(steps);

        Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(h, batch);
        Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(h, batch);
        Eigen::MatrixXd dz(4 * h, batch);
        for (std::size_t t = steps; t-- > 0;) {
            Eigen::MatrixXd dh = dh_next;
            if (l + 1 == n_layers) {
                if (t + 1 == steps)
                    dh += d_head;
            } else {
                dh += d_hidden_ext[t];
            }
            const Eigen::MatrixXd& g = lt.gates[t];
            const auto gi = g.middleRows(kInputGate * h, h).array();
            const auto gf = g.middleRows(kForgetGate * h, h).array();
            const auto go = g.middleRows(kOutputGate * h, h).array();
            const auto gg = g.middleRows(kCandidateGate * h, h).array();
            const auto ct = lt.cell_tanh[t].array();

            Eigen::ArrayXXd dc = dc_next.array() + dh.array() * go * (1.0 - ct.square());
            dz.middleRows(kInputGate * h, h) = (dc * gg * gi * (1.0 - gi)).matrix();
            if (t > 0)
                dz.middleRows(kForgetGate * h, h) = (dc * lt.cell[t - 1].array() * gf * (1.0 - gf)).matrix();
            else
                dz.middleRows(kForgetGate * h, h).setZero();
            dz.middleRows(kOutputGate * h, h) = (dh.array() * ct * go * (1.0 - go)).matrix();
            dz.middleRows(kCandidateGate * h, h) = (dc * gi * (1.0 - gg.square())).matrix();
            dc_next = (dc * gf).matrix();

            lg.w_input.noalias() += dz * lt.input[t].transpose();
            if (t > 0)
                lg.w_hidden.noalias() += dz * lt.hidden[t - 1].transpose();
            lg.bias += dz.rowwise().sum();
            if (l > 0)
                d_input[t].noalias() = layer.w_input.transpose() * dz;
            dh_next.noalias() = layer.w_hidden.transpose() * dz;
        }
        if (l > 0) {
            const auto& below = tr.layers[l - 1];
            for (std::size_t t = 0; t < steps; ++t)
                d_hidden_ext[t] = below.mask.empty() ? d_input[t] : d_input[t].cwiseProduct(below.mask[t]);
        }
    }
    return grad;
}

struct BatchLoss {
    double loss = 0; // mean Huber
    double mae = 0;
    Eigen::MatrixXd d_prediction; // 1 x B
};

inline BatchLoss huber_batch(const Eigen::MatrixXd& prediction, const Eigen::VectorXd& targets,
                             double delta) {
    const Eigen::Index b = prediction.cols();
    BatchLoss out;
    out.d_prediction.resize(1, b);
    for (Eigen::Index j = 0; j < b; ++j) {
        out.loss += huber_loss(targets(j), prediction(0, j), delta);
        out.mae += std::abs(targets(j) - prediction(0, j));
        out.d_prediction(0, j) = huber_gradient(targets(j), prediction(0, j), delta) / static_cast<double>(b);
    }
    out.loss /= static_cast<double>(b);
    out.mae /= static_cast<double>(b);
    return out;
}

struct GradientCheckOptions {
    double epsilon = 1e-5;
    double huber_delta = 1.0;
    /// Tensors larger than this are subsampled to this many coordinates (>= 100).
    std::size_t max_coords_per_tensor = 256;
    std::uint64_t seed = 0;
    /// Fault injection: scale the analytic gradient of this tensor.
    std::string faulty_tensor;
    double fault_scale = 1.0;
};

struct GradientCheckResult {
    double max_relative_error = 0;
    std::string worst_tensor;
    Eigen::Index worst_index = -1;
    std::size_t coordinates_checked = 0;
};

/// Analytic BPTT gradient vs central finite differences of the Huber loss on
/// one (window, target) sample, dropout off. Relative error per coordinate is
/// |a - n| / max(|a|, |n|, 1e-8).
inline GradientCheckResult gradient_check(const Parameters& params, const Eigen::VectorXd& window,
                                          double target, const GradientCheckOptions& options = {}) {
    const Eigen::MatrixXd x(window);
    Eigen::VectorXd y(1);
    y(0) = target;
    auto loss_at = [&](const Parameters& p) {
        return huber_batch(forward_batch(p, x).prediction, y, options.huber_delta).loss;
    };
    auto tr = forward_batch(params, x);
    Parameters analytic = backward_batch(params, tr, huber_batch(tr.prediction, y, options.huber_delta).d_prediction);
    if (!options.faulty_tensor.empty())
        analytic.tensor(options.faulty_tensor) *= options.fault_scale;

    Rng rng(derive_seed(options.seed, "gradient_check"));
    Parameters probe = params;
    GradientCheckResult result;
    const std::size_t cap = std::max<std::size_t>(options.max_coords_per_tensor, 100);
    params.for_each([&](const std::string& name, const Eigen::MatrixXd& tensor) {
        const auto n = static_cast<std::size_t>(tensor.size());
        std::vector<Eigen::Index> coords;
        if (n <= cap) {
            for (std::size_t k = 0; k < n; ++k)
                coords.push_back(static_cast<Eigen::Index>(k));
        } else {
            for (std::size_t k = 0; k < cap; ++k)
                coords.push_back(static_cast<Eigen::Index>(rng() % n));
        }
        Eigen::MatrixXd& slot = probe.tensor(name);
        const Eigen::MatrixXd& grad = analytic.tensor(name);
        for (auto k : coords) {
            const double saved = slot.data()[k];
            slot.data()[k] = saved + options.epsilon;
            const double up = loss_at(probe);
            slot.data()[k] = saved - options.epsilon;
            const double down = loss_at(probe);
            slot.data()[k] = saved;
            const double numeric = (up - down) / (2 * options.epsilon);
            const double a = grad.data()[k];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            ++result.coordinates_checked;
            if (rel > result.max_relative_error || result.worst_index < 0) {
                result.max_relative_error = rel;
                result.worst_tensor = name;
                result.worst_index = k;
            }
        }
    });
    return result;
}

} // namespace sectorfolio::forecast
