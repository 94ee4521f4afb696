#pragma once

#include "safs/dataset.hpp"
#include "safs/error.hpp"
#include "safs/matrix.hpp"
#include "safs/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace safs {

// One-hidden-layer classifier: sigmoid hidden units, softmax outputs.
//   hidden = sigmoid(W^T x + b_hidden)        W: inputs x hidden
//   probs  = softmax(V^T hidden + b_output)   V: hidden x outputs
struct NetworkParams {
    Matrix input_weights;   // H x N
    std::vector<double> hidden_bias;
    Matrix output_weights;  // N x K
    std::vector<double> output_bias;

    std::size_t inputs() const noexcept { return input_weights.rows(); }
    std::size_t hidden() const noexcept { return input_weights.cols(); }
    std::size_t outputs() const noexcept { return output_weights.cols(); }

    bool consistent() const noexcept {
        return hidden_bias.size() == hidden() && output_weights.rows() == hidden() &&
               output_bias.size() == outputs() && inputs() > 0 && hidden() > 0 && outputs() > 0;
    }

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

// Same layout as NetworkParams; holds dCE/dtheta for one sample.
using Gradient = NetworkParams;

struct TrainConfig {
    std::size_t hidden_units = 0;  // 0 selects max(8, 2H)
    double learning_rate = 0.1;
    std::size_t patience_epochs = 20;
    std::size_t max_epochs = 500;
    std::uint64_t seed = 0;

    std::size_t hidden_for(std::size_t inputs) const {
        return hidden_units ? hidden_units : std::max<std::size_t>(8, 2 * inputs);
    }

    void validate() const {
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            throw ConfigError("learning rate must be positive");
        if (max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
        if (patience_epochs == 0) throw ConfigError("patience_epochs must be at least 1");
        if (patience_epochs > max_epochs) throw ConfigError("patience_epochs must not exceed max_epochs");
    }
};

struct EpochLoss {
    double train_ce = 0.0;
    double validation_ce = 0.0;
};

struct TrainReport {
    NetworkParams best_params;
    double best_validation_ce = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    std::vector<EpochLoss> history;
};

struct Activations {
    std::vector<double> hidden;
    std::vector<double> probs;
};

inline constexpr double kProbabilityFloor = 1e-12;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Max-shifted softmax, in place.
inline void softmax(std::span<double> logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (auto& v : logits) {
        v = std::exp(v - top);
        sum += v;
    }
    for (auto& v : logits) v /= sum;
}

// Every weight and bias drawn uniform on [-1, 1] from one seeded stream.
inline NetworkParams init_params(std::size_t H, std::size_t N, std::size_t K, std::uint64_t seed) {
    if (H == 0 || N == 0 || K == 0) throw ConfigError("network dimensions must be positive");
    Rng rng(seed);
    NetworkParams p{Matrix(H, N), std::vector<double>(N), Matrix(N, K), std::vector<double>(K)};
    for (auto& w : p.input_weights.values()) w = rng.uniform(-1.0, 1.0);
    for (auto& b : p.hidden_bias) b = rng.uniform(-1.0, 1.0);
    for (auto& w : p.output_weights.values()) w = rng.uniform(-1.0, 1.0);
    for (auto& b : p.output_bias) b = rng.uniform(-1.0, 1.0);
    return p;
}

// Buffer-reusing forward pass; hidden and probs must be sized N and K.
inline void forward_into(const NetworkParams& p, std::span<const double> x, std::span<double> hidden,
                         std::span<double> probs) {
    const std::size_t H = p.inputs(), N = p.hidden(), K = p.outputs();
    std::copy(p.hidden_bias.begin(), p.hidden_bias.end(), hidden.begin());
    for (std::size_t h = 0; h < H; ++h) {
        const double xh = x[h];
        const auto w = p.input_weights.row(h);
        for (std::size_t j = 0; j < N; ++j) hidden[j] += w[j] * xh;
    }
    for (std::size_t j = 0; j < N; ++j) hidden[j] = sigmoid(hidden[j]);

    std::copy(p.output_bias.begin(), p.output_bias.end(), probs.begin());
    for (std::size_t j = 0; j < N; ++j) {
        const double a = hidden[j];
        const auto v = p.output_weights.row(j);
        for (std::size_t k = 0; k < K; ++k) probs[k] += v[k] * a;
    }
    softmax(probs);
}

inline Activations forward(const NetworkParams& p, std::span<const double> x) {
    if (x.size() != p.inputs())
        throw ConfigError("input has " + std::to_string(x.size()) + " features, network expects " +
                          std::to_string(p.inputs()));
    Activations a{std::vector<double>(p.hidden()), std::vector<double>(p.outputs())};
    forward_into(p, x, a.hidden, a.probs);
    return a;
}

// -log(probs[label]) with the probability floored at 1e-12.
inline double cross_entropy(std::span<const double> probs, ClassIndex label) {
    return -std::log(std::max(probs[label], kProbabilityFloor));
}

// Mean cross-entropy over a dataset.
inline double mean_cross_entropy(const NetworkParams& p, const Dataset& ds) {
    std::vector<double> hidden(p.hidden()), probs(p.outputs());
    double total = 0.0;
    for (std::size_t i = 0; i < ds.samples(); ++i) {
        forward_into(p, ds.features.row(i), hidden, probs);
        total += cross_entropy(probs, ds.labels[i]);
    }
    return ds.samples() ? total / static_cast<double>(ds.samples()) : 0.0;
}

// Backpropagation of the per-sample cross-entropy. With softmax outputs the
// output-layer delta is probs - onehot(label).
inline Gradient backward(const NetworkParams& p, std::span<const double> x, ClassIndex label) {
    const std::size_t H = p.inputs(), N = p.hidden(), K = p.outputs();
    const auto act = forward(p, x);

    Gradient g{Matrix(H, N), std::vector<double>(N), Matrix(N, K), std::vector<double>(K)};
    g.output_bias = act.probs;
    g.output_bias[label] -= 1.0;

    for (std::size_t j = 0; j < N; ++j) {
        double back = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            g.output_weights(j, k) = act.hidden[j] * g.output_bias[k];
            back += p.output_weights(j, k) * g.output_bias[k];
        }
        g.hidden_bias[j] = back * act.hidden[j] * (1.0 - act.hidden[j]);
    }
    for (std::size_t h = 0; h < H; ++h)
        for (std::size_t j = 0; j < N; ++j) g.input_weights(h, j) = x[h] * g.hidden_bias[j];
    return g;
}

namespace detail {

// Scratch space for one SGD step.
struct SgdWorkspace {
    std::vector<double> hidden, probs, hidden_delta;
    explicit SgdWorkspace(const NetworkParams& p)
        : hidden(p.hidden()), probs(p.outputs()), hidden_delta(p.hidden()) {}
};

} // namespace detail

// theta <- theta - lr * backward(theta, x, label), fused to avoid allocating a
// Gradient. Returns the sample's loss before the update.
inline double sgd_step(NetworkParams& p, std::span<const double> x, ClassIndex label, double learning_rate,
                       detail::SgdWorkspace& ws) {
    const std::size_t H = p.inputs(), N = p.hidden(), K = p.outputs();
    forward_into(p, x, ws.hidden, ws.probs);
    const double loss = cross_entropy(ws.probs, label);

    auto& delta = ws.probs;  // output delta, reuses the probability buffer
    delta[label] -= 1.0;

    for (std::size_t j = 0; j < N; ++j) {
        const auto v = p.output_weights.row(j);
        double back = 0.0;
        for (std::size_t k = 0; k < K; ++k) back += v[k] * delta[k];
        ws.hidden_delta[j] = back * ws.hidden[j] * (1.0 - ws.hidden[j]);
        const double a = ws.hidden[j];
        for (std::size_t k = 0; k < K; ++k) v[k] -= learning_rate * (a * delta[k]);
    }
    for (std::size_t k = 0; k < K; ++k) p.output_bias[k] -= learning_rate * delta[k];
    for (std::size_t h = 0; h < H; ++h) {
        const double xh = x[h];
        const auto w = p.input_weights.row(h);
        for (std::size_t j = 0; j < N; ++j) w[j] -= learning_rate * (xh * ws.hidden_delta[j]);
    }
    for (std::size_t j = 0; j < N; ++j) p.hidden_bias[j] -= learning_rate * ws.hidden_delta[j];
    return loss;
}

// Per-sample SGD with a reshuffle every epoch. The parameters with the lowest
// validation CE are kept; training stops after `patience_epochs` epochs
// without a strict improvement, or at `max_epochs`.
inline TrainReport train(const SplitDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    const auto& tr = data.train;
    const auto& va = data.validation;
    if (tr.samples() == 0 || va.samples() == 0) throw ConfigError("training and validation parts must be nonempty");

    const std::size_t H = tr.num_features();
    const std::size_t K = tr.num_classes();
    Rng rng(cfg.seed);
    NetworkParams params = init_params(H, cfg.hidden_for(H), K, rng.next());
    detail::SgdWorkspace ws(params);

    std::vector<std::size_t> order(tr.samples());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainReport report;
    std::size_t stale = 0;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double loss = 0.0;
        for (auto i : order) loss += sgd_step(params, tr.features.row(i), tr.labels[i], cfg.learning_rate, ws);
        const EpochLoss e{loss / static_cast<double>(order.size()), mean_cross_entropy(params, va)};
        report.history.push_back(e);
        report.epochs_run = epoch;
        if (!std::isfinite(e.train_ce) || !std::isfinite(e.validation_ce))
            throw TrainingError("training diverged at epoch " + std::to_string(epoch) +
                                " (non-finite cross-entropy); try a smaller learning rate");

        if (e.validation_ce < report.best_validation_ce) {
            report.best_validation_ce = e.validation_ce;
            report.best_params = params;
            report.best_epoch = epoch;
            stale = 0;
        } else if (++stale >= cfg.patience_epochs) {
            break;
        }
    }
    return report;
}

// Index of the largest probability; the lowest index wins ties.
inline ClassIndex predict(const NetworkParams& p, std::span<const double> x) {
    const auto a = forward(p, x);
    return static_cast<ClassIndex>(std::max_element(a.probs.begin(), a.probs.end()) - a.probs.begin());
}

inline double accuracy(const NetworkParams& p, const Dataset& ds) {
    if (ds.samples() == 0) return 0.0;
    std::vector<double> hidden(p.hidden()), probs(p.outputs());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ds.samples(); ++i) {
        forward_into(p, ds.features.row(i), hidden, probs);
        const auto best = static_cast<ClassIndex>(std::max_element(probs.begin(), probs.end()) - probs.begin());
        hits += best == ds.labels[i];
    }
    return static_cast<double>(hits) / static_cast<double>(ds.samples());
}

} // namespace safs
