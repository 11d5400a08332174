#include "dcload/train.hpp"

#include "dcload/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace dcload {

std::string_view to_string(OptimizerKind kind) noexcept {
    return kind == OptimizerKind::adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "adam") return OptimizerKind::adam;
    if (lower == "sgd") return OptimizerKind::sgd;
    throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

void validate(const TrainConfig& c) {
    validate(c.hyper);
    if (c.batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (!(c.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (c.patience < 1) throw ConfigError("patience must be at least 1");
    if (c.max_epochs < 1) throw ConfigError("max epochs must be at least 1");
    if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (!(c.epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

double mse_loss(std::span<const double> prediction, std::span<const double> target) {
    if (prediction.size() != target.size()) {
        throw ShapeError("prediction and target lengths differ");
    }
    if (prediction.empty()) {
        throw ShapeError("empty prediction");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double e = target[i] - prediction[i];
        sum += e * e;
    }
    return sum / static_cast<double>(prediction.size());
}

AdamState AdamState::for_weights(const ModelWeights& w) {
    return {zeros_like(w), zeros_like(w), 0};
}

namespace {

// Calls f(param, grad) over matching tensors, checking shapes.
template <class F>
void zip_parameters(ModelWeights& a, const ModelWeights& b, F&& f) {
    std::vector<const Matrix*> other;
    b.for_each_parameter([&](const std::string&, const Matrix& m) { other.push_back(&m); });
    std::size_t i = 0;
    a.for_each_parameter([&](const std::string& name, Matrix& m) {
        if (i >= other.size() || !same_shape(m, *other[i])) {
            throw ShapeError("gradient tensor " + name + " does not match the weights");
        }
        f(m, *other[i]);
        ++i;
    });
    if (i != other.size()) throw ShapeError("gradient has extra tensors");
}

} // namespace

void adam_step(ModelWeights& weights, const ModelWeights& gradient, AdamState& state,
               const TrainConfig& config) {
    ++state.step;
    const double b1 = config.beta1;
    const double b2 = config.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    const double lr = config.learning_rate;

    // First and second moments are advanced in lockstep with the weights.
    std::vector<Matrix*> m1, m2;
    state.first_moment.for_each_parameter([&](const std::string&, Matrix& m) { m1.push_back(&m); });
    state.second_moment.for_each_parameter([&](const std::string&, Matrix& m) { m2.push_back(&m); });
    std::size_t k = 0;
    zip_parameters(weights, gradient, [&](Matrix& w, const Matrix& g) {
        if (k >= m1.size() || !same_shape(*m1[k], w) || !same_shape(*m2[k], w)) {
            throw ShapeError("Adam state does not match the weights");
        }
        double* m = m1[k]->data();
        double* v = m2[k]->data();
        double* wd = w.data();
        const double* gd = g.data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * gd[i];
            v[i] = b2 * v[i] + (1.0 - b2) * gd[i] * gd[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            wd[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
        ++k;
    });
}

void sgd_step(ModelWeights& weights, const ModelWeights& gradient, double learning_rate) {
    zip_parameters(weights, gradient, [&](Matrix& w, const Matrix& g) {
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] -= learning_rate * g.data()[i];
    });
}

double global_norm(const ModelWeights& gradient) {
    double sq = 0.0;
    gradient.for_each_parameter([&](const std::string&, const Matrix& m) {
        for (double v : m.values()) sq += v * v;
    });
    return std::sqrt(sq);
}

double clip_global_norm(ModelWeights& gradient, double max_norm) {
    const double norm = global_norm(gradient);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        gradient.for_each_parameter([&](const std::string&, Matrix& m) {
            for (double& v : m.values()) v *= scale;
        });
    }
    return norm;
}

namespace {

// Copies windows idx[first, first + n) into contiguous batch buffers.
void gather(const WindowedDataset& data, std::span<const std::size_t> idx, std::vector<double>& histories,
            std::vector<double>& targets) {
    const std::size_t h = data.lookback();
    const std::size_t p = data.horizon();
    histories.resize(idx.size() * h);
    targets.resize(idx.size() * p);
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const auto win = data.window(idx[b]);
        std::copy(win.history.begin(), win.history.end(), histories.begin() + static_cast<std::ptrdiff_t>(b * h));
        std::copy(win.target.begin(), win.target.end(), targets.begin() + static_cast<std::ptrdiff_t>(b * p));
    }
}

} // namespace

double mean_loss(const ModelWeights& w, const WindowedDataset& data, IndexRange range,
                 std::size_t batch_size, Network& net) {
    if (range.empty()) throw InsufficientDataError("cannot evaluate loss on an empty split");
    std::vector<std::size_t> idx(range.size());
    std::iota(idx.begin(), idx.end(), range.begin);
    std::vector<double> histories, targets, out;
    const std::size_t p = data.horizon();
    double total = 0.0;
    for (std::size_t first = 0; first < idx.size(); first += batch_size) {
        const std::size_t n = std::min(batch_size, idx.size() - first);
        gather(data, std::span<const std::size_t>(idx).subspan(first, n), histories, targets);
        out.resize(n * p);
        net.predict(w, histories.data(), n, out.data());
        for (std::size_t b = 0; b < n; ++b) {
            total += mse_loss(std::span<const double>(out).subspan(b * p, p),
                              std::span<const double>(targets).subspan(b * p, p));
        }
    }
    return total / static_cast<double>(idx.size());
}

TrainResult train(const TrainConfig& config, const WindowedDataset& data, const EpochCallback& on_epoch) {
    validate(config);
    if (config.hyper.lookback != data.lookback() || config.hyper.horizon != data.horizon()) {
        throw ConfigError("model lookback/horizon do not match the dataset windows");
    }
    const IndexRange train_range = split_range(data, Split::train);
    const IndexRange val_range = split_range(data, Split::val);
    if (train_range.empty() || val_range.empty() || split_range(data, Split::test).empty()) {
        throw InsufficientDataError("train, validation and test splits must all be non-empty");
    }

    TrainResult result;
    ModelWeights weights = init_weights(config.hyper, config.seed);
    ModelWeights gradient = zeros_like(weights);
    AdamState adam = AdamState::for_weights(weights);
    result.weights = weights;

    std::mt19937_64 shuffle_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
    std::vector<std::size_t> order(train_range.size());
    std::iota(order.begin(), order.end(), train_range.begin);

    Network net;
    std::vector<double> histories, targets;
    double best_val = 0.0;
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        for (std::size_t first = 0; first < order.size(); first += config.batch_size) {
            const std::size_t n = std::min(config.batch_size, order.size() - first);
            gather(data, std::span<const std::size_t>(order).subspan(first, n), histories, targets);
            gradient.for_each_parameter([](const std::string&, Matrix& m) { m.fill(0.0); });
            const double loss = net.loss_and_gradient(weights, histories.data(), targets.data(), n, gradient);
            if (!std::isfinite(loss)) {
                throw DivergenceError("non-finite training loss in epoch " + std::to_string(epoch));
            }
            epoch_loss += loss * static_cast<double>(n);
            clip_global_norm(gradient, config.clip_norm);
            if (config.optimizer == OptimizerKind::adam) {
                adam_step(weights, gradient, adam, config);
            } else {
                sgd_step(weights, gradient, config.learning_rate);
            }
        }
        epoch_loss /= static_cast<double>(order.size());
        const double val = mean_loss(weights, data, val_range, config.batch_size, net);
        if (!std::isfinite(val)) {
            throw DivergenceError("non-finite validation loss in epoch " + std::to_string(epoch));
        }
        result.history.train_loss.push_back(epoch_loss);
        result.history.val_loss.push_back(val);

        if (epoch == 1 || val < best_val) {
            best_val = val;
            result.history.best_index = epoch - 1;
            result.weights = weights;
            since_best = 0;
        } else {
            ++since_best;
        }
        if (on_epoch && !on_epoch(epoch, epoch_loss, val)) break;
        if (since_best >= config.patience) break;
    }
    return result;
}

} // namespace dcload
