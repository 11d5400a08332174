#include "dcload/network.hpp"

#include "dcload/error.hpp"
#include "kernels.hpp"
#include "layers.hpp"

#include <algorithm>

namespace dcload {

namespace detail {

struct NetworkBuffers {
    std::vector<LstmCache> lstm;
    std::vector<GruCache> gru;
    std::vector<ConvCache> conv;
    std::vector<double> sequence;  // time-major copy of the histories
    std::vector<double> head_t;
    std::vector<double> output;
    std::vector<double> d_output;
    std::vector<double> d_features;
    std::vector<double> d_seq_a, d_seq_b;
};

} // namespace detail

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ShapeError(what);
}

// Returns the head input (batch x F) after running the encoder.
const double* encode(const ModelWeights& w, const double* histories, std::size_t batch,
                     detail::NetworkBuffers& buf) {
    const auto& hp = w.hyper;
    const std::size_t steps = hp.lookback;
    switch (hp.architecture) {
    case Architecture::fc_lstm:
    case Architecture::gru: {
        buf.sequence.resize(steps * batch);
        detail::transpose(buf.sequence.data(), histories, batch, steps);
        const double* input = buf.sequence.data();
        if (hp.architecture == Architecture::fc_lstm) {
            buf.lstm.resize(w.lstm.size());
            for (std::size_t l = 0; l < w.lstm.size(); ++l) {
                detail::lstm_forward(w.lstm[l], input, steps, batch, buf.lstm[l]);
                input = buf.lstm[l].output.data();
            }
            return buf.lstm.back().hidden_at(steps - 1);
        }
        buf.gru.resize(w.gru.size());
        for (std::size_t l = 0; l < w.gru.size(); ++l) {
            detail::gru_forward(w.gru[l], input, steps, batch, buf.gru[l]);
            input = buf.gru[l].output.data();
        }
        return buf.gru.back().hidden_at(steps - 1);
    }
    case Architecture::cnn1d: {
        buf.conv.resize(w.conv.size());
        const double* input = histories;
        std::size_t length = steps;
        for (std::size_t l = 0; l < w.conv.size(); ++l) {
            detail::conv_forward(w.conv[l], input, batch, length, buf.conv[l]);
            input = buf.conv[l].output.data();
            length = buf.conv[l].out_length;
        }
        return input;
    }
    }
    return nullptr;
}

void check_weights(const ModelWeights& w) {
    require(w.head.weights.rows() == w.hyper.horizon, "head output size differs from horizon");
    require(w.head.weights.cols() == head_input_size(w.hyper), "head input size differs from encoder");
}

} // namespace

Network::Network() : buf_(std::make_unique<detail::NetworkBuffers>()) {}
Network::~Network() = default;
Network::Network(Network&&) noexcept = default;
Network& Network::operator=(Network&&) noexcept = default;

void Network::predict(const ModelWeights& w, const double* histories, std::size_t batch, double* out) {
    check_weights(w);
    if (batch == 0) return;
    const double* features = encode(w, histories, batch, *buf_);
    const std::size_t f = w.head.weights.cols();
    const std::size_t p = w.hyper.horizon;
    buf_->head_t.resize(f * p);
    detail::transpose(buf_->head_t.data(), w.head.weights.data(), p, f);
    detail::broadcast_rows(out, w.head.bias.data(), batch, p);
    detail::accumulate_product(out, features, buf_->head_t.data(), batch, f, p);
}

Matrix Network::predict(const ModelWeights& w, const Matrix& histories) {
    require(histories.cols() == w.hyper.lookback, "history length differs from lookback");
    Matrix out(histories.rows(), w.hyper.horizon);
    predict(w, histories.data(), histories.rows(), out.data());
    return out;
}

double Network::loss_and_gradient(const ModelWeights& w, const double* histories, const double* targets,
                                  std::size_t batch, ModelWeights& grad) {
    require(batch > 0, "empty batch");
    auto& buf = *buf_;
    const std::size_t p = w.hyper.horizon;
    const std::size_t f = w.head.weights.cols();
    buf.output.resize(batch * p);
    predict(w, histories, batch, buf.output.data());
    const double* features = w.hyper.architecture == Architecture::cnn1d
                                 ? buf.conv.back().output.data()
                                 : (w.hyper.architecture == Architecture::fc_lstm
                                        ? buf.lstm.back().hidden_at(w.hyper.lookback - 1)
                                        : buf.gru.back().hidden_at(w.hyper.lookback - 1));

    // d(mean_b mean_j (y - t)^2) / dy = 2 (y - t) / (B P)
    buf.d_output.resize(batch * p);
    double loss = 0.0;
    const double scale = 2.0 / (static_cast<double>(batch) * static_cast<double>(p));
    for (std::size_t b = 0; b < batch; ++b) {
        double row = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double e = buf.output[b * p + j] - targets[b * p + j];
            row += e * e;
            buf.d_output[b * p + j] = scale * e;
        }
        loss += row / static_cast<double>(p);
    }
    loss /= static_cast<double>(batch);

    detail::accumulate_outer(grad.head.weights.data(), buf.d_output.data(), features, batch, p, f);
    detail::accumulate_column_sums(grad.head.bias.data(), buf.d_output.data(), batch, p);
    buf.d_features.assign(batch * f, 0.0);
    detail::accumulate_product(buf.d_features.data(), buf.d_output.data(), w.head.weights.data(), batch, p, f);

    const std::size_t steps = w.hyper.lookback;
    switch (w.hyper.architecture) {
    case Architecture::fc_lstm:
    case Architecture::gru: {
        const std::size_t h = w.hyper.hidden_size;
        const bool lstm = w.hyper.architecture == Architecture::fc_lstm;
        const std::size_t layers = lstm ? w.lstm.size() : w.gru.size();
        // Only the last hidden state of the top layer feeds the head.
        buf.d_seq_a.assign(steps * batch * h, 0.0);
        std::copy(buf.d_features.begin(), buf.d_features.end(),
                  buf.d_seq_a.begin() + static_cast<std::ptrdiff_t>((steps - 1) * batch * h));
        for (std::size_t l = layers; l-- > 0;) {
            const double* input = l == 0 ? buf.sequence.data()
                                         : (lstm ? buf.lstm[l - 1].output.data() : buf.gru[l - 1].output.data());
            double* d_input = nullptr;
            if (l > 0) {
                buf.d_seq_b.assign(steps * batch * h, 0.0);
                d_input = buf.d_seq_b.data();
            }
            if (lstm) {
                detail::lstm_backward(w.lstm[l], input, buf.lstm[l], buf.d_seq_a.data(), d_input, grad.lstm[l]);
            } else {
                detail::gru_backward(w.gru[l], input, buf.gru[l], buf.d_seq_a.data(), d_input, grad.gru[l]);
            }
            std::swap(buf.d_seq_a, buf.d_seq_b);
        }
        break;
    }
    case Architecture::cnn1d: {
        buf.d_seq_a = buf.d_features;
        for (std::size_t l = w.conv.size(); l-- > 0;) {
            const double* input = l == 0 ? histories : buf.conv[l - 1].output.data();
            double* d_input = nullptr;
            if (l > 0) {
                buf.d_seq_b.assign(batch * buf.conv[l].in_length * w.conv[l].in_channels(), 0.0);
                d_input = buf.d_seq_b.data();
            }
            detail::conv_backward(w.conv[l], input, buf.conv[l], buf.d_seq_a.data(), d_input, grad.conv[l]);
            std::swap(buf.d_seq_a, buf.d_seq_b);
        }
        break;
    }
    }
    return loss;
}

std::vector<double> forward(std::span<const double> history, const ModelWeights& w) {
    require(history.size() == w.hyper.lookback, "history length differs from lookback");
    Network net;
    std::vector<double> out(w.hyper.horizon);
    net.predict(w, history.data(), 1, out.data());
    return out;
}

GradientResult backward(std::span<const double> history, std::span<const double> target,
                        const ModelWeights& w) {
    require(history.size() == w.hyper.lookback, "history length differs from lookback");
    require(target.size() == w.hyper.horizon, "target length differs from horizon");
    GradientResult r;
    r.gradient = zeros_like(w);
    Network net;
    r.loss = net.loss_and_gradient(w, history.data(), target.data(), 1, r.gradient);
    return r;
}

LstmState lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                            std::span<const double> c_prev, const LstmWeights& w) {
    const std::size_t h = w.hidden_size();
    require(w.input_weights.rows() == 4 * h && w.recurrent_weights.rows() == 4 * h &&
                w.bias.size() == 4 * h,
            "LSTM weights are not stacked 4h tall");
    require(x.size() == w.input_size(), "LSTM input size mismatch");
    require(h_prev.size() == h && c_prev.size() == h, "LSTM state size mismatch");
    detail::LstmCache cache;
    detail::lstm_forward(w, x.data(), 1, 1, cache, h_prev.data(), c_prev.data());
    return {cache.output, cache.cell};
}

std::vector<double> gru_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                                     const GruWeights& w) {
    const std::size_t h = w.hidden_size();
    require(w.input_weights.rows() == 3 * h && w.recurrent_weights.rows() == 3 * h &&
                w.bias.size() == 3 * h,
            "GRU weights are not stacked 3h tall");
    require(x.size() == w.input_size(), "GRU input size mismatch");
    require(h_prev.size() == h, "GRU state size mismatch");
    detail::GruCache cache;
    detail::gru_forward(w, x.data(), 1, 1, cache, h_prev.data());
    return cache.output;
}

Matrix conv1d_layer_forward(const Matrix& x, const Conv1dWeights& w, bool relu) {
    require(w.kernel_width > 0 && w.kernel.cols() == w.in_channels() * w.kernel_width,
            "conv kernel shape inconsistent with its width");
    require(x.cols() == w.in_channels(), "conv input channel mismatch");
    require(w.bias.size() == w.out_channels(), "conv bias size mismatch");
    require(w.kernel_width <= x.rows(), "conv kernel wider than the sequence");
    detail::ConvCache cache;
    detail::conv_forward(w, x.data(), 1, x.rows(), cache, relu);
    return Matrix(cache.out_length, w.out_channels(), std::move(cache.output));
}

Matrix conv1d_forward(const Matrix& x, std::span<const Conv1dWeights> layers) {
    Matrix cur = x;
    for (const auto& layer : layers) {
        cur = conv1d_layer_forward(cur, layer, true);
    }
    return cur;
}

} // namespace dcload
