#pragma once

#include "dcload/matrix.hpp"
#include "dcload/model.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace dcload {

namespace detail {
struct NetworkBuffers;
}

struct LstmState {
    std::vector<double> hidden;
    std::vector<double> cell;
};

// One LSTM step: logistic gates i, f, o, tanh candidate,
// c = f*c_prev + i*c~, h = o*tanh(c).
LstmState lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                            std::span<const double> c_prev, const LstmWeights& w);

// One GRU step: z, r logistic; n = tanh(W_n x + U_n (r*h_prev) + b_n);
// h = (1 - z)*h_prev + z*n.
std::vector<double> gru_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                                     const GruWeights& w);

// Valid cross-correlation of a (length x in_channels) sequence, plus bias,
// optionally followed by ReLU. Result is (length - width + 1) x out_channels.
Matrix conv1d_layer_forward(const Matrix& x, const Conv1dWeights& w, bool relu = true);

// Stacked conv layers, each with ReLU.
Matrix conv1d_forward(const Matrix& x, std::span<const Conv1dWeights> layers);

// Batched forward/backward passes with buffers kept between calls. Not
// thread-safe; use one instance per thread.
class Network {
public:
    Network();
    ~Network();
    Network(Network&&) noexcept;
    Network& operator=(Network&&) noexcept;

    // histories: batch x lookback, out: batch x horizon (row-major).
    void predict(const ModelWeights& w, const double* histories, std::size_t batch, double* out);
    Matrix predict(const ModelWeights& w, const Matrix& histories);

    // Returns the batch mean of per-window MSE and adds its gradient into
    // grad (which must have the shapes of w).
    double loss_and_gradient(const ModelWeights& w, const double* histories, const double* targets,
                             std::size_t batch, ModelWeights& grad);

private:
    std::unique_ptr<detail::NetworkBuffers> buf_;
};

// Forecast of one window: P values in normalized units.
std::vector<double> forward(std::span<const double> history, const ModelWeights& w);

struct GradientResult {
    double loss = 0.0;
    ModelWeights gradient;
};

// MSE of one window and its exact gradient with respect to every parameter.
GradientResult backward(std::span<const double> history, std::span<const double> target,
                        const ModelWeights& w);

} // namespace dcload
