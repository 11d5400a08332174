#pragma once

// Batched layer passes used by the network. Recurrent sequences are laid
// out time-major (t, b, feature); conv activations batch-major (b, t, channel).

#include "dcload/model.hpp"

#include <cstddef>
#include <vector>

namespace dcload::detail {

struct LstmCache {
    std::size_t steps = 0;
    std::size_t batch = 0;
    std::size_t hidden = 0;
    std::vector<double> gates;      // activated i, f, o, c~ per step: steps x batch x 4h
    std::vector<double> cell;       // steps x batch x h
    std::vector<double> cell_tanh;  // steps x batch x h
    std::vector<double> output;     // hidden states, steps x batch x h
    // Scratch reused between calls.
    std::vector<double> input_t, recurrent_t;

    const double* hidden_at(std::size_t t) const { return output.data() + t * batch * hidden; }
};

// h0 / c0 (batch x h) default to zero.
void lstm_forward(const LstmWeights& w, const double* x, std::size_t steps, std::size_t batch,
                  LstmCache& cache, const double* h0 = nullptr, const double* c0 = nullptr);

// d_output holds dL/dh_t for every step (steps x batch x h) and is used as
// scratch. d_x, if given, must be zeroed (steps x batch x in) and receives
// dL/dx_t. Parameter gradients are added into grad. Assumes zero initial state.
void lstm_backward(const LstmWeights& w, const double* x, const LstmCache& cache,
                   double* d_output, double* d_x, LstmWeights& grad);

struct GruCache {
    std::size_t steps = 0;
    std::size_t batch = 0;
    std::size_t hidden = 0;
    std::vector<double> gates;       // activated z, r, n per step: steps x batch x 3h
    std::vector<double> reset_prev;  // r * h_{t-1}: steps x batch x h
    std::vector<double> output;      // steps x batch x h
    std::vector<double> input_t, gates_rt, candidate_rt, scratch;

    const double* hidden_at(std::size_t t) const { return output.data() + t * batch * hidden; }
};

void gru_forward(const GruWeights& w, const double* x, std::size_t steps, std::size_t batch,
                 GruCache& cache, const double* h0 = nullptr);

void gru_backward(const GruWeights& w, const double* x, const GruCache& cache, double* d_output,
                  double* d_x, GruWeights& grad);

struct ConvCache {
    std::size_t batch = 0;
    std::size_t in_length = 0;
    std::size_t out_length = 0;
    bool relu = true;
    std::vector<double> output;  // batch x out_length x out_channels, post-activation
    std::vector<double> kernel_p;  // (width * in) x out
};

// x is batch x in_length x in_channels.
void conv_forward(const Conv1dWeights& w, const double* x, std::size_t batch, std::size_t in_length,
                  ConvCache& cache, bool relu = true);

// d_output (batch x out_length x out) is masked in place by the ReLU. d_x,
// if given, must be zeroed.
void conv_backward(const Conv1dWeights& w, const double* x, const ConvCache& cache,
                   double* d_output, double* d_x, Conv1dWeights& grad);

} // namespace dcload::detail
