#pragma once

#include "dcload/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dcload {

enum class Architecture { fc_lstm, gru, cnn1d };

// "FC_LSTM", "GRU", "1D_CNN"
std::string_view to_string(Architecture arch) noexcept;
// Accepts the canonical names plus lstm / gru / cnn / cnn1d, case-insensitive.
Architecture parse_architecture(std::string_view name);

struct ModelHyper {
    Architecture architecture = Architecture::fc_lstm;
    std::size_t input_size = 1;
    // Recurrent units per layer, or output channels per conv layer.
    std::size_t hidden_size = 64;
    std::size_t layers = 1;
    // Conv layers only: one odd width per layer.
    std::vector<std::size_t> kernel_widths;
    std::size_t lookback = 300;
    std::size_t horizon = 90;

    bool operator==(const ModelHyper&) const = default;
};

// LSTM: 64 units, 1 layer. CNN: 2 layers of 32 channels, width 5.
ModelHyper default_hyper(Architecture arch, std::size_t lookback = 300, std::size_t horizon = 90);

// Throws ConfigError on inconsistent hyperparameters.
void validate(const ModelHyper& hyper);

// Width of the vector fed to the dense head.
std::size_t head_input_size(const ModelHyper& hyper);

// Sequence length after the conv stack: lookback - sum(kernel_width - 1).
std::size_t conv_output_length(const ModelHyper& hyper);

enum class LstmGate { input = 0, forget = 1, output = 2, candidate = 3 };
enum class GruGate { update = 0, reset = 1, candidate = 2 };

// Gate blocks are stacked row-wise in the order of LstmGate:
// input_weights is 4h x in, recurrent_weights is 4h x h, bias is 1 x 4h.
struct LstmWeights {
    Matrix input_weights;
    Matrix recurrent_weights;
    Matrix bias;

    std::size_t hidden_size() const noexcept { return recurrent_weights.cols(); }
    std::size_t input_size() const noexcept { return input_weights.cols(); }

    Matrix gate_input(LstmGate g) const;      // W_g, h x in
    Matrix gate_recurrent(LstmGate g) const;  // U_g, h x h
    std::vector<double> gate_bias(LstmGate g) const;

    bool operator==(const LstmWeights&) const = default;
};

// Same layout with three blocks in GruGate order.
struct GruWeights {
    Matrix input_weights;
    Matrix recurrent_weights;
    Matrix bias;

    std::size_t hidden_size() const noexcept { return recurrent_weights.cols(); }
    std::size_t input_size() const noexcept { return input_weights.cols(); }

    bool operator==(const GruWeights&) const = default;
};

// One conv layer. kernel is out_channels x (in_channels * width), entry
// (o, i * width + k) being tap k of input channel i.
struct Conv1dWeights {
    Matrix kernel;
    Matrix bias;  // 1 x out_channels
    std::size_t kernel_width = 1;

    std::size_t out_channels() const noexcept { return kernel.rows(); }
    std::size_t in_channels() const noexcept { return kernel_width ? kernel.cols() / kernel_width : 0; }

    bool operator==(const Conv1dWeights&) const = default;
};

struct DenseWeights {
    Matrix weights;  // outputs x inputs
    Matrix bias;     // 1 x outputs

    bool operator==(const DenseWeights&) const = default;
};

// Complete parameter set of one forecaster. Exactly one of lstm / gru / conv
// is populated, matching hyper.architecture.
struct ModelWeights {
    ModelHyper hyper;
    std::vector<LstmWeights> lstm;
    std::vector<GruWeights> gru;
    std::vector<Conv1dWeights> conv;
    DenseWeights head;

    // Visits every tensor in a fixed order with a stable name such as
    // "lstm0.recurrent_weights" or "head.bias".
    template <class F>
    void for_each_parameter(F&& f) {
        visit_impl(*this, f);
    }
    template <class F>
    void for_each_parameter(F&& f) const {
        visit_impl(*this, f);
    }

    std::size_t parameter_count() const;

    bool operator==(const ModelWeights&) const = default;

private:
    template <class Self, class F>
    static void visit_impl(Self& self, F& f) {
        for (std::size_t l = 0; l < self.lstm.size(); ++l) {
            const std::string p = "lstm" + std::to_string(l) + ".";
            f(p + "input_weights", self.lstm[l].input_weights);
            f(p + "recurrent_weights", self.lstm[l].recurrent_weights);
            f(p + "bias", self.lstm[l].bias);
        }
        for (std::size_t l = 0; l < self.gru.size(); ++l) {
            const std::string p = "gru" + std::to_string(l) + ".";
            f(p + "input_weights", self.gru[l].input_weights);
            f(p + "recurrent_weights", self.gru[l].recurrent_weights);
            f(p + "bias", self.gru[l].bias);
        }
        for (std::size_t l = 0; l < self.conv.size(); ++l) {
            const std::string p = "conv" + std::to_string(l) + ".";
            f(p + "kernel", self.conv[l].kernel);
            f(p + "bias", self.conv[l].bias);
        }
        f(std::string("head.weights"), self.head.weights);
        f(std::string("head.bias"), self.head.bias);
    }
};

// All tensors allocated with the right shapes and filled with zeros.
ModelWeights zero_weights(const ModelHyper& hyper);
ModelWeights zeros_like(const ModelWeights& w);

// Throws ShapeError if any tensor disagrees with w.hyper.
void check_shapes(const ModelWeights& w);

// Glorot-uniform weights, U(-a, a) with a = sqrt(6 / (fan_in + fan_out))
// per gate matrix / kernel / head. Biases start at zero except the LSTM
// forget gate, which starts at 1. Tensors are drawn in for_each_parameter
// order from one mt19937_64 seeded with `seed`.
ModelWeights init_weights(const ModelHyper& hyper, std::uint64_t seed);

} // namespace dcload
