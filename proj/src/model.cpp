#include "dcload/model.hpp"

#include "dcload/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

namespace dcload {

std::string_view to_string(Architecture arch) noexcept {
    switch (arch) {
    case Architecture::fc_lstm: return "FC_LSTM";
    case Architecture::gru: return "GRU";
    case Architecture::cnn1d: return "1D_CNN";
    }
    return "?";
}

Architecture parse_architecture(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "fc_lstm" || lower == "lstm") return Architecture::fc_lstm;
    if (lower == "gru") return Architecture::gru;
    if (lower == "1d_cnn" || lower == "cnn1d" || lower == "cnn") return Architecture::cnn1d;
    throw ConfigError("unknown architecture '" + std::string(name) + "'");
}

ModelHyper default_hyper(Architecture arch, std::size_t lookback, std::size_t horizon) {
    ModelHyper h;
    h.architecture = arch;
    h.lookback = lookback;
    h.horizon = horizon;
    if (arch == Architecture::cnn1d) {
        h.hidden_size = 32;
        h.layers = 2;
        h.kernel_widths = {5, 5};
    }
    return h;
}

std::size_t conv_output_length(const ModelHyper& hyper) {
    std::size_t shrink = 0;
    for (auto k : hyper.kernel_widths) shrink += k - 1;
    return hyper.lookback > shrink ? hyper.lookback - shrink : 0;
}

void validate(const ModelHyper& h) {
    if (h.input_size == 0 || h.hidden_size == 0 || h.layers == 0) {
        throw ConfigError("input size, hidden size and layer count must be positive");
    }
    if (h.lookback == 0 || h.horizon == 0) {
        throw ConfigError("lookback and horizon must be positive");
    }
    if (h.architecture == Architecture::cnn1d) {
        if (h.kernel_widths.size() != h.layers) {
            throw ConfigError("need one kernel width per conv layer");
        }
        for (auto k : h.kernel_widths) {
            if (k == 0 || k % 2 == 0) {
                throw ConfigError("conv kernel widths must be odd");
            }
        }
        if (conv_output_length(h) == 0) {
            throw ConfigError("conv stack is wider than the lookback window");
        }
    }
}

std::size_t head_input_size(const ModelHyper& h) {
    if (h.architecture == Architecture::cnn1d) {
        return conv_output_length(h) * h.hidden_size;
    }
    return h.hidden_size;
}

namespace {

constexpr std::size_t gate_count(Architecture a) {
    return a == Architecture::fc_lstm ? 4 : 3;
}

template <class Cell>
Cell zero_cell(std::size_t gates, std::size_t in, std::size_t hidden) {
    return Cell{Matrix(gates * hidden, in), Matrix(gates * hidden, hidden), Matrix(1, gates * hidden)};
}

} // namespace

Matrix LstmWeights::gate_input(LstmGate g) const {
    const auto h = hidden_size();
    return input_weights.row_block(static_cast<std::size_t>(g) * h, h);
}

Matrix LstmWeights::gate_recurrent(LstmGate g) const {
    const auto h = hidden_size();
    return recurrent_weights.row_block(static_cast<std::size_t>(g) * h, h);
}

std::vector<double> LstmWeights::gate_bias(LstmGate g) const {
    const auto h = hidden_size();
    const auto first = bias.values().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(g) * h);
    return {first, first + static_cast<std::ptrdiff_t>(h)};
}

std::size_t ModelWeights::parameter_count() const {
    std::size_t n = 0;
    for_each_parameter([&](const std::string&, const Matrix& m) { n += m.size(); });
    return n;
}

ModelWeights zero_weights(const ModelHyper& hyper) {
    validate(hyper);
    ModelWeights w;
    w.hyper = hyper;
    const auto hidden = hyper.hidden_size;
    switch (hyper.architecture) {
    case Architecture::fc_lstm:
        for (std::size_t l = 0; l < hyper.layers; ++l) {
            w.lstm.push_back(zero_cell<LstmWeights>(4, l == 0 ? hyper.input_size : hidden, hidden));
        }
        break;
    case Architecture::gru:
        for (std::size_t l = 0; l < hyper.layers; ++l) {
            w.gru.push_back(zero_cell<GruWeights>(3, l == 0 ? hyper.input_size : hidden, hidden));
        }
        break;
    case Architecture::cnn1d:
        for (std::size_t l = 0; l < hyper.layers; ++l) {
            const auto in = l == 0 ? hyper.input_size : hidden;
            const auto k = hyper.kernel_widths[l];
            w.conv.push_back(Conv1dWeights{Matrix(hidden, in * k), Matrix(1, hidden), k});
        }
        break;
    }
    w.head.weights = Matrix(hyper.horizon, head_input_size(hyper));
    w.head.bias = Matrix(1, hyper.horizon);
    return w;
}

ModelWeights zeros_like(const ModelWeights& w) {
    ModelWeights z = w;
    z.for_each_parameter([](const std::string&, Matrix& m) { m.fill(0.0); });
    return z;
}

void check_shapes(const ModelWeights& w) {
    const ModelWeights expected = zero_weights(w.hyper);
    if (w.lstm.size() != expected.lstm.size() || w.gru.size() != expected.gru.size() ||
        w.conv.size() != expected.conv.size()) {
        throw ShapeError("layer count does not match hyperparameters");
    }
    std::vector<std::pair<std::string, const Matrix*>> want;
    expected.for_each_parameter([&](const std::string& name, const Matrix& m) { want.emplace_back(name, &m); });
    std::size_t i = 0;
    w.for_each_parameter([&](const std::string& name, const Matrix& m) {
        if (!same_shape(m, *want[i].second)) {
            throw ShapeError("tensor " + name + " is " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected " +
                             std::to_string(want[i].second->rows()) + "x" +
                             std::to_string(want[i].second->cols()));
        }
        ++i;
    });
    for (std::size_t l = 0; l < w.conv.size(); ++l) {
        if (w.conv[l].kernel_width != w.hyper.kernel_widths[l]) {
            throw ShapeError("conv" + std::to_string(l) + " kernel width disagrees with hyperparameters");
        }
    }
}

ModelWeights init_weights(const ModelHyper& hyper, std::uint64_t seed) {
    ModelWeights w = zero_weights(hyper);
    std::mt19937_64 rng(seed);

    auto glorot = [&](Matrix& m, double fan_in, double fan_out) {
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-a, a);
        for (double& v : m.values()) v = dist(rng);
    };

    const auto hidden = static_cast<double>(hyper.hidden_size);
    for (auto& cell : w.lstm) {
        glorot(cell.input_weights, static_cast<double>(cell.input_size()), hidden);
        glorot(cell.recurrent_weights, hidden, hidden);
        auto forget = cell.bias.values().subspan(static_cast<std::size_t>(LstmGate::forget) * hyper.hidden_size,
                                                 hyper.hidden_size);
        std::fill(forget.begin(), forget.end(), 1.0);
    }
    for (auto& cell : w.gru) {
        glorot(cell.input_weights, static_cast<double>(cell.input_size()), hidden);
        glorot(cell.recurrent_weights, hidden, hidden);
    }
    for (auto& layer : w.conv) {
        const auto k = static_cast<double>(layer.kernel_width);
        glorot(layer.kernel, static_cast<double>(layer.in_channels()) * k,
               static_cast<double>(layer.out_channels()) * k);
    }
    glorot(w.head.weights, static_cast<double>(w.head.weights.cols()),
           static_cast<double>(w.head.weights.rows()));
    return w;
}

} // namespace dcload
