#include "dcload/error.hpp"
#include "dcload/model.hpp"
#include "dcload/network.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dcload;

namespace {

double logistic(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 0.5) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Matrix m(r, c);
    for (double& v : m.values()) v = u(rng);
    return m;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

LstmWeights zero_lstm(std::size_t in, std::size_t h) {
    return {Matrix(4 * h, in), Matrix(4 * h, h), Matrix(1, 4 * h)};
}

// Row g*h + j of a stacked gate matrix times v.
double gate_dot(const Matrix& m, std::size_t row, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) s += m(row, k) * v[k];
    return s;
}

} // namespace

TEST_CASE("architecture names round-trip") {
    for (auto a : {Architecture::fc_lstm, Architecture::gru, Architecture::cnn1d}) {
        CHECK(parse_architecture(to_string(a)) == a);
    }
    CHECK(to_string(Architecture::fc_lstm) == "FC_LSTM");
    CHECK(to_string(Architecture::cnn1d) == "1D_CNN");
    CHECK(parse_architecture("lstm") == Architecture::fc_lstm);
    CHECK(parse_architecture("Cnn1d") == Architecture::cnn1d);
    CHECK_THROWS_AS(parse_architecture("transformer"), ConfigError);
}

TEST_CASE("default hyperparameters") {
    const auto lstm = default_hyper(Architecture::fc_lstm);
    CHECK(lstm.hidden_size == 64);
    CHECK(lstm.layers == 1);
    CHECK(lstm.lookback == 300);
    CHECK(lstm.horizon == 90);
    const auto cnn = default_hyper(Architecture::cnn1d);
    CHECK(cnn.hidden_size == 32);
    CHECK(cnn.layers == 2);
    CHECK(cnn.kernel_widths == std::vector<std::size_t>{5, 5});
    CHECK(conv_output_length(cnn) == 300 - 4 - 4);
    CHECK(head_input_size(cnn) == (300 - 8) * 32);
    CHECK(head_input_size(lstm) == 64);
}

TEST_CASE("validate rejects inconsistent hyperparameters") {
    auto h = default_hyper(Architecture::cnn1d, 12, 4);
    h.kernel_widths = {4, 5};
    CHECK_THROWS_AS(validate(h), ConfigError);
    h.kernel_widths = {5};
    CHECK_THROWS_AS(validate(h), ConfigError);
    h.kernel_widths = {7, 7};
    CHECK_THROWS_AS(validate(h), ConfigError);  // 12 - 6 - 6 leaves nothing
    auto r = default_hyper(Architecture::gru, 12, 4);
    r.hidden_size = 0;
    CHECK_THROWS_AS(validate(r), ConfigError);
    r = default_hyper(Architecture::gru, 0, 4);
    CHECK_THROWS_AS(validate(r), ConfigError);
}

TEST_CASE("init_weights: shapes, bound, biases, determinism") {
    for (auto arch : {Architecture::fc_lstm, Architecture::gru, Architecture::cnn1d}) {
        auto hyper = default_hyper(arch, 40, 6);
        hyper.hidden_size = 8;
        const auto w = init_weights(hyper, 99);
        CHECK_NOTHROW(check_shapes(w));
        CHECK(w.head.weights.rows() == 6);
        CHECK(w == init_weights(hyper, 99));
        CHECK_FALSE(w == init_weights(hyper, 100));

        std::size_t differing = 0, total = 0;
        const auto other = init_weights(hyper, 100);
        std::vector<const Matrix*> mine, theirs;
        w.for_each_parameter([&](const std::string&, const Matrix& m) { mine.push_back(&m); });
        other.for_each_parameter([&](const std::string&, const Matrix& m) { theirs.push_back(&m); });
        for (std::size_t t = 0; t < mine.size(); ++t) {
            for (std::size_t i = 0; i < mine[t]->size(); ++i) {
                ++total;
                differing += mine[t]->values()[i] != theirs[t]->values()[i];
            }
        }
        // Only the constant biases may coincide.
        std::size_t biases = w.head.bias.size();
        for (const auto& c : w.lstm) biases += c.bias.size();
        for (const auto& c : w.gru) biases += c.bias.size();
        for (const auto& c : w.conv) biases += c.bias.size();
        CHECK(differing == total - biases);
    }
}

TEST_CASE("init_weights: entries within the Glorot bound, forget bias one") {
    auto hyper = default_hyper(Architecture::fc_lstm, 20, 5);
    hyper.hidden_size = 6;
    const auto w = init_weights(hyper, 1);
    const double a_in = std::sqrt(6.0 / (1 + 6));
    const double a_rec = std::sqrt(6.0 / (6 + 6));
    const double a_head = std::sqrt(6.0 / (6 + 5));
    for (double v : w.lstm[0].input_weights.values()) CHECK(std::abs(v) <= a_in);
    for (double v : w.lstm[0].recurrent_weights.values()) CHECK(std::abs(v) <= a_rec);
    for (double v : w.head.weights.values()) CHECK(std::abs(v) <= a_head);
    for (double v : w.head.bias.values()) CHECK(v == 0.0);
    const auto forget = w.lstm[0].gate_bias(LstmGate::forget);
    for (double v : forget) CHECK(v == 1.0);
    for (auto g : {LstmGate::input, LstmGate::output, LstmGate::candidate}) {
        for (double v : w.lstm[0].gate_bias(g)) CHECK(v == 0.0);
    }

    auto cnn = default_hyper(Architecture::cnn1d, 20, 5);
    cnn.hidden_size = 4;
    const auto c = init_weights(cnn, 1);
    const double a0 = std::sqrt(6.0 / (1 * 5 + 4 * 5));
    const double a1 = std::sqrt(6.0 / (4 * 5 + 4 * 5));
    for (double v : c.conv[0].kernel.values()) CHECK(std::abs(v) <= a0);
    for (double v : c.conv[1].kernel.values()) CHECK(std::abs(v) <= a1);
}

TEST_CASE("check_shapes catches a wrong tensor") {
    auto w = init_weights(default_hyper(Architecture::gru, 10, 3), 1);
    w.gru[0].bias = Matrix(1, 5);
    CHECK_THROWS_AS(check_shapes(w), ShapeError);
}

TEST_CASE("lstm cell: zero weights") {
    const auto w = zero_lstm(1, 1);
    const std::vector<double> x{0.7};
    auto s = lstm_cell_forward(x, std::vector<double>{0.0}, std::vector<double>{0.0}, w);
    CHECK(s.cell[0] == 0.0);
    CHECK(s.hidden[0] == 0.0);
    s = lstm_cell_forward(x, std::vector<double>{0.0}, std::vector<double>{1.0}, w);
    CHECK(s.cell[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.hidden[0] == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-14));
    CHECK(s.hidden[0] == doctest::Approx(0.231).epsilon(1e-3));
}

TEST_CASE("lstm cell: unit weights against hand formulas") {
    LstmWeights w{Matrix(4, 1, 1.0), Matrix(4, 1, 1.0), Matrix(1, 4, 0.0)};
    const auto s = lstm_cell_forward(std::vector<double>{1.0}, std::vector<double>{0.0},
                                     std::vector<double>{0.0}, w);
    const double g = logistic(1.0);
    const double c = g * std::tanh(1.0);
    CHECK(std::abs(s.cell[0] - c) < 1e-12);
    CHECK(std::abs(s.hidden[0] - g * std::tanh(c)) < 1e-12);
}

TEST_CASE("lstm cell: random instance against a scripted oracle") {
    std::mt19937_64 rng(21);
    const std::size_t in = 3, h = 5;
    LstmWeights w{random_matrix(4 * h, in, rng), random_matrix(4 * h, h, rng), random_matrix(1, 4 * h, rng)};
    const auto x = random_vector(in, rng);
    const auto hp = random_vector(h, rng);
    const auto cp = random_vector(h, rng);
    const auto s = lstm_cell_forward(x, hp, cp, w);
    for (std::size_t j = 0; j < h; ++j) {
        auto pre = [&](LstmGate gate) {
            const std::size_t row = static_cast<std::size_t>(gate) * h + j;
            return gate_dot(w.input_weights, row, x) + gate_dot(w.recurrent_weights, row, hp) + w.bias(0, row);
        };
        const double i = logistic(pre(LstmGate::input));
        const double f = logistic(pre(LstmGate::forget));
        const double o = logistic(pre(LstmGate::output));
        const double cand = std::tanh(pre(LstmGate::candidate));
        const double c = f * cp[j] + i * cand;
        CHECK(std::abs(s.cell[j] - c) < 1e-12);
        CHECK(std::abs(s.hidden[j] - o * std::tanh(c)) < 1e-12);
    }
}

TEST_CASE("lstm cell state grows by at most one per step") {
    std::mt19937_64 rng(4);
    const std::size_t h = 6;
    LstmWeights w{random_matrix(4 * h, 1, rng, 3.0), random_matrix(4 * h, h, rng, 3.0),
                  random_matrix(1, 4 * h, rng, 3.0)};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    LstmState s{std::vector<double>(h, 0.0), std::vector<double>(h, 0.0)};
    for (int t = 0; t < 200; ++t) {
        const auto next = lstm_cell_forward(std::vector<double>{unit(rng)}, s.hidden, s.cell, w);
        for (std::size_t j = 0; j < h; ++j) CHECK(std::abs(next.cell[j]) <= std::abs(s.cell[j]) + 1.0);
        s = next;
    }
}

TEST_CASE("lstm cell rejects mismatched shapes") {
    const auto w = zero_lstm(2, 3);
    CHECK_THROWS_AS(lstm_cell_forward(std::vector<double>{1.0}, std::vector<double>(3), std::vector<double>(3), w),
                    ShapeError);
    CHECK_THROWS_AS(lstm_cell_forward(std::vector<double>(2), std::vector<double>(2), std::vector<double>(3), w),
                    ShapeError);
}

TEST_CASE("gru cell: zero weights halve the state") {
    GruWeights w{Matrix(6, 1), Matrix(6, 2), Matrix(1, 6)};
    const auto h = gru_cell_forward(std::vector<double>{0.3}, std::vector<double>{0.8, -2.0}, w);
    CHECK(h[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(h[1] == doctest::Approx(-1.0).epsilon(1e-15));
    const auto zero = gru_cell_forward(std::vector<double>{0.3}, std::vector<double>{0.0, 0.0}, w);
    CHECK(zero[0] == 0.0);
    CHECK(zero[1] == 0.0);
}

TEST_CASE("gru cell: random instance against a scripted oracle") {
    std::mt19937_64 rng(22);
    const std::size_t in = 2, h = 4;
    GruWeights w{random_matrix(3 * h, in, rng), random_matrix(3 * h, h, rng), random_matrix(1, 3 * h, rng)};
    const auto x = random_vector(in, rng);
    const auto hp = random_vector(h, rng);
    const auto out = gru_cell_forward(x, hp, w);
    std::vector<double> z(h), r(h), rh(h);
    for (std::size_t j = 0; j < h; ++j) {
        z[j] = logistic(gate_dot(w.input_weights, j, x) + gate_dot(w.recurrent_weights, j, hp) + w.bias(0, j));
        r[j] = logistic(gate_dot(w.input_weights, h + j, x) + gate_dot(w.recurrent_weights, h + j, hp) +
                        w.bias(0, h + j));
        rh[j] = r[j] * hp[j];
    }
    for (std::size_t j = 0; j < h; ++j) {
        const std::size_t row = 2 * h + j;
        const double n = std::tanh(gate_dot(w.input_weights, row, x) + gate_dot(w.recurrent_weights, row, rh) +
                                   w.bias(0, row));
        CHECK(std::abs(out[j] - ((1.0 - z[j]) * hp[j] + z[j] * n)) < 1e-12);
    }
}

TEST_CASE("conv layer: delta and averaging kernels") {
    Conv1dWeights delta{Matrix(1, 3, std::vector<double>{0, 1, 0}), Matrix(1, 1), 3};
    const Matrix x(4, 1, std::vector<double>{1, 2, 3, 4});
    const auto y = conv1d_layer_forward(x, delta);
    REQUIRE(y.rows() == 2);
    CHECK(y(0, 0) == 2.0);
    CHECK(y(1, 0) == 3.0);

    Conv1dWeights mean{Matrix(1, 3, 1.0 / 3.0), Matrix(1, 1), 3};
    const auto z = conv1d_layer_forward(Matrix(4, 1, 3.0), mean, false);
    REQUIRE(z.rows() == 2);
    CHECK(z(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(z(1, 0) == doctest::Approx(3.0).epsilon(1e-15));

    Conv1dWeights negate{Matrix(1, 1, -1.0), Matrix(1, 1), 1};
    const auto relu = conv1d_layer_forward(x, negate, true);
    for (double v : relu.values()) CHECK(v == 0.0);
}

TEST_CASE("conv layer: random instance against direct summation") {
    std::mt19937_64 rng(23);
    const std::size_t in = 3, out = 4, width = 5, len = 17;
    Conv1dWeights w{random_matrix(out, in * width, rng), random_matrix(1, out, rng), width};
    const Matrix x = random_matrix(len, in, rng, 2.0);
    const auto y = conv1d_layer_forward(x, w, false);
    const auto yr = conv1d_layer_forward(x, w, true);
    REQUIRE(y.rows() == len - width + 1);
    REQUIRE(y.cols() == out);
    for (std::size_t t = 0; t < y.rows(); ++t) {
        for (std::size_t o = 0; o < out; ++o) {
            double s = w.bias(0, o);
            for (std::size_t i = 0; i < in; ++i) {
                for (std::size_t k = 0; k < width; ++k) s += w.kernel(o, i * width + k) * x(t + k, i);
            }
            CHECK(std::abs(y(t, o) - s) < 1e-12);
            CHECK(yr(t, o) == std::max(0.0, y(t, o)));
        }
    }
}

TEST_CASE("conv stack shrinks by width - 1 per layer") {
    std::mt19937_64 rng(24);
    std::vector<Conv1dWeights> layers{{random_matrix(4, 1 * 3, rng), Matrix(1, 4), 3},
                                      {random_matrix(2, 4 * 5, rng), Matrix(1, 2), 5},
                                      {random_matrix(3, 2 * 1, rng), Matrix(1, 3), 1}};
    const auto y = conv1d_forward(random_matrix(30, 1, rng), layers);
    CHECK(y.rows() == 30 - 2 - 4 - 0);
    CHECK(y.cols() == 3);
    CHECK_THROWS_AS(conv1d_layer_forward(Matrix(2, 1), layers[0]), ShapeError);
    CHECK_THROWS_AS(conv1d_layer_forward(Matrix(10, 2), layers[0]), ShapeError);
}
