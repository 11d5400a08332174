#include "layers.hpp"

#include "kernels.hpp"

#include <algorithm>
#include <cmath>

namespace dcload::detail {

void lstm_forward(const LstmWeights& w, const double* x, std::size_t steps, std::size_t batch,
                  LstmCache& c, const double* h0, const double* c0) {
    const std::size_t h = w.hidden_size();
    const std::size_t in = w.input_size();
    const std::size_t g4 = 4 * h;
    c.steps = steps;
    c.batch = batch;
    c.hidden = h;
    c.gates.resize(steps * batch * g4);
    c.cell.resize(steps * batch * h);
    c.cell_tanh.resize(steps * batch * h);
    c.output.resize(steps * batch * h);
    c.input_t.resize(in * g4);
    c.recurrent_t.resize(h * g4);
    transpose(c.input_t.data(), w.input_weights.data(), g4, in);
    transpose(c.recurrent_t.data(), w.recurrent_weights.data(), g4, h);

    for (std::size_t t = 0; t < steps; ++t) {
        double* gates = c.gates.data() + t * batch * g4;
        const double* h_prev = t > 0 ? c.hidden_at(t - 1) : h0;
        const double* c_prev = t > 0 ? c.cell.data() + (t - 1) * batch * h : c0;
        broadcast_rows(gates, w.bias.data(), batch, g4);
        accumulate_product(gates, x + t * batch * in, c.input_t.data(), batch, in, g4);
        if (h_prev) {
            accumulate_product(gates, h_prev, c.recurrent_t.data(), batch, h, g4);
        }
        double* cell = c.cell.data() + t * batch * h;
        double* cell_tanh = c.cell_tanh.data() + t * batch * h;
        double* out = c.output.data() + t * batch * h;
        for (std::size_t b = 0; b < batch; ++b) {
            double* gi = gates + b * g4;
            sigmoid_inplace(gi, 3 * h);
            tanh_inplace(gi + 3 * h, h);
            const double* gf = gi + h;
            const double* gc = gi + 3 * h;
            double* cb = cell + b * h;
            if (c_prev) {
                const double* pb = c_prev + b * h;
                for (std::size_t j = 0; j < h; ++j) cb[j] = gf[j] * pb[j] + gi[j] * gc[j];
            } else {
                for (std::size_t j = 0; j < h; ++j) cb[j] = gi[j] * gc[j];
            }
        }
        tanh_into(cell_tanh, cell, batch * h);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* go = gates + b * g4 + 2 * h;
            for (std::size_t j = 0; j < h; ++j) out[b * h + j] = go[j] * cell_tanh[b * h + j];
        }
    }
}

void lstm_backward(const LstmWeights& w, const double* x, const LstmCache& c, double* d_output,
                   double* d_x, LstmWeights& grad) {
    const std::size_t h = c.hidden;
    const std::size_t in = w.input_size();
    const std::size_t g4 = 4 * h;
    const std::size_t batch = c.batch;

    std::vector<double> d_gates(batch * g4);
    std::vector<double> dh_next(batch * h, 0.0);
    std::vector<double> dc_next(batch * h, 0.0);

    for (std::size_t t = c.steps; t-- > 0;) {
        const double* gates = c.gates.data() + t * batch * g4;
        const double* cell_tanh = c.cell_tanh.data() + t * batch * h;
        const double* c_prev = t > 0 ? c.cell.data() + (t - 1) * batch * h : nullptr;
        double* dh = d_output + t * batch * h;
        for (std::size_t b = 0; b < batch; ++b) {
            const double* gi = gates + b * g4;
            const double* gf = gi + h;
            const double* go = gf + h;
            const double* gc = go + h;
            double* di = d_gates.data() + b * g4;
            double* df = di + h;
            double* dout = df + h;
            double* dcand = dout + h;
            for (std::size_t j = 0; j < h; ++j) {
                const std::size_t k = b * h + j;
                const double dhj = dh[k] + dh_next[k];
                const double tc = cell_tanh[k];
                const double dc = dc_next[k] + dhj * go[j] * (1.0 - tc * tc);
                const double prev = c_prev ? c_prev[k] : 0.0;
                dout[j] = dhj * tc * go[j] * (1.0 - go[j]);
                di[j] = dc * gc[j] * gi[j] * (1.0 - gi[j]);
                df[j] = dc * prev * gf[j] * (1.0 - gf[j]);
                dcand[j] = dc * gi[j] * (1.0 - gc[j] * gc[j]);
                dc_next[k] = dc * gf[j];
            }
        }
        const double* x_t = x + t * batch * in;
        accumulate_outer(grad.input_weights.data(), d_gates.data(), x_t, batch, g4, in);
        if (t > 0) {
            accumulate_outer(grad.recurrent_weights.data(), d_gates.data(), c.hidden_at(t - 1), batch,
                             g4, h);
        }
        accumulate_column_sums(grad.bias.data(), d_gates.data(), batch, g4);
        if (d_x) {
            accumulate_product(d_x + t * batch * in, d_gates.data(), w.input_weights.data(), batch, g4, in);
        }
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        if (t > 0) {
            accumulate_product(dh_next.data(), d_gates.data(), w.recurrent_weights.data(), batch, g4, h);
        }
    }
}

void gru_forward(const GruWeights& w, const double* x, std::size_t steps, std::size_t batch,
                 GruCache& c, const double* h0) {
    const std::size_t h = w.hidden_size();
    const std::size_t in = w.input_size();
    const std::size_t g3 = 3 * h;
    c.steps = steps;
    c.batch = batch;
    c.hidden = h;
    c.gates.resize(steps * batch * g3);
    c.reset_prev.resize(steps * batch * h);
    c.output.resize(steps * batch * h);
    c.input_t.resize(in * g3);
    c.gates_rt.resize(h * 2 * h);
    c.candidate_rt.resize(h * h);
    c.scratch.resize(batch * 2 * h);
    transpose(c.input_t.data(), w.input_weights.data(), g3, in);
    transpose(c.gates_rt.data(), w.recurrent_weights.data(), 2 * h, h);
    transpose(c.candidate_rt.data(), w.recurrent_weights.data() + 2 * h * h, h, h);

    std::vector<double> zero_state;
    if (!h0) {
        zero_state.assign(batch * h, 0.0);
        h0 = zero_state.data();
    }

    for (std::size_t t = 0; t < steps; ++t) {
        double* gates = c.gates.data() + t * batch * g3;
        const double* h_prev = t > 0 ? c.hidden_at(t - 1) : h0;
        double* reset_prev = c.reset_prev.data() + t * batch * h;
        double* out = c.output.data() + t * batch * h;

        broadcast_rows(gates, w.bias.data(), batch, g3);
        accumulate_product(gates, x + t * batch * in, c.input_t.data(), batch, in, g3);

        double* rec = c.scratch.data();  // batch x 2h
        std::fill(rec, rec + batch * 2 * h, 0.0);
        accumulate_product(rec, h_prev, c.gates_rt.data(), batch, h, 2 * h);
        for (std::size_t b = 0; b < batch; ++b) {
            double* gz = gates + b * g3;
            double* gr = gz + h;
            const double* rz = rec + b * 2 * h;
            const double* rr = rz + h;
            for (std::size_t j = 0; j < h; ++j) {
                gz[j] += rz[j];
                gr[j] += rr[j];
            }
            sigmoid_inplace(gz, 2 * h);
            for (std::size_t j = 0; j < h; ++j) reset_prev[b * h + j] = gr[j] * h_prev[b * h + j];
        }
        // Candidate pre-activation: input part already in the n block.
        accumulate_product(gates + 2 * h, g3, reset_prev, h, c.candidate_rt.data(), batch, h, h);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* gz = gates + b * g3;
            double* gn = gates + b * g3 + 2 * h;
            tanh_inplace(gn, h);
            for (std::size_t j = 0; j < h; ++j) {
                const double hp = h_prev[b * h + j];
                out[b * h + j] = (1.0 - gz[j]) * hp + gz[j] * gn[j];
            }
        }
    }
}

void gru_backward(const GruWeights& w, const double* x, const GruCache& c, double* d_output,
                  double* d_x, GruWeights& grad) {
    const std::size_t h = c.hidden;
    const std::size_t in = w.input_size();
    const std::size_t g3 = 3 * h;
    const std::size_t batch = c.batch;

    std::vector<double> d_zr(batch * 2 * h);
    std::vector<double> d_cand(batch * h);
    std::vector<double> d_reset_prev(batch * h);
    std::vector<double> dh_next(batch * h, 0.0);
    std::vector<double> zero_state(batch * h, 0.0);

    const double* w_zr = w.input_weights.data();
    const double* w_n = w.input_weights.data() + 2 * h * in;
    const double* u_zr = w.recurrent_weights.data();
    const double* u_n = w.recurrent_weights.data() + 2 * h * h;
    double* gw_zr = grad.input_weights.data();
    double* gw_n = grad.input_weights.data() + 2 * h * in;
    double* gu_zr = grad.recurrent_weights.data();
    double* gu_n = grad.recurrent_weights.data() + 2 * h * h;

    for (std::size_t t = c.steps; t-- > 0;) {
        const double* gates = c.gates.data() + t * batch * g3;
        const double* h_prev = t > 0 ? c.hidden_at(t - 1) : zero_state.data();
        const double* reset_prev = c.reset_prev.data() + t * batch * h;
        double* dh = d_output + t * batch * h;

        for (std::size_t b = 0; b < batch; ++b) {
            const double* gz = gates + b * g3;
            const double* gn = gz + 2 * h;
            double* dz = d_zr.data() + b * 2 * h;
            for (std::size_t j = 0; j < h; ++j) {
                const std::size_t k = b * h + j;
                const double dhj = dh[k] + dh_next[k];
                const double hp = h_prev[k];
                dz[j] = dhj * (gn[j] - hp) * gz[j] * (1.0 - gz[j]);
                d_cand[k] = dhj * gz[j] * (1.0 - gn[j] * gn[j]);
                dh_next[k] = dhj * (1.0 - gz[j]);
            }
        }
        std::fill(d_reset_prev.begin(), d_reset_prev.end(), 0.0);
        accumulate_product(d_reset_prev.data(), d_cand.data(), u_n, batch, h, h);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* gr = gates + b * g3 + h;
            double* dr = d_zr.data() + b * 2 * h + h;
            for (std::size_t j = 0; j < h; ++j) {
                const std::size_t k = b * h + j;
                dr[j] = d_reset_prev[k] * h_prev[k] * gr[j] * (1.0 - gr[j]);
                dh_next[k] += d_reset_prev[k] * gr[j];
            }
        }

        const double* x_t = x + t * batch * in;
        accumulate_outer(gw_zr, d_zr.data(), x_t, batch, 2 * h, in);
        accumulate_outer(gw_n, d_cand.data(), x_t, batch, h, in);
        accumulate_outer(gu_zr, d_zr.data(), h_prev, batch, 2 * h, h);
        accumulate_outer(gu_n, d_cand.data(), reset_prev, batch, h, h);
        accumulate_column_sums(grad.bias.data(), d_zr.data(), batch, 2 * h);
        accumulate_column_sums(grad.bias.data() + 2 * h, d_cand.data(), batch, h);

        if (d_x) {
            double* dx_t = d_x + t * batch * in;
            accumulate_product(dx_t, d_zr.data(), w_zr, batch, 2 * h, in);
            accumulate_product(dx_t, d_cand.data(), w_n, batch, h, in);
        }
        accumulate_product(dh_next.data(), d_zr.data(), u_zr, batch, 2 * h, h);
    }
}

} // namespace dcload::detail
