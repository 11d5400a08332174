#include "layers.hpp"

#include "kernels.hpp"

#include <algorithm>

namespace dcload::detail {

namespace {

// kernel (out x in*width, tap-minor) -> (width*in) x out, channel-minor, so a
// window of consecutive time steps is one contiguous row of the input.
void permute_kernel(std::vector<double>& dst, const Conv1dWeights& w) {
    const std::size_t out = w.out_channels();
    const std::size_t in = w.in_channels();
    const std::size_t width = w.kernel_width;
    dst.resize(width * in * out);
    for (std::size_t o = 0; o < out; ++o) {
        for (std::size_t i = 0; i < in; ++i) {
            for (std::size_t k = 0; k < width; ++k) {
                dst[(k * in + i) * out + o] = w.kernel(o, i * width + k);
            }
        }
    }
}

} // namespace

void conv_forward(const Conv1dWeights& w, const double* x, std::size_t batch, std::size_t in_length,
                  ConvCache& c, bool relu) {
    const std::size_t out = w.out_channels();
    const std::size_t in = w.in_channels();
    const std::size_t width = w.kernel_width;
    c.batch = batch;
    c.in_length = in_length;
    c.out_length = in_length - width + 1;
    c.relu = relu;
    c.output.resize(batch * c.out_length * out);
    permute_kernel(c.kernel_p, w);

    for (std::size_t b = 0; b < batch; ++b) {
        double* y = c.output.data() + b * c.out_length * out;
        broadcast_rows(y, w.bias.data(), c.out_length, out);
        accumulate_product(y, out, x + b * in_length * in, in, c.kernel_p.data(), c.out_length,
                           width * in, out);
    }
    if (relu) {
        for (double& v : c.output) v = v > 0.0 ? v : 0.0;
    }
}

void conv_backward(const Conv1dWeights& w, const double* x, const ConvCache& c, double* d_output,
                   double* d_x, Conv1dWeights& grad) {
    const std::size_t out = w.out_channels();
    const std::size_t in = w.in_channels();
    const std::size_t width = w.kernel_width;
    const std::size_t patch = width * in;
    const std::size_t total = c.batch * c.out_length * out;

    if (c.relu) {
        for (std::size_t i = 0; i < total; ++i) {
            if (!(c.output[i] > 0.0)) d_output[i] = 0.0;
        }
    }

    std::vector<double> d_kernel_p(patch * out, 0.0);
    for (std::size_t b = 0; b < c.batch; ++b) {
        accumulate_outer(d_kernel_p.data(), x + b * c.in_length * in, in,
                         d_output + b * c.out_length * out, out, c.out_length, patch, out);
    }
    for (std::size_t o = 0; o < out; ++o) {
        for (std::size_t i = 0; i < in; ++i) {
            for (std::size_t k = 0; k < width; ++k) {
                grad.kernel(o, i * width + k) += d_kernel_p[(k * in + i) * out + o];
            }
        }
    }
    accumulate_column_sums(grad.bias.data(), d_output, c.batch * c.out_length, out);

    if (d_x) {
        std::vector<double> kernel_pt(out * patch);
        transpose(kernel_pt.data(), c.kernel_p.data(), patch, out);
        for (std::size_t b = 0; b < c.batch; ++b) {
            accumulate_product(d_x + b * c.in_length * in, in, d_output + b * c.out_length * out, out,
                               kernel_pt.data(), c.out_length, out, patch);
        }
    }
}

} // namespace dcload::detail
