#pragma once

#include "dcload/model.hpp"
#include "dcload/preprocess.hpp"
#include "dcload/synth.hpp"
#include "dcload/train.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dcload::cli {

// Every knob of a run. Values come from defaults, then the --config file,
// then command-line flags.
struct RunConfig {
    SynthConfig synth;
    TrainConfig train;
    std::string architecture = "FC_LSTM";
    // 0 / empty means "architecture default".
    std::size_t hidden_size = 0;
    std::size_t layers = 0;
    std::vector<std::size_t> kernel_widths;

    std::size_t lookback = 300;
    std::size_t horizon = 90;
    std::vector<double> ratios{0.7, 0.15, 0.15};

    std::filesystem::path data;
    std::filesystem::path out;
    std::filesystem::path checkpoint;
    std::filesystem::path history;
    std::filesystem::path metrics;
    std::filesystem::path residuals;

    std::optional<long long> t_index;
    std::optional<double> range_start;
    std::optional<double> range_len;
    std::string zoom = "full";
    std::size_t horizon_step = 0;  // 1-based; 0 = last step

    ModelHyper model_hyper() const;
    SplitRatios split_ratios() const;
};

// Options shared by every subcommand, registered on the root app.
void add_shared_options(CLI::App& app, RunConfig& cfg);
void add_synth_options(CLI::App& cmd, RunConfig& cfg);
void add_model_options(CLI::App& cmd, RunConfig& cfg);

} // namespace dcload::cli
