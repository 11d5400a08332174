#include "run_config.hpp"

#include "dcload/error.hpp"

namespace dcload::cli {

ModelHyper RunConfig::model_hyper() const {
    ModelHyper h = default_hyper(parse_architecture(architecture), lookback, horizon);
    if (hidden_size) h.hidden_size = hidden_size;
    if (layers) h.layers = layers;
    if (!kernel_widths.empty()) h.kernel_widths = kernel_widths;
    if (h.architecture == Architecture::cnn1d && h.kernel_widths.size() == 1 && h.layers > 1) {
        h.kernel_widths.assign(h.layers, h.kernel_widths.front());
    }
    if (h.architecture != Architecture::cnn1d) h.kernel_widths.clear();
    validate(h);
    return h;
}

SplitRatios RunConfig::split_ratios() const {
    if (ratios.size() != 3) throw ConfigError("ratios needs three values: train,val,test");
    const SplitRatios r{ratios[0], ratios[1], ratios[2]};
    validate(r);
    return r;
}

namespace {

void add_range(CLI::App& cmd, const std::string& name, Range& r, const std::string& help) {
    cmd.add_option_function<std::vector<double>>(
           name,
           [&r, name](const std::vector<double>& v) {
               r.lo = v.at(0);
               r.hi = v.at(1);
           },
           help + " (lo,hi)")
        ->expected(2)
        ->delimiter(',');
}

} // namespace

void add_shared_options(CLI::App& app, RunConfig& cfg) {
    app.add_option("--lookback", cfg.lookback, "History window length H")->capture_default_str();
    app.add_option("--horizon", cfg.horizon, "Forecast horizon P")->capture_default_str();
    app.add_option("--ratios", cfg.ratios, "Train,val,test split ratios")
        ->expected(3)
        ->delimiter(',')
        ->capture_default_str();
    app.add_option_function<std::uint64_t>(
        "--seed",
        [&cfg](std::uint64_t s) {
            cfg.synth.seed = s;
            cfg.train.seed = s;
        },
        "Seed for trace generation, weight init and shuffling");
}

void add_synth_options(CLI::App& cmd, RunConfig& cfg) {
    auto& s = cfg.synth;
    cmd.add_option("--duration", s.duration, "Trace length in seconds")->capture_default_str();
    cmd.add_option("--base-load", s.base_load, "Idle facility load, W")->capture_default_str();
    cmd.add_option("--arrival-rate", s.arrival_rate, "Job arrivals per hour")->capture_default_str();
    add_range(cmd, "--job-power", s.job_power, "Job power, W");
    add_range(cmd, "--job-duration", s.job_duration, "Job duration, s");
    add_range(cmd, "--iteration-period", s.iteration_period, "Iteration period, s");
    cmd.add_option("--iteration-amplitude", s.iteration_amplitude, "Max fractional iteration dip")
        ->capture_default_str();
    cmd.add_option("--noise-std", s.noise_std, "Gaussian noise, W")->capture_default_str();
    cmd.add_option("--spike-probability", s.spike_probability, "Spike chance per second")
        ->capture_default_str();
    add_range(cmd, "--spike-magnitude", s.spike_magnitude, "Spike size, W");
    cmd.add_option("--peak-cap", s.peak_cap, "Clip level, W")->capture_default_str();
}

void add_model_options(CLI::App& cmd, RunConfig& cfg) {
    auto& t = cfg.train;
    cmd.add_option("--arch", cfg.architecture, "FC_LSTM, GRU or 1D_CNN")->capture_default_str();
    cmd.add_option("--hidden", cfg.hidden_size, "Recurrent units or conv channels");
    cmd.add_option("--layers", cfg.layers, "Recurrent or conv layer count");
    cmd.add_option("--kernel-widths", cfg.kernel_widths, "Conv kernel widths")->delimiter(',');
    cmd.add_option("--batch-size", t.batch_size)->capture_default_str();
    cmd.add_option("--learning-rate", t.learning_rate)->capture_default_str();
    cmd.add_option_function<std::string>(
        "--optimizer", [&t](const std::string& s) { t.optimizer = parse_optimizer(s); }, "adam or sgd");
    cmd.add_option("--beta1", t.beta1)->capture_default_str();
    cmd.add_option("--beta2", t.beta2)->capture_default_str();
    cmd.add_option("--epsilon", t.epsilon)->capture_default_str();
    cmd.add_option("--max-epochs", t.max_epochs)->capture_default_str();
    cmd.add_option("--patience", t.patience)->capture_default_str();
    cmd.add_option("--clip-norm", t.clip_norm, "Global gradient norm limit; <= 0 disables")
        ->capture_default_str();
}

} // namespace dcload::cli
