#include "cli_app.hpp"

#include "run_config.hpp"

#include "dcload/checkpoint.hpp"
#include "dcload/error.hpp"
#include "dcload/eval.hpp"
#include "dcload/network.hpp"
#include "dcload/series_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace dcload::cli {
namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    return f;
}

void require_path(const std::filesystem::path& p, const char* flag) {
    if (p.empty()) throw ConfigError(std::string(flag) + " is required");
}

std::filesystem::path history_path(const RunConfig& cfg) {
    if (!cfg.history.empty()) return cfg.history;
    auto p = cfg.checkpoint;
    p.replace_extension(".history.csv");
    return p;
}

// Rejects --lookback/--horizon values that disagree with a checkpoint.
void check_window_flags(const CLI::App& app, const RunConfig& cfg, const ModelHyper& hyper) {
    if (app.count("--lookback") && cfg.lookback != hyper.lookback) {
        throw ConfigError("--lookback " + std::to_string(cfg.lookback) + " differs from checkpoint value " +
                          std::to_string(hyper.lookback));
    }
    if (app.count("--horizon") && cfg.horizon != hyper.horizon) {
        throw ConfigError("--horizon " + std::to_string(cfg.horizon) + " differs from checkpoint value " +
                          std::to_string(hyper.horizon));
    }
}

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
    require_path(cfg.out, "--out");
    validate(cfg.synth);
    const TimeSeries ts = generate(cfg.synth);
    {
        auto f = open_output(cfg.out);
        write_series_csv(f, ts);
        if (!f.flush()) throw Error("write to " + cfg.out.string() + " failed");
    }
    const auto [lo, hi] = std::minmax_element(ts.values.begin(), ts.values.end());
    out << "samples " << ts.size() << "\nmin_w " << *lo << "\nmax_w " << *hi << '\n';
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
    require_path(cfg.data, "--data");
    require_path(cfg.checkpoint, "--checkpoint");
    TrainConfig tc = cfg.train;
    tc.hyper = cfg.model_hyper();
    validate(tc);
    const SplitRatios ratios = cfg.split_ratios();

    const TimeSeries raw = load_series_file(cfg.data);
    const PreparedData prep = prepare(raw, cfg.lookback, cfg.horizon, ratios);
    const TrainResult result = train(tc, prep.dataset);

    save_checkpoint(result.weights, prep.scaler, tc, cfg.checkpoint);
    const auto hist_path = history_path(cfg);
    {
        auto f = open_output(hist_path);
        f << "epoch,train_loss,val_loss\n";
        for (std::size_t e = 0; e < result.history.epochs(); ++e) {
            f << e + 1 << ',' << nlohmann::json(result.history.train_loss[e]).dump() << ','
              << nlohmann::json(result.history.val_loss[e]).dump() << '\n';
        }
        if (!f.flush()) throw Error("write to " + hist_path.string() + " failed");
    }
    const auto& h = result.history;
    out << "epochs " << h.epochs() << "\nbest_epoch " << h.best_index + 1 << "\nbest_val_loss "
        << nlohmann::json(h.val_loss[h.best_index]).dump() << '\n';
}

void cmd_predict(const CLI::App& app, const RunConfig& cfg, std::ostream& out) {
    require_path(cfg.checkpoint, "--checkpoint");
    require_path(cfg.data, "--data");
    if (!cfg.t_index) throw ConfigError("--t-index is required");
    const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
    const ModelHyper& hyper = ckpt.weights.hyper;
    check_window_flags(app, cfg, hyper);

    const TimeSeries raw = load_series_file(cfg.data);
    const long long t = *cfg.t_index;
    const auto n = static_cast<long long>(raw.size());
    const auto h = static_cast<long long>(hyper.lookback);
    if (t < 0 || t >= n) {
        throw InsufficientDataError("t-index " + std::to_string(t) + " outside series of " + std::to_string(n) +
                                    " samples");
    }
    if (t + 1 < h) {
        throw InsufficientDataError("t-index " + std::to_string(t) + " has only " + std::to_string(t + 1) +
                                    " samples of history, need " + std::to_string(h));
    }
    std::vector<double> history(static_cast<std::size_t>(h));
    for (long long i = 0; i < h; ++i) {
        history[static_cast<std::size_t>(i)] =
            scale_value(raw.values[static_cast<std::size_t>(t - h + 1 + i)], ckpt.scaler);
    }
    const std::vector<double> forecast = forward(history, ckpt.weights);

    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t j = 0; j < forecast.size(); ++j) {
        const double w = std::max(0.0, unscale_value(forecast[j], ckpt.scaler));
        arr.push_back({{"t_seconds", raw.time_at(static_cast<std::size_t>(t) + 1 + j)}, {"watts", w}});
    }
    out << arr.dump(2) << '\n';
}

struct LoadedEvaluation {
    Checkpoint ckpt;
    PreparedData prep;
    Evaluation eval;
};

LoadedEvaluation load_and_evaluate(const CLI::App& app, const RunConfig& cfg) {
    require_path(cfg.checkpoint, "--checkpoint");
    require_path(cfg.data, "--data");
    const SplitRatios ratios = cfg.split_ratios();
    LoadedEvaluation le;
    le.ckpt = load_checkpoint(cfg.checkpoint);
    const ModelHyper& hyper = le.ckpt.weights.hyper;
    check_window_flags(app, cfg, hyper);
    const TimeSeries raw = load_series_file(cfg.data);
    le.prep = prepare_with_scaler(raw, le.ckpt.scaler, hyper.lookback, hyper.horizon, ratios);
    le.eval = evaluate_model(le.ckpt.weights, le.ckpt.scaler, le.prep.dataset, Split::test);
    return le;
}

void cmd_evaluate(const CLI::App& app, const RunConfig& cfg, std::ostream& out) {
    const LoadedEvaluation le = load_and_evaluate(app, cfg);
    const std::string json = metrics_to_json(le.eval.metrics);
    if (cfg.metrics.empty()) {
        out << json;
    } else {
        auto f = open_output(cfg.metrics);
        f << json;
        if (!f.flush()) throw Error("write to " + cfg.metrics.string() + " failed");
        out << "metrics written to " << cfg.metrics.string() << '\n';
    }
    if (!cfg.residuals.empty()) {
        auto f = open_output(cfg.residuals);
        write_residuals_csv(f, le.eval.residuals);
        if (!f.flush()) throw Error("write to " + cfg.residuals.string() + " failed");
    }
}

double zoom_seconds(const std::string& zoom) {
    if (zoom == "full") return 0.0;
    if (zoom == "1m") return 60.0;
    if (zoom == "10m") return 600.0;
    if (zoom == "1h") return 3600.0;
    throw ConfigError("--zoom must be one of full, 1m, 10m, 1h (got '" + zoom + "')");
}

void cmd_export_plot(const CLI::App& app, const RunConfig& cfg, std::ostream& out) {
    require_path(cfg.out, "--out");
    const double zoom_len = zoom_seconds(cfg.zoom);
    if (cfg.range_len && !(*cfg.range_len > 0.0)) throw ConfigError("--range-len must be positive");

    const LoadedEvaluation le = load_and_evaluate(app, cfg);
    const std::size_t p = le.ckpt.weights.hyper.horizon;
    const std::size_t step = cfg.horizon_step == 0 ? p : cfg.horizon_step;
    if (step > p) throw ConfigError("--horizon-step must be in 1.." + std::to_string(p));
    const ResidualSeries trace = horizon_trace(le.eval, le.prep.dataset, step - 1);

    const double first = trace.front().t_seconds;
    const double last = trace.back().t_seconds;
    const double begin = cfg.range_start.value_or(first);
    if (begin < first || begin > last) {
        throw InsufficientDataError("range start " + nlohmann::json(begin).dump() + " outside test trace [" +
                                    nlohmann::json(first).dump() + ", " + nlohmann::json(last).dump() + "]");
    }
    const double len = cfg.range_len.value_or(zoom_len);
    ResidualSeries rows;
    for (const auto& pt : trace) {
        if (pt.t_seconds < begin) continue;
        if (len > 0.0 && pt.t_seconds >= begin + len) break;
        rows.push_back(pt);
    }
    auto f = open_output(cfg.out);
    write_residuals_csv(f, rows);
    if (!f.flush()) throw Error("write to " + cfg.out.string() + " failed");
    out << "rows " << rows.size() << '\n';
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"GPU data-center power forecasting"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI-style run configuration; flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    add_shared_options(app, cfg);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic facility load trace");
    add_synth_options(*synth, cfg);
    synth->add_option("--out", cfg.out, "Output CSV");

    auto* train_cmd = app.add_subcommand("train", "Train a forecaster on a load trace");
    add_model_options(*train_cmd, cfg);
    train_cmd->add_option("--data", cfg.data, "Trace CSV or raw power log");
    train_cmd->add_option("--checkpoint", cfg.checkpoint, "Checkpoint JSON to write");
    train_cmd->add_option("--history", cfg.history, "History CSV (default: next to the checkpoint)");

    auto* predict = app.add_subcommand("predict", "Forecast the next horizon from one point in a trace");
    predict->add_option("--checkpoint", cfg.checkpoint);
    predict->add_option("--data", cfg.data);
    predict->add_option("--t-index", cfg.t_index, "Index of the last history sample");

    auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on the test split");
    evaluate->add_option("--checkpoint", cfg.checkpoint);
    evaluate->add_option("--data", cfg.data);
    evaluate->add_option("--metrics", cfg.metrics, "Metrics JSON (default: stdout)");
    evaluate->add_option("--residuals", cfg.residuals, "Final-horizon-step residual CSV");

    auto* plot = app.add_subcommand("export-plot", "Write actual/predicted rows for a time range");
    plot->add_option("--checkpoint", cfg.checkpoint);
    plot->add_option("--data", cfg.data);
    plot->add_option("--out", cfg.out, "Output CSV");
    plot->add_option("--zoom", cfg.zoom, "full, 1m, 10m or 1h")->capture_default_str();
    plot->add_option("--range-start", cfg.range_start, "First timestamp, s (default: test start)");
    plot->add_option("--range-len", cfg.range_len, "Range length, s (overrides --zoom)");
    plot->add_option("--horizon-step", cfg.horizon_step, "1-based horizon step to trace (default: last)");

    std::vector<const char*> argv{"dcload"};
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        // Option callbacks (e.g. --optimizer) report bad values this way.
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (synth->parsed()) {
            cmd_synth(cfg, out);
        } else if (train_cmd->parsed()) {
            cmd_train(cfg, out);
        } else if (predict->parsed()) {
            cmd_predict(app, cfg, out);
        } else if (evaluate->parsed()) {
            cmd_evaluate(app, cfg, out);
        } else if (plot->parsed()) {
            cmd_export_plot(app, cfg, out);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

} // namespace dcload::cli
