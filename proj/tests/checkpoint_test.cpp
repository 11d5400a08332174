#include "dcload/checkpoint.hpp"
#include "dcload/error.hpp"
#include "dcload/network.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace dcload;
using nlohmann::json;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("dcload_ckpt_" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Checkpoint sample(Architecture arch, std::uint64_t seed) {
    auto hyper = default_hyper(arch, 20, 5);
    hyper.hidden_size = 6;
    if (arch == Architecture::cnn1d) hyper.kernel_widths = {3, 5};
    TrainConfig config;
    config.hyper = hyper;
    config.seed = seed;
    config.learning_rate = 3e-4;
    auto w = init_weights(hyper, seed);
    // Awkward doubles exercise the shortest round-trip printing.
    w.head.bias(0, 0) = 0.1 + 0.2;
    w.head.bias(0, 1) = 1.0 / 3.0;
    w.head.bias(0, 2) = -5e-324;
    return {w, ScalerParams{123.456, 45000.0}, config};
}

} // namespace

TEST_CASE("save, load, save is byte-identical and forward outputs match bitwise") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (auto arch : {Architecture::fc_lstm, Architecture::gru, Architecture::cnn1d}) {
        CAPTURE(to_string(arch));
        const auto ckpt = sample(arch, 17);
        const auto a = temp_path("a.json"), b = temp_path("b.json");
        save_checkpoint(ckpt.weights, ckpt.scaler, ckpt.config, a);
        const auto loaded = load_checkpoint(a);
        save_checkpoint(loaded.weights, loaded.scaler, loaded.config, b);
        CHECK(slurp(a) == slurp(b));
        CHECK(loaded.weights == ckpt.weights);
        CHECK(loaded.config == ckpt.config);
        CHECK(loaded.scaler.min == ckpt.scaler.min);
        CHECK(loaded.scaler.max == ckpt.scaler.max);
        std::vector<double> x(20);
        for (double& v : x) v = u(rng);
        CHECK(forward(x, loaded.weights) == forward(x, ckpt.weights));
        std::filesystem::remove(a);
        std::filesystem::remove(b);
    }
}

TEST_CASE("document layout") {
    const auto ckpt = sample(Architecture::cnn1d, 3);
    const auto doc = json::parse(checkpoint_to_string(ckpt));
    CHECK(doc.at("schema_version") == kCheckpointSchemaVersion);
    CHECK(doc.at("architecture") == "1D_CNN");
    CHECK(doc.at("scaler").at("max") == 45000.0);
    CHECK(doc.at("hyper").at("lookback") == 20);
    // Conv kernels are stored out x in x width.
    const auto& k1 = doc.at("tensors").at("conv1.kernel");
    CHECK(k1.at("shape") == json::array({6, 6, 5}));
    CHECK(k1.at("data")[2][4][1].get<double>() == ckpt.weights.conv[1].kernel(2, 4 * 5 + 1));
    const auto& hw = doc.at("tensors").at("head.weights");
    CHECK(hw.at("shape").size() == 2);
}

TEST_CASE("loader rejects bad documents") {
    const std::string good = checkpoint_to_string(sample(Architecture::gru, 4));
    CHECK_NOTHROW(checkpoint_from_string(good));

    auto edited = [&](auto&& edit) {
        auto doc = json::parse(good);
        edit(doc);
        return doc.dump();
    };
    CHECK_THROWS_AS(checkpoint_from_string(edited([](json& d) { d["schema_version"] = 2; })),
                    CheckpointError);
    CHECK_THROWS_AS(checkpoint_from_string(edited([](json& d) {
                        d["tensors"]["head.weights"]["shape"] = json::array({6, 5});
                    })),
                    CheckpointError);
    CHECK_THROWS_AS(checkpoint_from_string(edited([](json& d) {
                        d["tensors"]["gru0.bias"]["data"][0].erase(0);
                    })),
                    CheckpointError);
    CHECK_THROWS_AS(checkpoint_from_string(edited([](json& d) { d["tensors"].erase("head.bias"); })),
                    CheckpointError);
    CHECK_THROWS_AS(checkpoint_from_string(edited([](json& d) {
                        d["tensors"]["lstm0.bias"] = d["tensors"]["head.bias"];
                    })),
                    CheckpointError);
    CHECK_THROWS_AS(checkpoint_from_string(edited([](json& d) { d["hyper"]["hidden_size"] = 7; })),
                    CheckpointError);
    CHECK_THROWS_AS(checkpoint_from_string(edited([](json& d) { d.erase("scaler"); })), CheckpointError);
    CHECK_THROWS_AS(checkpoint_from_string(edited([](json& d) { d["architecture"] = "TCN"; })),
                    CheckpointError);
    CHECK_THROWS_AS(checkpoint_from_string(edited([](json& d) {
                        d["tensors"]["head.bias"]["data"][0][0] = "x";
                    })),
                    CheckpointError);
    CHECK_THROWS_AS(checkpoint_from_string("{not json"), CheckpointError);
    CHECK_THROWS_AS(load_checkpoint(temp_path("does_not_exist.json")), DataError);
}
