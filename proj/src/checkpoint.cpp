#include "dcload/checkpoint.hpp"

#include "dcload/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace dcload {

using nlohmann::json;

namespace {

bool is_conv_kernel(const std::string& name) {
    return name.rfind("conv", 0) == 0 && name.find(".kernel") != std::string::npos;
}

json tensor_to_json(const std::string& name, const Matrix& m, const ModelWeights& w) {
    json data = json::array();
    if (is_conv_kernel(name)) {
        // out x in x width
        const std::size_t layer = std::stoul(name.substr(4));
        const std::size_t width = w.conv[layer].kernel_width;
        const std::size_t in = m.cols() / width;
        for (std::size_t o = 0; o < m.rows(); ++o) {
            json per_in = json::array();
            for (std::size_t i = 0; i < in; ++i) {
                json taps = json::array();
                for (std::size_t k = 0; k < width; ++k) taps.push_back(m(o, i * width + k));
                per_in.push_back(std::move(taps));
            }
            data.push_back(std::move(per_in));
        }
        return {{"shape", {m.rows(), in, width}}, {"data", std::move(data)}};
    }
    for (std::size_t r = 0; r < m.rows(); ++r) {
        data.push_back(json(std::vector<double>(m.row(r).begin(), m.row(r).end())));
    }
    return {{"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
}

double read_number(const json& v, const std::string& name) {
    if (!v.is_number()) throw CheckpointError("tensor " + name + " has a non-numeric entry");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw CheckpointError("tensor " + name + " has a non-finite entry");
    return d;
}

void tensor_from_json(const json& t, const std::string& name, Matrix& m) {
    const json& shape = t.at("shape");
    const json& data = t.at("data");
    std::vector<std::size_t> dims = shape.get<std::vector<std::size_t>>();
    std::size_t total = 1;
    for (auto d : dims) total *= d;
    const bool ok_shape = (dims.size() == 2 && dims[0] == m.rows() && dims[1] == m.cols()) ||
                          (dims.size() == 3 && dims[0] == m.rows() && dims[1] * dims[2] == m.cols());
    if (!ok_shape || total != m.size()) {
        std::string got;
        for (auto d : dims) got += (got.empty() ? "" : "x") + std::to_string(d);
        throw CheckpointError("tensor " + name + " has shape " + got + ", expected " +
                              std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    std::vector<double> flat;
    flat.reserve(total);
    if (!data.is_array() || data.size() != dims[0]) {
        throw CheckpointError("tensor " + name + " data does not match its shape");
    }
    for (const auto& row : data) {
        if (!row.is_array() || row.size() != dims[1]) {
            throw CheckpointError("tensor " + name + " data does not match its shape");
        }
        for (const auto& item : row) {
            if (dims.size() == 3) {
                if (!item.is_array() || item.size() != dims[2]) {
                    throw CheckpointError("tensor " + name + " data does not match its shape");
                }
                for (const auto& v : item) flat.push_back(read_number(v, name));
            } else {
                flat.push_back(read_number(item, name));
            }
        }
    }
    std::copy(flat.begin(), flat.end(), m.data());
}

json hyper_to_json(const ModelHyper& h) {
    return {{"input_size", h.input_size}, {"hidden_size", h.hidden_size}, {"layers", h.layers},
            {"kernel_widths", h.kernel_widths}, {"lookback", h.lookback}, {"horizon", h.horizon}};
}

ModelHyper hyper_from_json(const json& j, Architecture arch) {
    ModelHyper h;
    h.architecture = arch;
    h.input_size = j.at("input_size").get<std::size_t>();
    h.hidden_size = j.at("hidden_size").get<std::size_t>();
    h.layers = j.at("layers").get<std::size_t>();
    h.kernel_widths = j.at("kernel_widths").get<std::vector<std::size_t>>();
    h.lookback = j.at("lookback").get<std::size_t>();
    h.horizon = j.at("horizon").get<std::size_t>();
    return h;
}

json train_to_json(const TrainConfig& c) {
    return {{"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
            {"optimizer", std::string(to_string(c.optimizer))}, {"beta1", c.beta1},
            {"beta2", c.beta2}, {"epsilon", c.epsilon}, {"max_epochs", c.max_epochs},
            {"patience", c.patience}, {"clip_norm", c.clip_norm}, {"seed", c.seed}};
}

TrainConfig train_from_json(const json& j, const ModelHyper& hyper) {
    TrainConfig c;
    c.hyper = hyper;
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.max_epochs = j.at("max_epochs").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.clip_norm = j.at("clip_norm").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

} // namespace

std::string checkpoint_to_string(const Checkpoint& ckpt) {
    check_shapes(ckpt.weights);
    json tensors = json::object();
    ckpt.weights.for_each_parameter([&](const std::string& name, const Matrix& m) {
        tensors[name] = tensor_to_json(name, m, ckpt.weights);
    });
    json doc = {
        {"schema_version", kCheckpointSchemaVersion},
        {"architecture", std::string(to_string(ckpt.weights.hyper.architecture))},
        {"hyper", hyper_to_json(ckpt.weights.hyper)},
        {"scaler", {{"min", ckpt.scaler.min}, {"max", ckpt.scaler.max}}},
        {"train", train_to_json(ckpt.config)},
        {"tensors", std::move(tensors)},
    };
    return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        const int version = doc.at("schema_version").get<int>();
        if (version != kCheckpointSchemaVersion) {
            throw CheckpointError("unsupported checkpoint schema version " + std::to_string(version));
        }
        Checkpoint ckpt;
        const auto arch = parse_architecture(doc.at("architecture").get<std::string>());
        const ModelHyper hyper = hyper_from_json(doc.at("hyper"), arch);
        try {
            ckpt.weights = zero_weights(hyper);
        } catch (const ConfigError& e) {
            throw CheckpointError(std::string("checkpoint hyperparameters invalid: ") + e.what());
        }
        ckpt.scaler.min = doc.at("scaler").at("min").get<double>();
        ckpt.scaler.max = doc.at("scaler").at("max").get<double>();
        if (!(ckpt.scaler.max > ckpt.scaler.min)) {
            throw CheckpointError("checkpoint scaler has max <= min");
        }
        ckpt.config = train_from_json(doc.at("train"), hyper);
        const json& tensors = doc.at("tensors");
        std::size_t seen = 0;
        ckpt.weights.for_each_parameter([&](const std::string& name, Matrix& m) {
            if (!tensors.contains(name)) throw CheckpointError("checkpoint is missing tensor " + name);
            tensor_from_json(tensors.at(name), name, m);
            ++seen;
        });
        if (seen != tensors.size()) {
            throw CheckpointError("checkpoint has tensors the architecture does not use");
        }
        return ckpt;
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
    } catch (const ConfigError& e) {
        throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const ModelWeights& weights, const ScalerParams& scaler, const TrainConfig& config,
                     const std::filesystem::path& path) {
    const std::string text = checkpoint_to_string({weights, scaler, config});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << text;
    if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_string(ss.str());
}

} // namespace dcload
