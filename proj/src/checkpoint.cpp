// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <fmt/format.h>

#include "iwaqg/io.hpp"

namespace iwaqg {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::string_view kMagic = "IWQGCKPT";

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        T value;
        std::memcpy(&value, take(sizeof(T)).data(), sizeof(T));
        return value;
    }

    std::string_view take(std::size_t n) {
        if (n > bytes_.size() - pos_) {
            throw CheckpointError("checkpoint is truncated");
        }
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

nlohmann::json vocab_json(const Vocabulary& vocab) { return vocab.non_reserved(); }

Vocabulary vocab_from(const nlohmann::json& config) {
    Vocabulary vocab = Vocabulary::from_tokens(config.at("vocab").get<std::vector<std::string>>());
    if (vocab.content_hash() != config.at("vocab_hash").get<std::string>()) {
        throw CheckpointError("checkpoint vocabulary does not match its recorded hash");
    }
    return vocab;
}

void load_tensors(nn::ParamSet& params, const Checkpoint& ckpt) {
    if (ckpt.tensors.size() != params.size()) {
        throw CheckpointError(
            fmt::format("checkpoint holds {} tensors, model expects {}", ckpt.tensors.size(), params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& [name, tensor] = ckpt.tensors[i];
        if (name != params.name(i) || tensor.shape() != params.tensor(i).shape()) {
            throw CheckpointError(fmt::format("checkpoint tensor '{}' {} does not match model tensor '{}' {}", name,
                                              shape_to_string(tensor.shape()), params.name(i),
                                              shape_to_string(params.tensor(i).shape())));
        }
        params.tensor(i) = tensor;
        params.tensor(i).drop_grad();
    }
}

template <typename Model>
Checkpoint make(ModelKind kind, const Model& model) {
    Checkpoint ckpt;
    ckpt.kind = kind;
    ckpt.config = {{"model", to_json(model.config())},
                   {"vocab", vocab_json(model.vocab())},
                   {"vocab_hash", model.vocab().content_hash()}};
    const auto& params = model.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor copy = params.tensor(i);
        copy.drop_grad();
        ckpt.tensors.emplace_back(params.name(i), std::move(copy));
    }
    return ckpt;
}

}  // namespace

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Classifier ? "classifier" : "qg"; }

std::string serialize(const Checkpoint& ckpt) {
    std::string out(kMagic);
    put<std::uint32_t>(out, ckpt.version);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(ckpt.kind));
    const std::string config = ckpt.config.dump();
    put<std::uint64_t>(out, config.size());
    out += config;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, tensor] : ckpt.tensors) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.shape().size()));
        for (auto d : tensor.shape()) {
            put<std::uint64_t>(out, d);
        }
        for (double v : tensor.values()) {
            put<double>(out, v);
        }
    }
    return out;
}

Checkpoint deserialize(std::string_view bytes) {
    Reader in(bytes);
    if (in.take(kMagic.size()) != kMagic) {
        throw CheckpointError("not a checkpoint file (bad magic)");
    }
    Checkpoint ckpt;
    ckpt.version = in.get<std::uint32_t>();
    if (ckpt.version != kCheckpointVersion) {
        throw CheckpointError(fmt::format("unsupported checkpoint version {} (expected {})", ckpt.version,
                                          kCheckpointVersion));
    }
    const auto kind = in.get<std::uint8_t>();
    if (kind > 1) {
        throw CheckpointError(fmt::format("unknown model kind tag {}", kind));
    }
    ckpt.kind = static_cast<ModelKind>(kind);
    const auto config_size = in.get<std::uint64_t>();
    ckpt.config = nlohmann::json::parse(in.take(config_size));
    const auto count = in.get<std::uint32_t>();
    for (std::uint32_t t = 0; t < count; ++t) {
        std::string name(in.take(in.get<std::uint32_t>()));
        const auto rank = in.get<std::uint32_t>();
        Shape shape(rank);
        for (auto& d : shape) {
            d = in.get<std::uint64_t>();
        }
        std::vector<double> values(shape_size(shape));
        for (auto& v : values) {
            v = in.get<double>();
        }
        ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
    }
    if (!in.done()) {
        throw CheckpointError("trailing bytes after checkpoint payload");
    }
    return ckpt;
}

Checkpoint to_checkpoint(const ClassifierModel& model) { return make(ModelKind::Classifier, model); }

Checkpoint to_checkpoint(const QGModel& model) { return make(ModelKind::QG, model); }

ClassifierModel classifier_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.kind != ModelKind::Classifier) {
        throw CheckpointError("expected a classifier checkpoint, got a qg checkpoint");
    }
    ClassifierModel model(classifier_config_from_json(ckpt.config.at("model")), vocab_from(ckpt.config));
    load_tensors(model.params(), ckpt);
    return model;
}

QGModel qg_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.kind != ModelKind::QG) {
        throw CheckpointError("expected a qg checkpoint, got a classifier checkpoint");
    }
    QGModel model(qg_config_from_json(ckpt.config.at("model")), vocab_from(ckpt.config));
    load_tensors(model.params(), ckpt);
    return model;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) { return deserialize(read_file(path)); }

}  // namespace iwaqg
