// SPDX-License-Identifier: Apache-2.0
//
// Versioned binary container for model parameters.
//
// Layout (little-endian):
//   "IWQGCKPT"  u32 version  u8 kind
//   u64 config length, config JSON bytes
//   u32 tensor count, then per tensor:
//     u32 name length, name bytes, u32 rank, u64 dims[rank], f64 values[]

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "iwaqg/classifier.hpp"
#include "iwaqg/qg_model.hpp"
#include "iwaqg/tensor.hpp"

namespace iwaqg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class ModelKind : std::uint8_t { Classifier = 0, QG = 1 };

std::string_view to_string(ModelKind kind);

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Checkpoint {
    std::uint32_t version = kCheckpointVersion;
    ModelKind kind = ModelKind::Classifier;
    // {"model": config, "vocab": non-reserved tokens, "vocab_hash": ...}
    nlohmann::json config;
    std::vector<std::pair<std::string, Tensor>> tensors;
};

std::string serialize(const Checkpoint& checkpoint);
Checkpoint deserialize(std::string_view bytes);

Checkpoint to_checkpoint(const ClassifierModel& model);
Checkpoint to_checkpoint(const QGModel& model);
ClassifierModel classifier_from_checkpoint(const Checkpoint& checkpoint);
QGModel qg_from_checkpoint(const Checkpoint& checkpoint);

Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace iwaqg
