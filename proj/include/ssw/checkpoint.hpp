#pragma once

// Model checkpoints: magic "SSCK", version, JSON header describing the
// config and tensor shapes, then raw little-endian f32 blobs in header
// order. Loading validates structure and total length; restoring
// validates names and shapes against live tensors.

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ssw/tensor.hpp"

namespace ssw::ckpt {

using NamedTensors = std::vector<std::pair<std::string, nn::Tensor>>;

void save_checkpoint(const std::string& path, const nlohmann::json& config,
                     const NamedTensors& tensors);

struct LoadedCheckpoint {
    nlohmann::json config;
    NamedTensors tensors;  // header order, values widened from f32
};

// FileError if unreadable, DataError on bad magic/version/header/length
LoadedCheckpoint load_checkpoint(const std::string& path);

// copies loaded values into live tensors; DataError on any name or
// shape mismatch (order-insensitive, must cover both sets exactly)
void restore_into(const LoadedCheckpoint& loaded, const NamedTensors& live);

}  // namespace ssw::ckpt
