#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "frameseg/model.hpp"
#include "frameseg/training.hpp"

namespace frameseg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Run bookkeeping stored next to the tensors. `run_config` is an opaque JSON
/// object text echoed from the caller.
struct CheckpointMeta {
    int epoch = 0;
    long step = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string run_config = "{}";
};

struct LoadedCheckpoint {
    ToyDecoder model;
    AdamW optimizer;
    bool has_optimizer = false;
    CheckpointMeta meta;
};

/// Writes model parameters, optional AdamW moments and `meta`; the file is
/// written to a temporary name and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const ToyDecoder& model, const AdamW* optimizer,
                     const CheckpointMeta& meta);

/// Throws DataError on a missing file, bad magic, unsupported version or
/// truncated payload.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace frameseg
