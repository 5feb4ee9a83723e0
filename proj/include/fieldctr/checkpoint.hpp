#pragma once

#include <cstdint>
#include <filesystem>

#include "fieldctr/backbones.hpp"

namespace fieldctr {

// Single binary file: versioned header, schema hash, backbone kind, RNG
// seed, and every parameter tensor with its name and shape. Round-trips
// bit-exactly.
void save_checkpoint(const ModelBundle& bundle, std::uint64_t schema_hash,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  ModelBundle bundle;
  std::uint64_t schema_hash = 0;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fieldctr
