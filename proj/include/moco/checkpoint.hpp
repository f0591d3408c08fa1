#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"
#include "moco/model.hpp"
#include "moco/optimizer.hpp"
#include "moco/scalarization.hpp"

namespace moco {

// File layout: "MOCOCKPT", uint32 LE header length, JSON header, then the
// payload as little-endian float32: every parameter in ParamLayout order,
// followed by the Adam first and second moments when present. The header
// carries an FNV-1a 64 checksum of the payload bytes.
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Policy<float> policy;
  ScalarizationRecipe recipe;
  std::uint64_t seed = 0;
  nlohmann::json metadata = nlohmann::json::object();
  std::optional<AdamState> optimizer;
};

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& is);

// Writes to a temporary file and renames it into place.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t hash = 0xcbf29ce484222325ULL);

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace moco
