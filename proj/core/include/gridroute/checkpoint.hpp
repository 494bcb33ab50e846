#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridroute/neural_net.hpp"

namespace gridroute {

inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointMetadata {
  std::uint64_t seed = 0;
  std::string rng_algorithm;
  std::string config_hash;
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const CheckpointMetadata&, const CheckpointMetadata&) = default;
};

struct Checkpoint {
  QNetwork net;
  std::optional<AdamState> adam;
  CheckpointMetadata metadata;
};

/// JSON envelope with base64 little-endian float64 blocks (W1,b1,W2,b2,...),
/// matrices row-major.
std::string save_checkpoint(const Checkpoint& checkpoint);

/// Throws ValidationError: "version mismatch", "shape mismatch" (against
/// `expected_sizes` when given) or "corrupted payload".
Checkpoint load_checkpoint(std::string_view document,
                           const std::optional<std::vector<int>>& expected_sizes = std::nullopt);

void write_checkpoint_file(const std::string& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint_file(const std::string& path,
                                const std::optional<std::vector<int>>& expected_sizes = std::nullopt);

std::string sha256_hex(std::string_view data);

}  // namespace gridroute
