#pragma once

#include <filesystem>
#include <string>

#include "autograd.hpp"
#include "encoder.hpp"
#include "json.hpp"

namespace kpforge {

inline constexpr int kCheckpointVersion = 1;

// On disk a checkpoint is a directory holding manifest.json and params.bin.
// The blob is every parameter in manifest order as little-endian float32.
struct CheckpointHeader {
  std::string kind;  // "stage1" or "reranker"
  std::string config_fingerprint;
  EncoderConfig encoder;
  Vocabulary vocabulary;
  nlohmann::json metadata = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& dir, const CheckpointHeader& header, const ParamStore& params);

/// Reads and validates the manifest only.
CheckpointHeader read_checkpoint_header(const std::filesystem::path& dir);

/// Fills `params` (already declared with the expected names and shapes) from
/// the blob. Throws a data error on any name, shape, size, or checksum mismatch.
void load_checkpoint_params(const std::filesystem::path& dir, ParamStore& params);

}  // namespace kpforge
