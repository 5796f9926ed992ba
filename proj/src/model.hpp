#pragma once

#include <filesystem>
#include <string>

#include "autograd.hpp"
#include "checkpoint.hpp"
#include "encoder.hpp"
#include "generator.hpp"

namespace kpforge {

/// Stage 1: shared encoder, document/phrase projection heads, and the
/// absent-keyphrase decoder.
struct Stage1Model {
  EncoderConfig config;
  Vocabulary vocab;
  ParamStore params;

  static Stage1Model create(const EncoderConfig& config, Vocabulary vocab);
  static Stage1Model load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir, const std::string& fingerprint, const nlohmann::json& metadata) const;

  ToyEncoder encoder() const;
  ProjectionHead doc_head() const;
  ProjectionHead phrase_head() const;
  Decoder decoder() const;

  std::string fingerprint;  // of the config that produced it; set on load
};

/// Stage 2: independent document-side and phrase-side encoders over the
/// stage-1 vocabulary, each with its own projection head.
struct RerankerModel {
  EncoderConfig config;
  Vocabulary vocab;
  ParamStore params;

  static RerankerModel create(const EncoderConfig& config, Vocabulary vocab);
  static RerankerModel load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir, const std::string& fingerprint, const nlohmann::json& metadata) const;

  ToyEncoder doc_encoder() const;
  ToyEncoder phrase_encoder() const;
  ProjectionHead doc_head() const;
  ProjectionHead phrase_head() const;

  std::string fingerprint;
};

/// Rounds every parameter to float32, the precision checkpoints store, so an
/// in-memory model scores exactly like its reloaded copy.
void round_to_storage(ParamStore& params);

}  // namespace kpforge
