#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "encoder.hpp"
#include "extractor.hpp"
#include "generator.hpp"
#include "miner.hpp"

namespace kpforge {

struct RunConfig {
  // Paths. `corpus` is the document input of whichever command runs.
  std::string corpus;
  std::string valid_corpus;
  std::string gold;
  std::string stage1_checkpoint;
  std::string reranker_checkpoint;
  std::string candidates;
  std::string predictions;
  std::string output;
  std::string log;

  MinerConfig miner;
  bool noun_phrases_only = false;
  EncoderConfig encoder;
  TrainConfig stage1;
  TrainConfig stage2;
  BeamSearchOptions beam;

  std::optional<double> present_threshold;
  std::optional<double> absent_threshold;
  std::size_t min_k = 5;
  std::size_t recall_n = 50;
  std::uint64_t seed = 42;
  int jobs = 1;

  RunConfig();

  /// Copies seed/jobs/tag-table choices into the nested module configs.
  void sync();
};

/// All recognized keys in serialization order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text form. Unknown keys and malformed values are
/// usage errors; the former lists every valid key.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

/// Flat "key = value" lines; '#' starts a comment.
void parse_config(std::istream& in, RunConfig& config, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

/// Applies KPFORGE_SEED when set.
void apply_environment(RunConfig& config);

/// Hash of every non-path, non-parallelism setting.
std::string config_fingerprint(const RunConfig& config);

}  // namespace kpforge
