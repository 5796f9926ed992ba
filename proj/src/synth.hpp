#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "corpus.hpp"

namespace kpforge {

// Synthetic corpus with planted keyphrases. Words are invented nouns, so the
// baseline tagger tags them NN and the stemmer leaves them untouched. Each
// document belongs to a topic: its present keyphrases come from the topic's
// phrase pool and sit among distractor phrases built from a shared filler
// lexicon; each absent keyphrase has a cue word that appears in the text.
struct SynthConfig {
  std::size_t documents = 200;
  std::size_t valid = 25;
  std::size_t test = 25;
  std::size_t topics = 6;
  std::size_t present_pool = 10;
  std::size_t absent_pool = 6;
  std::size_t present_per_doc = 5;
  std::size_t absent_per_doc = 2;
  std::size_t distractors_per_doc = 5;
  std::uint64_t seed = 2024;
};

struct SynthCorpus {
  std::vector<LabeledDocument> train;
  std::vector<LabeledDocument> valid;
  std::vector<LabeledDocument> test;
};

SynthCorpus generate_synthetic(const SynthConfig& config);

void write_corpus(const std::filesystem::path& path, std::span<const LabeledDocument> docs);

}  // namespace kpforge
