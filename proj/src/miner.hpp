#pragma once

#include <span>
#include <string>
#include <vector>

#include "tagger.hpp"

namespace kpforge {

struct MinerConfig {
  int max_ngram = 6;
  // Only "valid-run" is defined: maximal runs of non-INVALID tags holding at
  // least one INDEP tag.
  std::string pattern = "valid-run";
  TagSetTable table = TagSetTable::defaults();
  // Drops registered spans without any INDEP token (e.g. a lone determiner).
  // Off reproduces the bare enumeration exactly.
  bool require_indep = true;

  void validate() const;
};

struct PhraseCandidate {
  std::size_t start = 0;  // inclusive token index
  std::size_t end = 0;    // exclusive
  std::string stemmed;
  std::string surface;

  std::size_t length() const { return end - start; }
};

struct Chunk {
  std::size_t start = 0;
  std::size_t end = 0;
};

std::vector<Chunk> chunk_phrases(std::span<const TaggedToken> tagged, const MinerConfig& config);

/// Every span registered by the enumeration, in registration order, with
/// repeated stemmed forms kept.
std::vector<PhraseCandidate> mine_spans(std::span<const TaggedToken> tagged, const MinerConfig& config);

/// mine_spans() reduced to one entry per stemmed form (earliest span wins).
std::vector<PhraseCandidate> mine_candidates(std::span<const TaggedToken> tagged, const MinerConfig& config);

struct LabeledCandidates {
  std::string doc_id;
  std::vector<PhraseCandidate> positives;
  std::vector<PhraseCandidate> negatives;
  // Gold present keyphrases with no matching candidate.
  std::vector<std::string> misses;
};

LabeledCandidates label_candidates(std::span<const PhraseCandidate> candidates,
                                   std::span<const std::string> present_gold, std::string doc_id = {});

}  // namespace kpforge
