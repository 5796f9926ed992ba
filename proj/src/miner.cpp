#include "miner.hpp"

#include <algorithm>
#include <unordered_set>

#include "corpus.hpp"
#include "error.hpp"
#include "stemmer.hpp"
#include "tokenizer.hpp"

namespace kpforge {

void MinerConfig::validate() const {
  if (max_ngram < 1 || max_ngram > 10)
    usage_error("max_ngram must be in [1, 10], got " + std::to_string(max_ngram));
  if (pattern != "valid-run") usage_error("unknown chunk pattern: " + pattern);
}

std::vector<Chunk> chunk_phrases(std::span<const TaggedToken> tagged, const MinerConfig& config) {
  std::vector<Chunk> chunks;
  std::size_t i = 0;
  while (i < tagged.size()) {
    if (classify_tag(tagged[i].tag, config.table) == TagCategory::Invalid) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool has_indep = false;
    while (j < tagged.size()) {
      const auto cat = classify_tag(tagged[j].tag, config.table);
      if (cat == TagCategory::Invalid) break;
      has_indep = has_indep || cat == TagCategory::Indep;
      ++j;
    }
    if (has_indep) chunks.push_back({i, j});
    i = j;
  }
  return chunks;
}

std::vector<PhraseCandidate> mine_spans(std::span<const TaggedToken> tagged, const MinerConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.max_ngram);

  std::vector<TagCategory> cats;
  std::vector<std::string> stems;
  cats.reserve(tagged.size());
  stems.reserve(tagged.size());
  for (const auto& t : tagged) {
    cats.push_back(classify_tag(t.tag, config.table));
    stems.push_back(stem_word(t.word));
  }

  std::vector<PhraseCandidate> out;
  auto emit = [&](std::size_t s, std::size_t e, bool has_indep) {
    if (config.require_indep && !has_indep) return;
    bool all_punct = true;
    std::string stemmed, surface;
    for (std::size_t k = s; k < e; ++k) {
      all_punct = all_punct && is_punct_token(tagged[k].word);
      if (k > s) {
        stemmed += ' ';
        surface += ' ';
      }
      stemmed += stems[k];
      surface += tagged[k].word;
    }
    if (all_punct || stemmed.empty()) return;
    out.push_back({s, e, std::move(stemmed), std::move(surface)});
  };

  for (const auto& chunk : chunk_phrases(tagged, config)) {
    for (std::size_t i = chunk.start; i < chunk.end; ++i) {
      if (cats[i] != TagCategory::Indep && cats[i] != TagCategory::EndDep) continue;
      bool has_indep = cats[i] == TagCategory::Indep;
      emit(i, i + 1, has_indep);
      std::size_t end = i + 1;
      for (std::size_t j = i + 1; j < chunk.end; ++j) {
        if (end - i >= n) break;
        end = j + 1;
        if (cats[j] == TagCategory::Dep || cats[j] == TagCategory::EndDep) continue;
        // INDEP or START_DEP: extend and register.
        has_indep = has_indep || cats[j] == TagCategory::Indep;
        emit(i, end, has_indep);
      }
    }
  }
  return out;
}

std::vector<PhraseCandidate> mine_candidates(std::span<const TaggedToken> tagged, const MinerConfig& config) {
  std::vector<PhraseCandidate> unique;
  std::unordered_set<std::string> seen;
  for (auto& c : mine_spans(tagged, config))
    if (seen.insert(c.stemmed).second) unique.push_back(std::move(c));
  return unique;
}

LabeledCandidates label_candidates(std::span<const PhraseCandidate> candidates,
                                   std::span<const std::string> present_gold, std::string doc_id) {
  LabeledCandidates out;
  out.doc_id = std::move(doc_id);
  std::vector<std::string> gold_keys;
  gold_keys.reserve(present_gold.size());
  for (const auto& g : present_gold) gold_keys.push_back(phrase_key(g));
  const std::unordered_set<std::string> gold_set(gold_keys.begin(), gold_keys.end());

  std::unordered_set<std::string> found;
  for (const auto& c : candidates) {
    if (gold_set.contains(c.stemmed)) {
      out.positives.push_back(c);
      found.insert(c.stemmed);
    } else {
      out.negatives.push_back(c);
    }
  }
  for (std::size_t i = 0; i < present_gold.size(); ++i)
    if (!found.contains(gold_keys[i])) out.misses.push_back(present_gold[i]);
  return out;
}

}  // namespace kpforge
