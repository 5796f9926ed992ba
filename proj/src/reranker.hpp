#pragma once

#include <span>
#include <string>
#include <vector>

#include "extractor.hpp"
#include "generator.hpp"
#include "model.hpp"

namespace kpforge {

struct RerankExample {
  std::string doc_id;
  std::vector<std::string> doc_tokens;
  std::vector<GeneratedPhrase> candidates;  // overgeneration order
  std::vector<bool> positive;               // stem matches a gold absent keyphrase
  std::vector<std::string> absent_gold;     // stemmed

  std::size_t positives() const;
};

/// Labels candidates against the stemmed gold absent keyphrases.
RerankExample make_rerank_example(const PreparedDocument& doc, std::vector<GeneratedPhrase> candidates);

struct RerankCorpus {
  std::vector<RerankExample> examples;
  std::size_t excluded = 0;  // documents without any correct candidate
};

/// Overgenerates for every document and keeps those with a positive candidate.
RerankCorpus build_rerank_corpus(const Stage1Model& stage1, std::span<const PreparedDocument> docs,
                                 const BeamSearchOptions& beam, int jobs);

/// Keeps examples holding at least one positive.
RerankCorpus filter_rerank_examples(std::vector<RerankExample> examples);

/// Eq.3 over one document: positives are correct candidates, negatives the rest.
std::optional<ExampleLoss> rerank_loss(Tape& tape, const RerankerModel& model, std::span<const int> doc_ids,
                                       const std::vector<std::vector<int>>& candidate_ids,
                                       const std::vector<bool>& positive, double tau);

struct Stage2Result {
  RerankerModel model;
  TrainSummary summary;
};

Stage2Result train_stage2(std::span<const RerankExample> train, std::span<const RerankExample> valid,
                          const Vocabulary& vocab, const EncoderConfig& encoder, const TrainConfig& config);

/// cosine(z_da, z_a) for every candidate, sorted descending (ties by stem).
std::vector<ScoredPhrase> score_absent(const RerankerModel& model, std::span<const std::string> doc_tokens,
                                       std::span<const GeneratedPhrase> candidates);

std::vector<ScoredPhrase> predict_absent(const RerankerModel& model, std::span<const std::string> doc_tokens,
                                         std::span<const GeneratedPhrase> candidates, double threshold,
                                         std::size_t min_k = 5);

std::vector<CalibrationDoc> absent_calibration(const RerankerModel& model, std::span<const RerankExample> examples,
                                               int jobs);

double absent_validation_f1m(const RerankerModel& model, std::span<const RerankExample> examples, int jobs);

}  // namespace kpforge
