#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "eval.hpp"
#include "miner.hpp"
#include "model.hpp"
#include "optim.hpp"

namespace kpforge {

struct TrainConfig {
  double tau = 0.1;
  double lambda = 0.3;
  TrainLoopConfig loop;
  int jobs = 1;  // validation scoring only

  void validate() const;
};

/// Sum over positives of -log(e^{s+/tau} / (e^{s+/tau} + sum_j e^{s-_j/tau}))
/// with s = cosine against z_doc.
double contrastive_loss(std::span<const double> z_doc, const std::vector<std::vector<double>>& z_pos,
                        const std::vector<std::vector<double>>& z_neg, double tau);

double joint_loss(double mle, double cl, double lambda);

/// A document with everything training and prediction need precomputed.
struct PreparedDocument {
  std::string id;
  TokenizedDocument tokens;
  std::vector<PhraseCandidate> spans;       // every mined span
  std::vector<PhraseCandidate> candidates;  // unique by stemmed form
  std::vector<std::string> present_gold;    // stemmed
  std::vector<std::string> absent_gold;     // stemmed
  std::vector<std::vector<std::string>> absent_phrases;  // tokenized, gold order
  LabeledCandidates labels;
};

PreparedDocument prepare_document(const LabeledDocument& doc, const MinerConfig& miner);

/// Vocabulary over training document tokens and absent keyphrase tokens.
Vocabulary build_vocabulary(std::span<const PreparedDocument> docs);

/// Eq.5 loss for one document; components the document cannot define are
/// left out (no positives: no contrastive term; no absent gold: no MLE term).
std::optional<ExampleLoss> stage1_loss(Tape& tape, const Stage1Model& model, std::span<const int> ids,
                                       std::span<const PhraseCandidate> positives,
                                       std::span<const PhraseCandidate> negatives, std::span<const int> target,
                                       double tau, double lambda);

struct Stage1Result {
  Stage1Model model;
  TrainSummary summary;
  std::size_t docs_without_positives = 0;
  std::size_t docs_without_absent = 0;
};

Stage1Result train_stage1(std::span<const PreparedDocument> train, std::span<const PreparedDocument> valid,
                          const EncoderConfig& encoder, const TrainConfig& config);

/// Cosine score of every mined span against the document, reduced to the max
/// per stemmed form and sorted (descending, ties by stemmed form).
std::vector<ScoredPhrase> score_present(const Stage1Model& model, const PreparedDocument& doc);

std::vector<ScoredPhrase> predict_present(const Stage1Model& model, const PreparedDocument& doc, double threshold,
                                          std::size_t min_k = 5);

/// Calibration inputs for present keyphrases: scored candidates and stemmed gold.
std::vector<CalibrationDoc> present_calibration(const Stage1Model& model, std::span<const PreparedDocument> docs,
                                                int jobs);

/// Macro F1@M at a threshold calibrated on the same documents.
double present_validation_f1m(const Stage1Model& model, std::span<const PreparedDocument> docs, int jobs);

/// Reduces raw span scores to one entry per stemmed form (max) and sorts.
std::vector<ScoredPhrase> aggregate_max(std::vector<ScoredPhrase> scored);

}  // namespace kpforge
