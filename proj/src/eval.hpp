#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kpforge {

struct ScoredPhrase {
  std::string stemmed;
  std::string surface;
  double score = 0;
};

/// Descending score; ties broken by ascending stemmed form.
void sort_scored(std::vector<ScoredPhrase>& phrases);

/// Stems every phrase and drops repeated stems, keeping first occurrences.
std::vector<std::string> normalize_phrases(std::span<const std::string> phrases);

// The metric functions below expect stemmed, deduplicated phrases.

struct PRF {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

PRF prf_at_m(std::span<const std::string> predictions, std::span<const std::string> gold);
double f1_at_m(std::span<const std::string> predictions, std::span<const std::string> gold);

/// Top five predictions, padded with sentinels that never match gold.
PRF prf_at_5(std::span<const std::string> predictions, std::span<const std::string> gold);
double f1_at_5(std::span<const std::string> predictions, std::span<const std::string> gold);

/// Padding used by f1_at_5: `count` sentinel phrases disjoint from gold.
std::vector<std::string> padding_sentinels(std::size_t count, std::span<const std::string> gold);

/// Fraction of gold found in the first n candidates; nullopt when gold is empty.
std::optional<double> recall_at_n(std::span<const std::string> candidates, std::span<const std::string> gold,
                                  std::size_t n);

struct CalibrationDoc {
  std::vector<ScoredPhrase> scored;  // stemmed keys + scores, any order
  std::vector<std::string> gold;     // stemmed keys
};

struct ThresholdChoice {
  double threshold = 0;
  double f1 = 0;
};

/// F1@M-maximizing cut for one document over its observed scores; ties go to
/// the larger threshold. Requires at least one candidate.
ThresholdChoice best_threshold(const CalibrationDoc& doc);

/// Mean of per-document best thresholds. Documents without candidates or
/// without gold are skipped; throws if none remain.
double calibrate_threshold(std::span<const CalibrationDoc> docs);

/// Keeps phrases with score >= threshold, then tops up from the remaining
/// (already descending) list until min(min_k, size) phrases are kept.
std::vector<ScoredPhrase> select_by_threshold(std::span<const ScoredPhrase> scored, double threshold,
                                              std::size_t min_k = 5);

struct DocumentEval {
  std::string id;
  PRF at_m;
  PRF at_5;
  std::size_t predictions = 0;
  std::size_t gold = 0;
  std::optional<double> recall_at_n;
};

struct MetricSummary {
  double f1_at_5 = 0;
  double f1_at_m = 0;
  std::optional<double> recall_at_n;
  std::size_t documents = 0;  // documents with non-empty gold
};

/// Arithmetic mean over documents with non-empty gold.
MetricSummary macro_average(std::span<const DocumentEval> docs);

DocumentEval evaluate_document(std::string id, std::span<const std::string> predictions,
                               std::span<const std::string> gold);

}  // namespace kpforge
