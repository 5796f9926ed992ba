#include "eval.hpp"

#include <algorithm>
#include <unordered_set>

#include "corpus.hpp"
#include "error.hpp"

namespace kpforge {

void sort_scored(std::vector<ScoredPhrase>& phrases) {
  std::sort(phrases.begin(), phrases.end(), [](const ScoredPhrase& a, const ScoredPhrase& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.stemmed < b.stemmed;
  });
}

std::vector<std::string> normalize_phrases(std::span<const std::string> phrases) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& p : phrases) {
    auto key = phrase_key(p);
    if (!key.empty() && seen.insert(key).second) out.push_back(std::move(key));
  }
  return out;
}

namespace {

std::size_t count_hits(std::span<const std::string> predictions, std::span<const std::string> gold) {
  const std::unordered_set<std::string> gold_set(gold.begin(), gold.end());
  std::size_t hits = 0;
  for (const auto& p : predictions) hits += gold_set.contains(p);
  return hits;
}

PRF make_prf(std::size_t hits, std::size_t num_pred, std::size_t num_gold) {
  PRF r;
  if (num_pred) r.precision = static_cast<double>(hits) / static_cast<double>(num_pred);
  if (num_gold) r.recall = static_cast<double>(hits) / static_cast<double>(num_gold);
  if (r.precision + r.recall > 0) r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

}  // namespace

PRF prf_at_m(std::span<const std::string> predictions, std::span<const std::string> gold) {
  return make_prf(count_hits(predictions, gold), predictions.size(), gold.size());
}

double f1_at_m(std::span<const std::string> predictions, std::span<const std::string> gold) {
  return prf_at_m(predictions, gold).f1;
}

std::vector<std::string> padding_sentinels(std::size_t count, std::span<const std::string> gold) {
  const std::unordered_set<std::string> gold_set(gold.begin(), gold.end());
  std::vector<std::string> pads;
  for (std::size_t i = 1; i <= count; ++i) {
    std::string pad = "<pad-" + std::to_string(i) + ">";
    while (gold_set.contains(pad)) pad += '_';
    pads.push_back(std::move(pad));
  }
  return pads;
}

PRF prf_at_5(std::span<const std::string> predictions, std::span<const std::string> gold) {
  constexpr std::size_t k = 5;
  std::vector<std::string> top(predictions.begin(), predictions.begin() + std::min(k, predictions.size()));
  for (auto& pad : padding_sentinels(k - top.size(), gold)) top.push_back(std::move(pad));
  return prf_at_m(top, gold);
}

double f1_at_5(std::span<const std::string> predictions, std::span<const std::string> gold) {
  return prf_at_5(predictions, gold).f1;
}

std::optional<double> recall_at_n(std::span<const std::string> candidates, std::span<const std::string> gold,
                                  std::size_t n) {
  if (gold.empty()) return std::nullopt;
  const auto top = candidates.first(std::min(n, candidates.size()));
  return static_cast<double>(count_hits(top, gold)) / static_cast<double>(gold.size());
}

ThresholdChoice best_threshold(const CalibrationDoc& doc) {
  if (doc.scored.empty()) usage_error("best_threshold: document has no candidates");
  std::vector<ScoredPhrase> sorted = doc.scored;
  sort_scored(sorted);
  const std::unordered_set<std::string> gold(doc.gold.begin(), doc.gold.end());

  // Sweep cut points from the highest score down. Selecting "score >= t"
  // for t = sorted[i].score keeps every entry with that score.
  ThresholdChoice best{sorted.front().score, -1.0};
  std::size_t hits = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    hits += gold.contains(sorted[i].stemmed);
    if (i + 1 < sorted.size() && sorted[i + 1].score == sorted[i].score) continue;
    const double f1 = make_prf(hits, i + 1, gold.size()).f1;
    if (f1 > best.f1) best = {sorted[i].score, f1};
  }
  return best;
}

double calibrate_threshold(std::span<const CalibrationDoc> docs) {
  double sum = 0;
  std::size_t used = 0;
  for (const auto& d : docs) {
    if (d.scored.empty() || d.gold.empty()) continue;
    sum += best_threshold(d).threshold;
    ++used;
  }
  if (used == 0) usage_error("calibrate_threshold: no validation document with candidates and gold");
  return sum / static_cast<double>(used);
}

std::vector<ScoredPhrase> select_by_threshold(std::span<const ScoredPhrase> scored, double threshold,
                                              std::size_t min_k) {
  std::vector<ScoredPhrase> out;
  std::vector<const ScoredPhrase*> rest;
  for (const auto& p : scored) {
    if (p.score >= threshold)
      out.push_back(p);
    else
      rest.push_back(&p);
  }
  for (std::size_t i = 0; out.size() < min_k && i < rest.size(); ++i) out.push_back(*rest[i]);
  return out;
}

DocumentEval evaluate_document(std::string id, std::span<const std::string> predictions,
                               std::span<const std::string> gold) {
  DocumentEval d;
  d.id = std::move(id);
  d.at_m = prf_at_m(predictions, gold);
  d.at_5 = prf_at_5(predictions, gold);
  d.predictions = predictions.size();
  d.gold = gold.size();
  return d;
}

MetricSummary macro_average(std::span<const DocumentEval> docs) {
  MetricSummary s;
  double recall_sum = 0;
  std::size_t recall_docs = 0;
  for (const auto& d : docs) {
    if (d.gold == 0) continue;
    s.f1_at_5 += d.at_5.f1;
    s.f1_at_m += d.at_m.f1;
    ++s.documents;
    if (d.recall_at_n) {
      recall_sum += *d.recall_at_n;
      ++recall_docs;
    }
  }
  if (s.documents) {
    s.f1_at_5 /= static_cast<double>(s.documents);
    s.f1_at_m /= static_cast<double>(s.documents);
  }
  if (recall_docs) s.recall_at_n = recall_sum / static_cast<double>(recall_docs);
  return s;
}

}  // namespace kpforge
