#include "reranker.hpp"

#include <algorithm>
#include <unordered_set>

#include "error.hpp"
#include "parallel.hpp"
#include "tokenizer.hpp"

namespace kpforge {

std::size_t RerankExample::positives() const {
  return static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
}

RerankExample make_rerank_example(const PreparedDocument& doc, std::vector<GeneratedPhrase> candidates) {
  RerankExample ex;
  ex.doc_id = doc.id;
  ex.doc_tokens = doc.tokens.tokens;
  ex.absent_gold = doc.absent_gold;
  const std::unordered_set<std::string> gold(doc.absent_gold.begin(), doc.absent_gold.end());
  for (const auto& c : candidates) ex.positive.push_back(gold.contains(c.stemmed));
  ex.candidates = std::move(candidates);
  return ex;
}

RerankCorpus filter_rerank_examples(std::vector<RerankExample> examples) {
  RerankCorpus out;
  for (auto& ex : examples) {
    if (ex.positives() == 0)
      ++out.excluded;
    else
      out.examples.push_back(std::move(ex));
  }
  return out;
}

RerankCorpus build_rerank_corpus(const Stage1Model& stage1, std::span<const PreparedDocument> docs,
                                 const BeamSearchOptions& beam, int jobs) {
  std::vector<RerankExample> all(docs.size());
  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    all[i] = make_rerank_example(docs[i], overgenerate(stage1, docs[i].tokens, beam).candidates);
  });
  return filter_rerank_examples(std::move(all));
}

namespace {

std::vector<int> phrase_ids(const Vocabulary& vocab, const std::string& surface) {
  return vocab.ids(tokenize_text(surface));
}

// Start-token vector of each phrase run through the phrase-side encoder,
// projected; one row per phrase.
Var project_candidates(Tape& tape, const RerankerModel& model, const std::vector<std::vector<int>>& ids,
                       const std::vector<std::size_t>& which) {
  const auto encoder = model.phrase_encoder();
  std::vector<Var> rows;
  rows.reserve(which.size());
  for (std::size_t k : which) rows.push_back(ops::row(tape, encoder.encode(tape, ids[k]), 0));
  return model.phrase_head().apply(tape, ops::stack_rows(tape, rows));
}

Var project_document(Tape& tape, const RerankerModel& model, std::span<const int> doc_ids) {
  return model.doc_head().apply(tape, ops::row(tape, model.doc_encoder().encode(tape, doc_ids), 0));
}

}  // namespace

std::optional<ExampleLoss> rerank_loss(Tape& tape, const RerankerModel& model, std::span<const int> doc_ids,
                                       const std::vector<std::vector<int>>& candidate_ids,
                                       const std::vector<bool>& positive, double tau) {
  if (candidate_ids.size() != positive.size()) usage_error("rerank_loss: mask length differs from candidate count");
  std::vector<std::size_t> pos, neg;
  for (std::size_t k = 0; k < positive.size(); ++k) {
    if (candidate_ids[k].empty()) continue;
    (positive[k] ? pos : neg).push_back(k);
  }
  if (pos.empty() || doc_ids.empty()) return std::nullopt;
  Var z_doc = project_document(tape, model, doc_ids);
  Var pos_sims = ops::cosine_rows(tape, z_doc, project_candidates(tape, model, candidate_ids, pos));
  Var neg_sims = neg.empty() ? tape.constant(Matrix(1, 0))
                             : ops::cosine_rows(tape, z_doc, project_candidates(tape, model, candidate_ids, neg));
  ExampleLoss out;
  out.total = ops::contrastive(tape, pos_sims, neg_sims, tau);
  out.cl = tape.scalar(out.total);
  return out;
}

Stage2Result train_stage2(std::span<const RerankExample> train, std::span<const RerankExample> valid,
                          const Vocabulary& vocab, const EncoderConfig& encoder, const TrainConfig& config) {
  config.validate();
  if (train.empty()) usage_error("rerank corpus is empty: no training document has a correct generated candidate");
  Stage2Result result{RerankerModel::create(encoder, vocab), {}};
  RerankerModel& model = result.model;

  std::vector<std::vector<int>> doc_ids(train.size());
  std::vector<std::vector<std::vector<int>>> cand_ids(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    doc_ids[i] = model.vocab.ids(train[i].doc_tokens);
    for (const auto& c : train[i].candidates) cand_ids[i].push_back(phrase_ids(model.vocab, c.surface));
  }
  const ExampleLossFn loss_fn = [&](std::size_t i, Tape& tape) {
    return rerank_loss(tape, model, doc_ids[i], cand_ids[i], train[i].positive, config.tau);
  };
  ValidateFn validate;
  if (!valid.empty()) validate = [&] { return absent_validation_f1m(model, valid, config.jobs); };
  result.summary = run_training(model.params, train.size(), loss_fn, validate, config.loop);
  round_to_storage(model.params);
  return result;
}

std::vector<ScoredPhrase> score_absent(const RerankerModel& model, std::span<const std::string> doc_tokens,
                                       std::span<const GeneratedPhrase> candidates) {
  std::vector<ScoredPhrase> out;
  if (candidates.empty() || doc_tokens.empty()) return out;
  Tape tape(false);
  const Matrix zd = tape.value(project_document(tape, model, model.vocab.ids(doc_tokens)));
  std::vector<std::vector<int>> ids;
  std::vector<std::size_t> which;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    ids.push_back(phrase_ids(model.vocab, candidates[k].surface));
    if (!ids.back().empty()) which.push_back(k);
  }
  if (which.empty()) return out;
  const Matrix& z = tape.value(project_candidates(tape, model, ids, which));
  for (std::size_t r = 0; r < which.size(); ++r) {
    const auto& c = candidates[which[r]];
    out.push_back({c.stemmed, c.surface, cosine(zd.row(0), z.row(r))});
  }
  sort_scored(out);
  return out;
}

std::vector<ScoredPhrase> predict_absent(const RerankerModel& model, std::span<const std::string> doc_tokens,
                                         std::span<const GeneratedPhrase> candidates, double threshold,
                                         std::size_t min_k) {
  const auto scored = score_absent(model, doc_tokens, candidates);
  return select_by_threshold(scored, threshold, min_k);
}

std::vector<CalibrationDoc> absent_calibration(const RerankerModel& model, std::span<const RerankExample> examples,
                                               int jobs) {
  std::vector<CalibrationDoc> out(examples.size());
  parallel_for(examples.size(), jobs, [&](std::size_t i) {
    out[i].scored = score_absent(model, examples[i].doc_tokens, examples[i].candidates);
    out[i].gold = examples[i].absent_gold;
  });
  return out;
}

double absent_validation_f1m(const RerankerModel& model, std::span<const RerankExample> examples, int jobs) {
  const auto calib = absent_calibration(model, examples, jobs);
  bool usable = false;
  for (const auto& c : calib) usable = usable || (!c.scored.empty() && !c.gold.empty());
  if (!usable) return 0.0;
  const double threshold = calibrate_threshold(calib);
  std::vector<DocumentEval> evals;
  for (std::size_t i = 0; i < calib.size(); ++i) {
    std::vector<std::string> pred;
    for (const auto& p : select_by_threshold(calib[i].scored, threshold)) pred.push_back(p.stemmed);
    evals.push_back(evaluate_document(examples[i].doc_id, pred, calib[i].gold));
  }
  return macro_average(evals).f1_at_m;
}

}  // namespace kpforge
