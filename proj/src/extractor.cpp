#include "extractor.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

#include "error.hpp"
#include "parallel.hpp"
#include "tagger.hpp"
#include "tokenizer.hpp"

namespace kpforge {

void TrainConfig::validate() const {
  if (!(tau > 0)) usage_error("tau must be > 0");
  if (!(lambda >= 0 && lambda <= 1)) usage_error("lambda must be within [0, 1]");
  if (!(loop.lr > 0)) usage_error("lr must be > 0");
  if (loop.batch_size == 0) usage_error("batch_size must be >= 1");
  if (loop.epochs == 0) usage_error("epochs must be >= 1");
  if (!(loop.warmup >= 0 && loop.warmup <= 1)) usage_error("warmup must be within [0, 1]");
}

double contrastive_loss(std::span<const double> z_doc, const std::vector<std::vector<double>>& z_pos,
                        const std::vector<std::vector<double>>& z_neg, double tau) {
  std::vector<double> pos, neg;
  for (const auto& z : z_pos) pos.push_back(cosine(z_doc, z));
  for (const auto& z : z_neg) neg.push_back(cosine(z_doc, z));
  return contrastive_from_similarities(pos, neg, tau);
}

double joint_loss(double mle, double cl, double lambda) { return mle + lambda * cl; }

PreparedDocument prepare_document(const LabeledDocument& doc, const MinerConfig& miner) {
  PreparedDocument out;
  out.id = doc.id;
  out.tokens = tokenize(doc);
  const auto tagged = tag_tokens(out.tokens.tokens, out.tokens.pos_tags);
  out.spans = mine_spans(tagged, miner);
  out.candidates = mine_candidates(tagged, miner);
  const auto parts = partition_keyphrases(out.tokens, doc.keyphrases);
  for (const auto& kp : parts.present) out.present_gold.push_back(phrase_key(kp));
  for (const auto& kp : parts.absent) {
    out.absent_gold.push_back(phrase_key(kp));
    out.absent_phrases.push_back(tokenize_text(kp));
  }
  out.labels = label_candidates(out.candidates, parts.present, doc.id);
  return out;
}

Vocabulary build_vocabulary(std::span<const PreparedDocument> docs) {
  std::vector<std::vector<std::string>> lists;
  for (const auto& d : docs) {
    lists.push_back(d.tokens.tokens);
    for (const auto& p : d.absent_phrases) lists.push_back(p);
  }
  return Vocabulary::build(lists);
}

namespace {

Var project_spans(Tape& tape, const ProjectionHead& head, Var hidden, std::span<const PhraseCandidate> spans) {
  std::vector<Var> rows;
  rows.reserve(spans.size());
  for (const auto& s : spans) rows.push_back(ops::rows_sum(tape, hidden, s.start + 1, s.end + 1));
  return head.apply(tape, ops::stack_rows(tape, rows));
}

}  // namespace

std::optional<ExampleLoss> stage1_loss(Tape& tape, const Stage1Model& model, std::span<const int> ids,
                                       std::span<const PhraseCandidate> positives,
                                       std::span<const PhraseCandidate> negatives, std::span<const int> target,
                                       double tau, double lambda) {
  if (ids.empty()) return std::nullopt;
  const bool has_cl = !positives.empty();
  const bool has_mle = !target.empty();
  if (!has_cl && !has_mle) return std::nullopt;

  Var hidden = model.encoder().encode(tape, ids);
  Var h0 = ops::row(tape, hidden, 0);
  ExampleLoss out;
  std::vector<Var> terms;
  std::vector<double> weights;
  if (has_mle) {
    Var mle = model.decoder().mle_loss(tape, h0, target);
    out.mle = tape.scalar(mle);
    terms.push_back(mle);
    weights.push_back(1.0);
  }
  if (has_cl) {
    Var z_doc = model.doc_head().apply(tape, h0);
    const auto phrase_head = model.phrase_head();
    Var pos = ops::cosine_rows(tape, z_doc, project_spans(tape, phrase_head, hidden, positives));
    Var neg = negatives.empty()
                  ? tape.constant(Matrix(1, 0))
                  : ops::cosine_rows(tape, z_doc, project_spans(tape, phrase_head, hidden, negatives));
    Var cl = ops::contrastive(tape, pos, neg, tau);
    out.cl = tape.scalar(cl);
    terms.push_back(cl);
    weights.push_back(lambda);
  }
  out.total = ops::weighted_sum(tape, terms, weights);
  return out;
}

Stage1Result train_stage1(std::span<const PreparedDocument> train, std::span<const PreparedDocument> valid,
                          const EncoderConfig& encoder, const TrainConfig& config) {
  config.validate();
  if (train.empty()) usage_error("training corpus is empty");
  Stage1Result result{Stage1Model::create(encoder, build_vocabulary(train)), {}, 0, 0};
  Stage1Model& model = result.model;

  std::vector<std::vector<int>> ids(train.size()), targets(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    ids[i] = model.vocab.ids(train[i].tokens.tokens);
    if (!train[i].absent_phrases.empty())
      targets[i] = build_target_sequence(train[i].absent_phrases, model.vocab);
    else
      ++result.docs_without_absent;
    if (train[i].labels.positives.empty()) ++result.docs_without_positives;
  }

  const ExampleLossFn loss_fn = [&](std::size_t i, Tape& tape) {
    return stage1_loss(tape, model, ids[i], train[i].labels.positives, train[i].labels.negatives, targets[i],
                       config.tau, config.lambda);
  };
  ValidateFn validate;
  if (!valid.empty()) validate = [&] { return present_validation_f1m(model, valid, config.jobs); };
  result.summary = run_training(model.params, train.size(), loss_fn, validate, config.loop);
  round_to_storage(model.params);
  return result;
}

std::vector<ScoredPhrase> aggregate_max(std::vector<ScoredPhrase> scored) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<ScoredPhrase> out;
  for (auto& s : scored) {
    auto [it, inserted] = index.emplace(s.stemmed, out.size());
    if (inserted)
      out.push_back(std::move(s));
    else if (s.score > out[it->second].score)
      out[it->second] = std::move(s);
  }
  sort_scored(out);
  return out;
}

std::vector<ScoredPhrase> score_present(const Stage1Model& model, const PreparedDocument& doc) {
  if (doc.spans.empty() || doc.tokens.tokens.empty()) return {};
  const auto ids = model.vocab.ids(doc.tokens.tokens);
  Tape tape(false);
  Var hidden = model.encoder().encode(tape, ids);
  Var z_doc = model.doc_head().apply(tape, ops::row(tape, hidden, 0));
  const Matrix zd = tape.value(z_doc);
  const Matrix& z = tape.value(project_spans(tape, model.phrase_head(), hidden, doc.spans));
  std::vector<ScoredPhrase> scored;
  scored.reserve(doc.spans.size());
  for (std::size_t i = 0; i < doc.spans.size(); ++i)
    scored.push_back({doc.spans[i].stemmed, doc.spans[i].surface, cosine(zd.row(0), z.row(i))});
  return aggregate_max(std::move(scored));
}

std::vector<ScoredPhrase> predict_present(const Stage1Model& model, const PreparedDocument& doc, double threshold,
                                          std::size_t min_k) {
  const auto scored = score_present(model, doc);
  return select_by_threshold(scored, threshold, min_k);
}

std::vector<CalibrationDoc> present_calibration(const Stage1Model& model, std::span<const PreparedDocument> docs,
                                                int jobs) {
  std::vector<CalibrationDoc> out(docs.size());
  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    out[i].scored = score_present(model, docs[i]);
    out[i].gold = docs[i].present_gold;
  });
  return out;
}

double present_validation_f1m(const Stage1Model& model, std::span<const PreparedDocument> docs, int jobs) {
  const auto calib = present_calibration(model, docs, jobs);
  bool usable = false;
  for (const auto& c : calib) usable = usable || (!c.scored.empty() && !c.gold.empty());
  if (!usable) return 0.0;
  const double threshold = calibrate_threshold(calib);
  std::vector<DocumentEval> evals;
  for (std::size_t i = 0; i < calib.size(); ++i) {
    std::vector<std::string> pred;
    for (const auto& p : select_by_threshold(calib[i].scored, threshold)) pred.push_back(p.stemmed);
    evals.push_back(evaluate_document(docs[i].id, pred, calib[i].gold));
  }
  return macro_average(evals).f1_at_m;
}

}  // namespace kpforge
