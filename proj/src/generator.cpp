#include "generator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "corpus.hpp"
#include "error.hpp"
#include "model.hpp"
#include "stemmer.hpp"

namespace kpforge {

std::vector<int> build_target_sequence(const std::vector<std::vector<std::string>>& phrases,
                                       const Vocabulary& vocab) {
  std::vector<int> out;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (i > 0) out.push_back(kSep);
    for (const auto& w : phrases[i]) out.push_back(vocab.id(w));
  }
  out.push_back(kEos);
  return out;
}

std::vector<std::vector<int>> split_sequence(std::span<const int> tokens) {
  std::vector<std::vector<int>> phrases;
  std::vector<int> current;
  for (int t : tokens) {
    if (t == kSep || t == kEos) {
      if (!current.empty()) phrases.push_back(std::move(current));
      current.clear();
      if (t == kEos) return phrases;
      continue;
    }
    current.push_back(t);
  }
  if (!current.empty()) phrases.push_back(std::move(current));
  return phrases;
}

Decoder::Decoder(ParamStore& store, const std::string& prefix, Param& embedding)
    : embedding_(&embedding),
      init_weight_(&store.get(prefix + ".init.weight")),
      init_bias_(&store.get(prefix + ".init.bias")),
      update_weight_(&store.get(prefix + ".update.weight")),
      update_bias_(&store.get(prefix + ".update.bias")),
      cand_weight_(&store.get(prefix + ".candidate.weight")),
      cand_bias_(&store.get(prefix + ".candidate.bias")),
      out_weight_(&store.get(prefix + ".out.weight")),
      out_bias_(&store.get(prefix + ".out.bias")) {}

void Decoder::declare(ParamStore& store, const std::string& prefix, std::size_t vocab_size, std::size_t dim) {
  store.add(prefix + ".init.weight", dim, dim);
  store.add(prefix + ".init.bias", 1, dim);
  store.add(prefix + ".update.weight", dim, 3 * dim);
  store.add(prefix + ".update.bias", 1, dim);
  store.add(prefix + ".candidate.weight", dim, 3 * dim);
  store.add(prefix + ".candidate.bias", 1, dim);
  store.add(prefix + ".out.weight", vocab_size, dim);
  store.add(prefix + ".out.bias", 1, vocab_size);
}

Var Decoder::start(Tape& tape, Var doc_vector) const {
  Var s0 = ops::tanh(tape, ops::linear(tape, doc_vector, *init_weight_, init_bias_));
  return advance(tape, s0, kBos, doc_vector);
}

Var Decoder::advance(Tape& tape, Var state, int token, Var doc_vector) const {
  const int ids[1] = {token};
  Var e = ops::embed(tape, *embedding_, ids);
  const Var parts[3] = {state, e, doc_vector};
  Var x = ops::concat_cols(tape, parts);
  Var u = ops::sigmoid(tape, ops::linear(tape, x, *update_weight_, update_bias_));
  Var g = ops::tanh(tape, ops::linear(tape, x, *cand_weight_, cand_bias_));
  return ops::add(tape, ops::mul(tape, ops::one_minus(tape, u), state), ops::mul(tape, u, g));
}

Var Decoder::logits(Tape& tape, Var state) const { return ops::linear(tape, state, *out_weight_, out_bias_); }

Var Decoder::mle_loss(Tape& tape, Var doc_vector, std::span<const int> target) const {
  if (target.empty()) usage_error("mle_loss: empty target");
  auto eos_it = std::find(target.begin(), target.end(), kEos);
  const auto length = static_cast<std::size_t>(eos_it == target.end() ? target.size() : eos_it - target.begin() + 1);
  for (std::size_t t = 0; t < length; ++t)
    if (target[t] < 0 || static_cast<std::size_t>(target[t]) >= vocab_size())
      usage_error("mle_loss: target token " + std::to_string(target[t]) + " outside vocabulary");

  std::vector<Var> terms;
  terms.reserve(length);
  Var state = start(tape, doc_vector);
  for (std::size_t t = 0; t < length; ++t) {
    terms.push_back(ops::nll(tape, logits(tape, state), target[t]));
    if (t + 1 < length) state = advance(tape, state, target[t], doc_vector);
  }
  const std::vector<double> weights(length, 1.0 / static_cast<double>(length));
  return ops::weighted_sum(tape, terms, weights);
}

double mle_loss(const Decoder& decoder, std::span<const double> doc_vector, std::span<const int> target) {
  Tape tape(false);
  Var c = tape.constant(Matrix::row_vector(doc_vector));
  return tape.scalar(decoder.mle_loss(tape, c, target));
}

std::vector<double> DecoderSequenceModel::initial_state() const {
  Tape tape(false);
  Var c = tape.constant(Matrix::row_vector(doc_vector_));
  return tape.value(decoder_.start(tape, c)).data;
}

std::vector<double> DecoderSequenceModel::next_log_probs(const std::vector<double>& state) const {
  Tape tape(false);
  auto lp = tape.value(decoder_.logits(tape, tape.constant(Matrix::row_vector(state)))).data;
  log_softmax_inplace(lp);
  return lp;
}

std::vector<double> DecoderSequenceModel::advance(const std::vector<double>& state, int token) const {
  Tape tape(false);
  Var c = tape.constant(Matrix::row_vector(doc_vector_));
  return tape.value(decoder_.advance(tape, tape.constant(Matrix::row_vector(state)), token, c)).data;
}

namespace {

struct SearchBeam {
  Beam beam;
  double rank_score = 0;
  std::size_t finish_step = static_cast<std::size_t>(-1);
  std::vector<double> state;
};

bool search_before(const SearchBeam& a, const SearchBeam& b) {
  if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
  if (a.finish_step != b.finish_step) return a.finish_step < b.finish_step;
  return a.beam.tokens < b.beam.tokens;
}

double rank_score(double log_prob, std::size_t length, bool normalize) {
  return normalize ? log_prob / static_cast<double>(std::max<std::size_t>(length, 1)) : log_prob;
}

}  // namespace

bool beam_before(const Beam& a, const Beam& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  if (a.finished != b.finished) return a.finished;
  if (a.finished && a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

std::vector<Beam> beam_search(const SequenceModel& model, const BeamSearchOptions& options) {
  if (options.beam_size == 0) usage_error("beam_size must be >= 1");
  const std::size_t width = options.beam_size;
  const int eos = model.eos();

  std::vector<SearchBeam> live(1);
  live[0].state = model.initial_state();
  std::vector<SearchBeam> finished;

  for (std::size_t step = 0; step < options.max_len && !live.empty(); ++step) {
    std::vector<SearchBeam> pool = finished;
    for (const auto& b : live) {
      const auto lp = model.next_log_probs(b.state);
      // Only a beam's own top `width` continuations can survive the global cut.
      std::vector<SearchBeam> expansions;
      expansions.reserve(lp.size());
      for (std::size_t v = 0; v < lp.size(); ++v) {
        SearchBeam c;
        c.beam.tokens = b.beam.tokens;
        c.beam.tokens.push_back(static_cast<int>(v));
        c.beam.log_prob = b.beam.log_prob + lp[v];
        c.beam.finished = static_cast<int>(v) == eos;
        c.rank_score = rank_score(c.beam.log_prob, c.beam.tokens.size(), options.length_normalize);
        if (c.beam.finished) c.finish_step = step;
        expansions.push_back(std::move(c));
      }
      const auto keep = std::min(width, expansions.size());
      std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep), expansions.end(),
                        search_before);
      expansions.resize(keep);
      for (auto& e : expansions) {
        e.state = b.state;
        pool.push_back(std::move(e));
      }
    }
    const auto keep = std::min(width, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), search_before);
    pool.resize(keep);

    live.clear();
    finished.clear();
    for (auto& b : pool) {
      if (b.beam.finished) {
        finished.push_back(std::move(b));
      } else {
        b.state = model.advance(b.state, b.beam.tokens.back());
        live.push_back(std::move(b));
      }
    }
  }

  std::vector<SearchBeam> all = std::move(finished);
  for (auto& b : live) all.push_back(std::move(b));
  std::sort(all.begin(), all.end(), search_before);
  std::vector<Beam> out;
  out.reserve(all.size());
  for (auto& b : all) out.push_back(std::move(b.beam));
  return out;
}

std::vector<GeneratedPhrase> collect_phrases(std::span<const Beam> beams, const Vocabulary& vocab) {
  std::vector<GeneratedPhrase> out;
  std::unordered_set<std::string> seen;
  for (const auto& beam : beams) {
    for (const auto& phrase : split_sequence(beam.tokens)) {
      if (std::any_of(phrase.begin(), phrase.end(), [](int t) { return Vocabulary::is_reserved(t); })) continue;
      std::vector<std::string> words;
      for (int t : phrase) words.push_back(vocab.word(t));
      GeneratedPhrase g;
      g.stemmed = stem_phrase(words);
      if (g.stemmed.empty() || !seen.insert(g.stemmed).second) continue;
      for (std::size_t i = 0; i < words.size(); ++i) g.surface += (i ? " " : "") + words[i];
      out.push_back(std::move(g));
    }
  }
  return out;
}

Overgeneration overgenerate(const Stage1Model& model, const TokenizedDocument& doc, const BeamSearchOptions& options) {
  Overgeneration out;
  if (doc.tokens.empty()) return out;
  const auto ids = model.vocab.ids(doc.tokens);
  const auto encoded = encode_tokens(model.encoder(), ids);
  const Decoder decoder = model.decoder();
  DecoderSequenceModel seq(decoder, encoded.doc_vector);
  out.beams = beam_search(seq, options);
  out.candidates = collect_phrases(out.beams, model.vocab);
  return out;
}

std::string beam_text(const Beam& beam, const Vocabulary& vocab) {
  std::string out;
  for (int t : beam.tokens) {
    if (t == kEos) break;
    if (!out.empty()) out += ' ';
    out += t == kSep ? ";" : vocab.word(t);
  }
  return out;
}

}  // namespace kpforge
