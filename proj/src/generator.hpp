#pragma once

#include <span>
#include <string>
#include <vector>

#include "autograd.hpp"
#include "encoder.hpp"

namespace kpforge {

/// Absent keyphrases joined by SEP and terminated by EOS.
std::vector<int> build_target_sequence(const std::vector<std::vector<std::string>>& phrases, const Vocabulary& vocab);

/// Splits a token sequence at SEP/EOS (stopping at the first EOS) into its
/// non-empty phrases.
std::vector<std::vector<int>> split_sequence(std::span<const int> tokens);

/// Gated recurrent decoder conditioned on the document vector c:
///   s_0 = tanh(W_init c + b_init)
///   x_t = [s_{t-1}; emb(y_{t-1}); c]
///   u_t = sigmoid(W_u x_t + b_u),  g_t = tanh(W_g x_t + b_g)
///   s_t = (1 - u_t) * s_{t-1} + u_t * g_t
///   p(y_t | y_<t) = softmax(W_o s_t + b_o)
/// Token embeddings are shared with the encoder.
class Decoder {
 public:
  Decoder(ParamStore& store, const std::string& prefix, Param& embedding);
  static void declare(ParamStore& store, const std::string& prefix, std::size_t vocab_size, std::size_t dim);

  /// State after consuming BOS.
  Var start(Tape& tape, Var doc_vector) const;
  Var advance(Tape& tape, Var state, int token, Var doc_vector) const;
  Var logits(Tape& tape, Var state) const;

  /// Length-normalized teacher-forced negative log-likelihood. Tokens after
  /// the first EOS are ignored.
  Var mle_loss(Tape& tape, Var doc_vector, std::span<const int> target) const;

  std::size_t vocab_size() const { return out_weight_->value.rows; }

 private:
  Param* embedding_;
  Param* init_weight_;
  Param* init_bias_;
  Param* update_weight_;
  Param* update_bias_;
  Param* cand_weight_;
  Param* cand_bias_;
  Param* out_weight_;
  Param* out_bias_;
};

double mle_loss(const Decoder& decoder, std::span<const double> doc_vector, std::span<const int> target);

/// Autoregressive next-token model driven by beam_search. A state is opaque
/// to the search.
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual int eos() const = 0;
  virtual std::vector<double> initial_state() const = 0;
  virtual std::vector<double> next_log_probs(const std::vector<double>& state) const = 0;
  virtual std::vector<double> advance(const std::vector<double>& state, int token) const = 0;
};

class DecoderSequenceModel final : public SequenceModel {
 public:
  DecoderSequenceModel(const Decoder& decoder, std::vector<double> doc_vector)
      : decoder_(decoder), doc_vector_(std::move(doc_vector)) {}
  std::size_t vocab_size() const override { return decoder_.vocab_size(); }
  int eos() const override { return kEos; }
  std::vector<double> initial_state() const override;
  std::vector<double> next_log_probs(const std::vector<double>& state) const override;
  std::vector<double> advance(const std::vector<double>& state, int token) const override;

 private:
  const Decoder& decoder_;
  std::vector<double> doc_vector_;
};

struct Beam {
  std::vector<int> tokens;  // finished beams end with EOS
  double log_prob = 0;
  bool finished = false;
};

/// Orders by descending log-prob, then earlier finish (unfinished last),
/// then lexicographic token ids.
bool beam_before(const Beam& a, const Beam& b);

struct BeamSearchOptions {
  std::size_t beam_size = 50;
  std::size_t max_len = 64;
  // Rank by log_prob / length instead of raw log_prob.
  bool length_normalize = false;
};

/// Standard beam search. Every step expands all live beams over the full
/// vocabulary; finished beams stay in the pool and compete with live ones.
/// Returns at most beam_size beams, best first.
std::vector<Beam> beam_search(const SequenceModel& model, const BeamSearchOptions& options);

struct Stage1Model;
struct TokenizedDocument;

struct GeneratedPhrase {
  std::string surface;
  std::string stemmed;
};

struct Overgeneration {
  std::vector<Beam> beams;
  std::vector<GeneratedPhrase> candidates;  // unique by stem, best beam first
};

/// Splits every beam into phrases and keeps the first occurrence of each
/// stemmed form, scanning beams best-first. Phrases containing reserved
/// tokens are dropped.
std::vector<GeneratedPhrase> collect_phrases(std::span<const Beam> beams, const Vocabulary& vocab);

Overgeneration overgenerate(const Stage1Model& model, const TokenizedDocument& doc, const BeamSearchOptions& options);

/// Detokenized beam text, phrases separated by " ; ".
std::string beam_text(const Beam& beam, const Vocabulary& vocab);

}  // namespace kpforge
