#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "autograd.hpp"
#include "tensor.hpp"

namespace kpforge {

enum SpecialToken : int { kPad = 0, kUnk = 1, kBos = 2, kEos = 3, kSep = 4 };

class Vocabulary {
 public:
  Vocabulary();  // reserved tokens only
  explicit Vocabulary(std::vector<std::string> words);  // words[0..4] must be the reserved tokens

  /// Reserved tokens followed by every distinct word, sorted.
  static Vocabulary build(const std::vector<std::vector<std::string>>& token_lists);

  int id(const std::string& word) const;  // OOV -> kUnk
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  std::vector<int> ids(std::span<const std::string> tokens) const;

  static bool is_reserved(int id) { return id >= 0 && id <= kSep; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 32;
  std::size_t proj_dim = 32;
  bool context_mixing = true;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Uniform [-0.1, 0.1] initialization of every parameter, in store order.
void init_uniform(ParamStore& store, std::uint64_t seed, double bound = 0.1);

/// Token encoder: an embedding table, optionally followed by one mixing layer
/// where each output row is the softmax(similarity)-weighted mean of all
/// input rows. The sequence is prefixed with BOS, whose output row serves as
/// the document vector.
class ToyEncoder {
 public:
  ToyEncoder(ParamStore& store, const std::string& prefix, const EncoderConfig& config);
  static void declare(ParamStore& store, const std::string& prefix, const EncoderConfig& config);

  /// Returns a (T+1) x d node: row 0 is h_0 (BOS), row i is token i-1.
  Var encode(Tape& tape, std::span<const int> token_ids) const;
  Param& embedding() const { return *embedding_; }

 private:
  Param* embedding_;
  bool mixing_;
};

/// tanh(W x + b).
class ProjectionHead {
 public:
  ProjectionHead(ParamStore& store, const std::string& prefix);
  static void declare(ParamStore& store, const std::string& prefix, std::size_t in_dim, std::size_t out_dim);
  Var apply(Tape& tape, Var x) const;

 private:
  Param* weight_;
  Param* bias_;
};

struct EncodedDocument {
  Matrix token_vectors;             // T x d, row i = h_{i+1}
  std::vector<double> doc_vector;   // h_0
};

EncodedDocument encode_tokens(const ToyEncoder& encoder, std::span<const int> token_ids);

/// Sum of token vectors for tokens [start, end).
std::vector<double> pool_span(const EncodedDocument& doc, std::size_t start, std::size_t end);

/// tanh(W x + b) on plain values.
std::vector<double> project(const Matrix& weight, std::span<const double> bias, std::span<const double> x);

/// Cosine similarity; 0 (with a warning on stderr) when either side is zero.
double cosine(std::span<const double> u, std::span<const double> v);

}  // namespace kpforge
