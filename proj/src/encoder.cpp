#include "encoder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <set>

#include "error.hpp"
#include "rng.hpp"

namespace kpforge {

namespace {
const std::vector<std::string> kReserved = {"<pad>", "<unk>", "<s>", "</s>", "<sep>"};
}

Vocabulary::Vocabulary() : Vocabulary(kReserved) {}

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  if (words_.size() < kReserved.size() || !std::equal(kReserved.begin(), kReserved.end(), words_.begin()))
    data_error("vocabulary does not start with the reserved tokens");
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<int>(i)).second) data_error("duplicate vocabulary entry: " + words_[i]);
  }
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& token_lists) {
  std::set<std::string> distinct;
  for (const auto& list : token_lists) distinct.insert(list.begin(), list.end());
  std::vector<std::string> words = kReserved;
  for (const auto& w : distinct)
    if (std::find(kReserved.begin(), kReserved.end(), w) == kReserved.end()) words.push_back(w);
  return Vocabulary(std::move(words));
}

int Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::ids(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

void EncoderConfig::validate() const {
  if (embed_dim < 2 || proj_dim < 2) usage_error("encoder dimensions must be >= 2");
  if (vocab_size < 5) usage_error("vocabulary must include the reserved tokens");
}

void init_uniform(ParamStore& store, std::uint64_t seed, double bound) {
  Rng rng(seed);
  for (auto& p : store.params())
    for (double& v : p.value.data) v = rng.uniform(-bound, bound);
}

ToyEncoder::ToyEncoder(ParamStore& store, const std::string& prefix, const EncoderConfig& config)
    : embedding_(&store.get(prefix + ".embedding")), mixing_(config.context_mixing) {}

void ToyEncoder::declare(ParamStore& store, const std::string& prefix, const EncoderConfig& config) {
  store.add(prefix + ".embedding", config.vocab_size, config.embed_dim);
}

Var ToyEncoder::encode(Tape& tape, std::span<const int> token_ids) const {
  if (token_ids.empty()) usage_error("encode_tokens: empty token list");
  std::vector<int> ids;
  ids.reserve(token_ids.size() + 1);
  ids.push_back(kBos);
  ids.insert(ids.end(), token_ids.begin(), token_ids.end());
  Var e = ops::embed(tape, *embedding_, ids);
  if (!mixing_) return e;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(embedding_->value.cols));
  Var weights = ops::softmax_rows(tape, ops::scale(tape, ops::matmul_nt(tape, e, e), inv_sqrt_d));
  return ops::matmul(tape, weights, e);
}

ProjectionHead::ProjectionHead(ParamStore& store, const std::string& prefix)
    : weight_(&store.get(prefix + ".weight")), bias_(&store.get(prefix + ".bias")) {}

void ProjectionHead::declare(ParamStore& store, const std::string& prefix, std::size_t in_dim,
                             std::size_t out_dim) {
  store.add(prefix + ".weight", out_dim, in_dim);
  store.add(prefix + ".bias", 1, out_dim);
}

Var ProjectionHead::apply(Tape& tape, Var x) const { return ops::tanh(tape, ops::linear(tape, x, *weight_, bias_)); }

EncodedDocument encode_tokens(const ToyEncoder& encoder, std::span<const int> token_ids) {
  Tape tape(false);
  const Matrix& h = tape.value(encoder.encode(tape, token_ids));
  EncodedDocument out;
  out.doc_vector.assign(h.row(0).begin(), h.row(0).end());
  out.token_vectors = Matrix(h.rows - 1, h.cols);
  std::copy(h.data.begin() + static_cast<std::ptrdiff_t>(h.cols), h.data.end(), out.token_vectors.data.begin());
  return out;
}

std::vector<double> pool_span(const EncodedDocument& doc, std::size_t start, std::size_t end) {
  if (start >= end || end > doc.token_vectors.rows)
    usage_error("pool_span: invalid span [" + std::to_string(start) + ", " + std::to_string(end) + ") for " +
                std::to_string(doc.token_vectors.rows) + " tokens");
  std::vector<double> out(doc.token_vectors.cols, 0.0);
  for (std::size_t r = start; r < end; ++r) {
    auto row = doc.token_vectors.row(r);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += row[c];
  }
  return out;
}

std::vector<double> project(const Matrix& weight, std::span<const double> bias, std::span<const double> x) {
  if (weight.cols != x.size() || weight.rows != bias.size())
    usage_error("project: W is " + weight.shape_string() + ", b has " + std::to_string(bias.size()) +
                ", x has " + std::to_string(x.size()));
  std::vector<double> out(weight.rows);
  for (std::size_t r = 0; r < weight.rows; ++r) out[r] = std::tanh(dot(weight.row(r), x) + bias[r]);
  return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) usage_error("cosine: dimension mismatch");
  const double nu = norm(u), nv = norm(v);
  if (nu == 0 || nv == 0) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) std::cerr << "warning: cosine similarity of a zero vector taken as 0\n";
    return 0.0;
  }
  return dot(u, v) / (nu * nv);
}

}  // namespace kpforge
