#include "model.hpp"

#include "error.hpp"

namespace kpforge {

namespace {

ParamStore& mut(const ParamStore& p) { return const_cast<ParamStore&>(p); }

void declare_stage1(ParamStore& params, const EncoderConfig& cfg) {
  ToyEncoder::declare(params, "encoder", cfg);
  ProjectionHead::declare(params, "head.doc", cfg.embed_dim, cfg.proj_dim);
  ProjectionHead::declare(params, "head.phrase", cfg.embed_dim, cfg.proj_dim);
  Decoder::declare(params, "decoder", cfg.vocab_size, cfg.embed_dim);
}

void declare_reranker(ParamStore& params, const EncoderConfig& cfg) {
  ToyEncoder::declare(params, "doc_encoder", cfg);
  ToyEncoder::declare(params, "phrase_encoder", cfg);
  ProjectionHead::declare(params, "head.doc_abs", cfg.embed_dim, cfg.proj_dim);
  ProjectionHead::declare(params, "head.abs", cfg.embed_dim, cfg.proj_dim);
}

CheckpointHeader load_header(const std::filesystem::path& dir, const std::string& kind) {
  auto header = read_checkpoint_header(dir);
  if (header.kind != kind)
    data_error("checkpoint " + dir.string() + " holds a " + header.kind + " model, expected " + kind);
  return header;
}

}  // namespace

void round_to_storage(ParamStore& params) {
  for (auto& p : params.params())
    for (auto& v : p.value.data) v = static_cast<double>(static_cast<float>(v));
}

Stage1Model Stage1Model::create(const EncoderConfig& config, Vocabulary vocab) {
  Stage1Model m;
  m.config = config;
  m.config.vocab_size = vocab.size();
  m.config.validate();
  m.vocab = std::move(vocab);
  declare_stage1(m.params, m.config);
  init_uniform(m.params, m.config.seed);
  round_to_storage(m.params);
  return m;
}

Stage1Model Stage1Model::load(const std::filesystem::path& dir) {
  auto header = load_header(dir, "stage1");
  Stage1Model m;
  m.config = header.encoder;
  m.vocab = std::move(header.vocabulary);
  m.fingerprint = header.config_fingerprint;
  declare_stage1(m.params, m.config);
  load_checkpoint_params(dir, m.params);
  return m;
}

void Stage1Model::save(const std::filesystem::path& dir, const std::string& fp, const nlohmann::json& metadata) const {
  save_checkpoint(dir, CheckpointHeader{"stage1", fp, config, vocab, metadata}, params);
}

ToyEncoder Stage1Model::encoder() const { return ToyEncoder(mut(params), "encoder", config); }
ProjectionHead Stage1Model::doc_head() const { return ProjectionHead(mut(params), "head.doc"); }
ProjectionHead Stage1Model::phrase_head() const { return ProjectionHead(mut(params), "head.phrase"); }
Decoder Stage1Model::decoder() const {
  return Decoder(mut(params), "decoder", mut(params).get("encoder.embedding"));
}

RerankerModel RerankerModel::create(const EncoderConfig& config, Vocabulary vocab) {
  RerankerModel m;
  m.config = config;
  m.config.vocab_size = vocab.size();
  m.config.validate();
  m.vocab = std::move(vocab);
  declare_reranker(m.params, m.config);
  init_uniform(m.params, m.config.seed);
  // Both towers start from the same weights, like two copies of one
  // pretrained encoder, and diverge during training.
  m.params.get("phrase_encoder.embedding").value = m.params.get("doc_encoder.embedding").value;
  m.params.get("head.abs.weight").value = m.params.get("head.doc_abs.weight").value;
  m.params.get("head.abs.bias").value = m.params.get("head.doc_abs.bias").value;
  round_to_storage(m.params);
  return m;
}

RerankerModel RerankerModel::load(const std::filesystem::path& dir) {
  auto header = load_header(dir, "reranker");
  RerankerModel m;
  m.config = header.encoder;
  m.vocab = std::move(header.vocabulary);
  m.fingerprint = header.config_fingerprint;
  declare_reranker(m.params, m.config);
  load_checkpoint_params(dir, m.params);
  return m;
}

void RerankerModel::save(const std::filesystem::path& dir, const std::string& fp,
                         const nlohmann::json& metadata) const {
  save_checkpoint(dir, CheckpointHeader{"reranker", fp, config, vocab, metadata}, params);
}

ToyEncoder RerankerModel::doc_encoder() const { return ToyEncoder(mut(params), "doc_encoder", config); }
ToyEncoder RerankerModel::phrase_encoder() const { return ToyEncoder(mut(params), "phrase_encoder", config); }
ProjectionHead RerankerModel::doc_head() const { return ProjectionHead(mut(params), "head.doc_abs"); }
ProjectionHead RerankerModel::phrase_head() const { return ProjectionHead(mut(params), "head.abs"); }

}  // namespace kpforge
