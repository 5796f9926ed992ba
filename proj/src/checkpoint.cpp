#include "checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "hash.hpp"

namespace kpforge {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string encode_params(const ParamStore& params, json& entries) {
  std::string blob;
  blob.reserve(params.scalar_count() * 4);
  for (const auto& p : params.params()) {
    entries.push_back({{"name", p.name}, {"shape", {p.value.rows, p.value.cols}}, {"offset", blob.size()}});
    for (double v : p.value.data) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int k = 0; k < 4; ++k) blob.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
    }
  }
  return blob;
}

json read_manifest(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) data_error("cannot read checkpoint manifest: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    data_error("malformed checkpoint manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace

void save_checkpoint(const fs::path& dir, const CheckpointHeader& header, const ParamStore& params) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) data_error("cannot create checkpoint directory " + dir.string() + ": " + ec.message());

  json entries = json::array();
  const std::string blob = encode_params(params, entries);
  json manifest = {
      {"format", "kpforge-checkpoint"},
      {"version", kCheckpointVersion},
      {"kind", header.kind},
      {"config_fingerprint", header.config_fingerprint},
      {"encoder",
       {{"vocab_size", header.encoder.vocab_size},
        {"embed_dim", header.encoder.embed_dim},
        {"proj_dim", header.encoder.proj_dim},
        {"context_mixing", header.encoder.context_mixing},
        {"seed", header.encoder.seed}}},
      {"params", entries},
      {"blob_bytes", blob.size()},
      {"checksum", hex64(fnv1a64(blob))},
      {"metadata", header.metadata},
      {"vocabulary", header.vocabulary.words()},
  };
  std::ofstream bin(dir / "params.bin", std::ios::binary | std::ios::trunc);
  bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  std::ofstream man(dir / "manifest.json", std::ios::trunc);
  man << manifest.dump(1) << '\n';
  if (!bin || !man) data_error("failed writing checkpoint to " + dir.string());
}

CheckpointHeader read_checkpoint_header(const fs::path& dir) {
  if (!fs::is_directory(dir)) data_error("checkpoint not found: " + dir.string());
  const json m = read_manifest(dir);
  try {
    if (m.at("format") != "kpforge-checkpoint") data_error("not a kpforge checkpoint: " + dir.string());
    if (m.at("version").get<int>() != kCheckpointVersion)
      data_error("unsupported checkpoint version " + m.at("version").dump() + " in " + dir.string());
    CheckpointHeader h;
    h.kind = m.at("kind").get<std::string>();
    h.config_fingerprint = m.at("config_fingerprint").get<std::string>();
    const auto& e = m.at("encoder");
    h.encoder.vocab_size = e.at("vocab_size").get<std::size_t>();
    h.encoder.embed_dim = e.at("embed_dim").get<std::size_t>();
    h.encoder.proj_dim = e.at("proj_dim").get<std::size_t>();
    h.encoder.context_mixing = e.at("context_mixing").get<bool>();
    h.encoder.seed = e.at("seed").get<std::uint64_t>();
    h.vocabulary = Vocabulary(m.at("vocabulary").get<std::vector<std::string>>());
    if (h.vocabulary.size() != h.encoder.vocab_size)
      data_error("checkpoint vocabulary size does not match encoder config in " + dir.string());
    h.metadata = m.value("metadata", json::object());
    return h;
  } catch (const json::exception& e) {
    data_error("malformed checkpoint manifest in " + dir.string() + ": " + e.what());
  }
}

void load_checkpoint_params(const fs::path& dir, ParamStore& params) {
  const json m = read_manifest(dir);
  std::ifstream in(dir / "params.bin", std::ios::binary);
  if (!in) data_error("cannot read checkpoint blob in " + dir.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string blob = ss.str();

  if (blob.size() != m.value("blob_bytes", std::size_t{0})) data_error("checkpoint blob size mismatch in " + dir.string());
  if (hex64(fnv1a64(blob)) != m.value("checksum", std::string()))
    data_error("checkpoint checksum mismatch in " + dir.string());

  const auto& entries = m.at("params");
  if (entries.size() != params.params().size())
    data_error("checkpoint has " + std::to_string(entries.size()) + " parameters, model expects " +
               std::to_string(params.params().size()));
  for (const auto& entry : entries) {
    const auto name = entry.at("name").get<std::string>();
    if (!params.contains(name)) data_error("unexpected parameter in checkpoint: " + name);
    Param& p = params.get(name);
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2 || shape[0] != p.value.rows || shape[1] != p.value.cols)
      data_error("shape mismatch for " + name + ": checkpoint " + entry.at("shape").dump() + ", model " +
                 p.value.shape_string());
    const auto offset = entry.at("offset").get<std::size_t>();
    if (offset + p.value.size() * 4 > blob.size()) data_error("parameter " + name + " overruns the blob");
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b)
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[offset + 4 * k + b])) << (8 * b);
      p.value.data[k] = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
}

}  // namespace kpforge
