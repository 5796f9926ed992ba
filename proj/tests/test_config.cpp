#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "checkpoint.hpp"
#include "config.hpp"
#include "doctest.h"
#include "error.hpp"
#include "model.hpp"

using namespace kpforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("kpforge_test_config_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(dir);
  return dir;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Usage;
}

}  // namespace

TEST_CASE("defaults") {
  RunConfig c;
  CHECK(c.stage1.tau == 0.1);
  CHECK(c.stage1.lambda == 0.3);
  CHECK(c.stage2.tau == 0.1);
  CHECK(c.beam.beam_size == 50);
  CHECK(c.beam.max_len == 64);
  CHECK_FALSE(c.beam.length_normalize);
  CHECK(c.min_k == 5);
  CHECK(c.miner.max_ngram == 6);
  CHECK_FALSE(c.present_threshold);
}

TEST_CASE("set and get values") {
  RunConfig c;
  set_config_value(c, "tau", "0.25");
  set_config_value(c, "batch_size", " 16 ");
  set_config_value(c, "length_norm", "true");
  set_config_value(c, "seed", "7");
  set_config_value(c, "present_threshold", "0.125");
  CHECK(c.stage1.tau == 0.25);
  CHECK(c.stage1.loop.batch_size == 16);
  CHECK(c.beam.length_normalize);
  CHECK(c.encoder.seed == 7);
  CHECK(c.stage2.loop.seed == 7);
  CHECK(*c.present_threshold == 0.125);
  CHECK(get_config_value(c, "batch_size") == "16");

  set_config_value(c, "noun_phrases_only", "true");
  CHECK(classify_tag("VB", c.miner.table) != classify_tag("VB", TagSetTable::defaults()));

  try {
    set_config_value(c, "bogus", "1");
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Usage);
    const std::string msg = e.what();
    CHECK(msg.find("bogus") != std::string::npos);
    for (const auto& k : config_keys()) CHECK(msg.find(k) != std::string::npos);
  }
  CHECK(kind_of([&] { set_config_value(c, "epochs", "ten"); }) == ErrorKind::Usage);
  CHECK(kind_of([&] { set_config_value(c, "epochs", "-3"); }) == ErrorKind::Usage);
  CHECK(kind_of([&] { set_config_value(c, "jobs", "0"); }) == ErrorKind::Usage);
  CHECK(kind_of([&] { set_config_value(c, "length_norm", "maybe"); }) == ErrorKind::Usage);
}

TEST_CASE("parse and serialize round trip") {
  std::istringstream in("# run settings\n tau = 0.2  # inline\n\nepochs=3\ncorpus = data/train.jsonl\n");
  RunConfig c;
  parse_config(in, c);
  CHECK(c.stage1.tau == 0.2);
  CHECK(c.stage1.loop.epochs == 3);
  CHECK(c.corpus == "data/train.jsonl");

  set_config_value(c, "lr", "0.0123456789012345");
  set_config_value(c, "absent_threshold", "-0.3");
  const std::string text = serialize_config(c);
  RunConfig back;
  std::istringstream again(text);
  parse_config(again, back);
  CHECK(serialize_config(back) == text);
  CHECK(back.stage1.loop.lr == c.stage1.loop.lr);
  CHECK(config_fingerprint(back) == config_fingerprint(c));

  std::istringstream bad("tau 0.2\n");
  try {
    parse_config(bad, c, "x.cfg");
    FAIL("malformed line accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("x.cfg:1") != std::string::npos);
  }
  CHECK(kind_of([] { load_config("/nonexistent/kpforge.cfg"); }) == ErrorKind::Usage);
}

TEST_CASE("fingerprint covers settings only") {
  RunConfig a, b;
  b.corpus = "elsewhere.jsonl";
  b.output = "out";
  set_config_value(b, "jobs", "4");
  CHECK(config_fingerprint(a) == config_fingerprint(b));
  set_config_value(b, "tau", "0.2");
  CHECK(config_fingerprint(a) != config_fingerprint(b));
  RunConfig s;
  set_config_value(s, "seed", "43");
  CHECK(config_fingerprint(a) != config_fingerprint(s));
}

TEST_CASE("environment seed override") {
  RunConfig c;
  ::setenv("KPFORGE_SEED", "99", 1);
  apply_environment(c);
  CHECK(c.seed == 99);
  CHECK(c.encoder.seed == 99);
  ::setenv("KPFORGE_SEED", "x", 1);
  CHECK(kind_of([&] { apply_environment(c); }) == ErrorKind::Usage);
  ::unsetenv("KPFORGE_SEED");
  RunConfig d;
  apply_environment(d);
  CHECK(d.seed == 42);
}

TEST_CASE("checkpoint round trip and tamper detection") {
  EncoderConfig enc;
  enc.embed_dim = 4;
  enc.proj_dim = 3;
  auto model = Stage1Model::create(enc, Vocabulary::build({{"alpha", "beta", "gamma"}}));
  const auto dir = scratch("ckpt");
  model.save(dir, "fp123", nlohmann::json{{"note", "x"}});
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "params.bin"));

  const auto loaded = Stage1Model::load(dir);
  CHECK(loaded.fingerprint == "fp123");
  CHECK(loaded.vocab.words() == model.vocab.words());
  CHECK(loaded.config.embed_dim == 4);
  REQUIRE(loaded.params.params().size() == model.params.params().size());
  for (std::size_t i = 0; i < model.params.params().size(); ++i) {
    CHECK(loaded.params.params()[i].name == model.params.params()[i].name);
    CHECK(loaded.params.params()[i].value.data == model.params.params()[i].value.data);
  }
  CHECK(read_checkpoint_header(dir).metadata.at("note") == "x");

  CHECK(kind_of([&] { RerankerModel::load(dir); }) == ErrorKind::Data);
  CHECK(kind_of([&] { Stage1Model::load(dir / "missing"); }) == ErrorKind::Data);

  const auto flipped = scratch("flip");
  fs::copy(dir, flipped);
  {
    std::fstream f(flipped / "params.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(9);
    f.put('\x7f');
  }
  CHECK(kind_of([&] { Stage1Model::load(flipped); }) == ErrorKind::Data);

  const auto truncated = scratch("trunc");
  fs::copy(dir, truncated);
  fs::resize_file(truncated / "params.bin", fs::file_size(truncated / "params.bin") - 4);
  CHECK(kind_of([&] { Stage1Model::load(truncated); }) == ErrorKind::Data);

  const auto garbled = scratch("garbled");
  fs::copy(dir, garbled);
  std::ofstream(garbled / "manifest.json") << "{ not json";
  CHECK(kind_of([&] { Stage1Model::load(garbled); }) == ErrorKind::Data);

  // A model declared with different shapes must refuse the blob.
  ParamStore other;
  other.add("encoder.embedding", 3, 3);
  CHECK(kind_of([&] { load_checkpoint_params(dir, other); }) == ErrorKind::Data);

  for (const auto& d : {dir, flipped, truncated, garbled}) fs::remove_all(d);
}

TEST_CASE("float32 storage rounding is idempotent") {
  ParamStore s;
  auto& p = s.add("p", 1, 3);
  p.value.data = {0.1, 1.0 / 3.0, -2.5};
  round_to_storage(s);
  CHECK(p.value.data[0] == static_cast<double>(0.1f));
  const auto once = p.value.data;
  round_to_storage(s);
  CHECK(p.value.data == once);
}
