#include <kpforge/kpforge.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string get(const kpf_config* c, const char* key) {
  char buf[512];
  size_t len = 0;
  REQUIRE(kpf_config_get(c, key, buf, sizeof buf, &len) == KPF_OK);
  return std::string(buf, len);
}

std::string stem(const char* word) {
  char buf[128];
  size_t len = 0;
  REQUIRE(kpf_stem_word(word, buf, sizeof buf, &len) == KPF_OK);
  return std::string(buf, len);
}

void collect(const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(line); }

}  // namespace

TEST_CASE("library basics") {
  CHECK(std::string(kpf_version()).size() > 0);
  CHECK(std::string(kpf_status_name(KPF_OK)) == "ok");
  CHECK(std::string(kpf_status_name(KPF_ERR_DATA)) != std::string(kpf_status_name(KPF_ERR_USAGE)));
  CHECK(kpf_command_count() >= 10);
  std::vector<std::string> commands;
  for (size_t i = 0; i < kpf_command_count(); ++i) commands.push_back(kpf_command_name(i));
  for (const char* c : {"mine", "train", "generate", "rerank-train", "calibrate", "predict", "eval", "stats"})
    CHECK(std::find(commands.begin(), commands.end(), c) != commands.end());
  CHECK(kpf_command_name(kpf_command_count()) == nullptr);
}

TEST_CASE("config through the C API") {
  kpf_config* c = nullptr;
  REQUIRE(kpf_config_create(&c) == KPF_OK);
  CHECK(get(c, "tau") == "0.1");
  CHECK(kpf_config_set(c, "tau", "0.5") == KPF_OK);
  CHECK(get(c, "tau") == "0.5");

  CHECK(kpf_config_set(c, "nonsense", "1") == KPF_ERR_USAGE);
  CHECK(std::string(kpf_last_error()).find("lambda") != std::string::npos);
  CHECK(kpf_config_set(nullptr, "tau", "1") == KPF_ERR_USAGE);

  char tiny[2];
  size_t len = 0;
  CHECK(kpf_config_get(c, "seed", tiny, sizeof tiny, &len) == KPF_ERR_USAGE);
  CHECK(len == 2);

  char* text = nullptr;
  REQUIRE(kpf_config_serialize(c, &text) == KPF_OK);
  CHECK(std::string(text).find("tau = 0.5\n") != std::string::npos);
  kpf_string_free(text);

  CHECK(kpf_config_key_count() > 20);
  CHECK(std::string(kpf_config_key_name(0)).size() > 0);
  CHECK(kpf_config_key_name(kpf_config_key_count()) == nullptr);

  char fp1[64], fp2[64];
  size_t l1 = 0, l2 = 0;
  REQUIRE(kpf_config_fingerprint(c, fp1, sizeof fp1, &l1) == KPF_OK);
  kpf_config_set(c, "output", "/somewhere/else");
  REQUIRE(kpf_config_fingerprint(c, fp2, sizeof fp2, &l2) == KPF_OK);
  CHECK(std::string(fp1, l1) == std::string(fp2, l2));

  CHECK(kpf_config_load(c, "/nonexistent/file.cfg") == KPF_ERR_USAGE);
  kpf_config_destroy(c);
}

TEST_CASE("stemming and metrics") {
  CHECK(stem("caresses") == "caress");
  CHECK(stem("relational") == "relat");
  char buf[128];
  size_t len = 0;
  REQUIRE(kpf_stem_phrase("Neural Networks", buf, sizeof buf, &len) == KPF_OK);
  CHECK(std::string(buf, len) == "neural network");

  const char* pred[] = {"neural networks", "graphs", "neural network"};
  const char* gold[] = {"Neural Network", "trees"};
  double f = -1;
  REQUIRE(kpf_f1_at_m(pred, 3, gold, 2, &f) == KPF_OK);
  CHECK(std::abs(f - 0.5) < 1e-15);
  REQUIRE(kpf_f1_at_5(pred, 3, gold, 2, &f) == KPF_OK);
  CHECK(std::abs(f - 2 * 0.2 * 0.5 / 0.7) < 1e-15);
  CHECK(kpf_f1_at_m(nullptr, 1, gold, 2, &f) == KPF_ERR_USAGE);
}

TEST_CASE("corpus handles") {
  kpf_corpus* corpus = nullptr;
  REQUIRE(kpf_corpus_load(KPF_TEST_DATA "/mini_corpus.jsonl", &corpus) == KPF_OK);
  CHECK(kpf_corpus_size(corpus) == 20);
  CHECK(kpf_corpus_error_count(corpus) == 0);
  kpf_corpus_stats stats{};
  REQUIRE(kpf_corpus_stats_compute(corpus, &stats) == KPF_OK);
  CHECK(stats.samples == 20);
  CHECK(std::abs(stats.kp_mean - 4.15) < 1e-12);
  kpf_corpus_destroy(corpus);

  kpf_corpus* missing = nullptr;
  CHECK(kpf_corpus_load("/nonexistent/corpus.jsonl", &missing) == KPF_ERR_DATA);
  CHECK(missing == nullptr);
  CHECK(std::string(kpf_last_error()).find("/nonexistent/corpus.jsonl") != std::string::npos);
}

TEST_CASE("end to end through kpf_run and a loaded model") {
  const fs::path dir = fs::temp_directory_path() / ("kpforge_capi_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  kpf_config* c = nullptr;
  REQUIRE(kpf_config_create(&c) == KPF_OK);
  std::vector<std::string> lines;

  kpf_config_set(c, "output", (dir / "data").c_str());
  REQUIRE(kpf_run("synth", c, collect, &lines) == KPF_OK);
  CHECK(fs::exists(dir / "data" / "train.jsonl"));

  kpf_config_set(c, "corpus", (dir / "data" / "train.jsonl").c_str());
  kpf_config_set(c, "valid_corpus", (dir / "data" / "valid.jsonl").c_str());
  kpf_config_set(c, "stage1_checkpoint", (dir / "stage1").c_str());
  kpf_config_set(c, "epochs", "1");
  REQUIRE(kpf_run("train", c, collect, &lines) == KPF_OK);
  CHECK(!lines.empty());

  kpf_model* model = nullptr;
  CHECK(kpf_model_load(c, &model) == KPF_ERR_USAGE);  // no threshold yet
  kpf_config_set(c, "present_threshold", "0.0");
  REQUIRE(kpf_model_load(c, &model) == KPF_OK);
  char* json = nullptr;
  REQUIRE(kpf_model_predict(model, "A title", "Some abstract text about things.", &json) == KPF_OK);
  const std::string out(json);
  CHECK(out.find("\"present\"") != std::string::npos);
  CHECK(out.find("\"absent\":[]") != std::string::npos);
  kpf_string_free(json);
  kpf_model_destroy(model);

  kpf_config_set(c, "stage1_checkpoint", (dir / "nowhere").c_str());
  CHECK(kpf_model_load(c, &model) == KPF_ERR_DATA);
  CHECK(std::string(kpf_last_error()).find((dir / "nowhere").string()) != std::string::npos);
  CHECK(kpf_run("no-such-command", c, nullptr, nullptr) == KPF_ERR_USAGE);

  kpf_config_destroy(c);
  fs::remove_all(dir);
}
