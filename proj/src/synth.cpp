#include "synth.hpp"

#include <algorithm>
#include <fstream>
#include <string>
#include <unordered_set>

#include "error.hpp"
#include "rng.hpp"
#include "stemmer.hpp"
#include "tagger.hpp"

namespace kpforge {

namespace {

using Phrase = std::vector<std::string>;

class WordMaker {
 public:
  explicit WordMaker(Rng& rng) : rng_(rng) {}

  std::string make() {
    static const std::vector<std::string> onsets = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z"};
    static const std::vector<std::string> vowels = {"a", "i", "o", "u"};
    for (;;) {
      std::string w;
      const std::size_t syllables = 2 + rng_.below(2);
      for (std::size_t s = 0; s < syllables; ++s) w += rng_.pick(onsets) + rng_.pick(vowels);
      if (w.size() > 2 && w.back() == 'u' && w[w.size() - 2] == 'o') continue;
      if (stem_word(w) != w || baseline_tag(w) != "NN") continue;
      if (used_.insert(w).second) return w;
    }
  }

  Phrase phrase(std::size_t length) {
    Phrase p;
    for (std::size_t i = 0; i < length; ++i) p.push_back(make());
    return p;
  }

 private:
  Rng& rng_;
  std::unordered_set<std::string> used_;
};

std::string join_words(const Phrase& p) {
  std::string out;
  for (const auto& w : p) out += (out.empty() ? "" : " ") + w;
  return out;
}

std::size_t phrase_length(Rng& rng) {
  const double u = rng.uniform();
  return u < 0.2 ? 1 : (u < 0.8 ? 2 : 3);
}

struct Topic {
  std::vector<Phrase> present;
  std::vector<Phrase> absent;
  std::vector<std::string> cues;  // cues[i] signals absent[i]
};

// Picks k distinct indices in increasing order.
std::vector<std::size_t> choose(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  rng.shuffle(idx);
  idx.resize(std::min(k, n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

LabeledDocument make_document(Rng& rng, const Topic& topic, const std::vector<Phrase>& fillers, std::size_t n,
                              const SynthConfig& cfg) {
  static const std::vector<std::string> joiners = {",", "with", "and", "of", ";"};
  static const std::vector<std::string> openers = {"we study", "this work presents", "it uses", "we propose",
                                                   "they compare"};

  auto present = choose(rng, topic.present.size(), cfg.present_per_doc);
  rng.shuffle(present);
  const auto absent = choose(rng, topic.absent.size(), cfg.absent_per_doc);

  std::vector<const Phrase*> distractors;
  for (std::size_t i = 0; i < cfg.distractors_per_doc; ++i) distractors.push_back(&rng.pick(fillers));

  LabeledDocument doc;
  doc.id = "synth-" + std::to_string(n);
  doc.title = join_words(topic.present[present[0]]) + " for " + join_words(*distractors[0]);

  // One sentence per present keyphrase, each paired with a distractor.
  std::vector<std::string> sentences;
  for (std::size_t i = 0; i < present.size(); ++i) {
    std::string s = rng.pick(openers) + " " + join_words(topic.present[present[i]]);
    const Phrase& d = *distractors[i % distractors.size()];
    const std::string& joiner = rng.pick(joiners);
    s += (joiner == "," || joiner == ";" ? " " + joiner + " " : " " + joiner + " ") + join_words(d) + " .";
    sentences.push_back(std::move(s));
  }
  for (std::size_t a : absent) sentences.push_back("results hold via " + topic.cues[a] + " .");
  rng.shuffle(sentences);
  for (const auto& s : sentences) doc.abstract += (doc.abstract.empty() ? "" : " ") + s;

  for (std::size_t p : present) doc.keyphrases.push_back(join_words(topic.present[p]));
  for (std::size_t a : absent) doc.keyphrases.push_back(join_words(topic.absent[a]));
  return doc;
}

}  // namespace

SynthCorpus generate_synthetic(const SynthConfig& cfg) {
  if (cfg.documents == 0 || cfg.topics == 0 || cfg.valid + cfg.test >= cfg.documents)
    usage_error("synthetic corpus needs documents > valid + test and at least one topic");
  if (cfg.present_per_doc == 0 || cfg.present_per_doc > cfg.present_pool || cfg.absent_per_doc > cfg.absent_pool)
    usage_error("synthetic per-document counts exceed the topic pools");

  Rng rng(cfg.seed);
  WordMaker words(rng);
  std::vector<Topic> topics(cfg.topics);
  for (auto& t : topics) {
    for (std::size_t i = 0; i < cfg.present_pool; ++i) t.present.push_back(words.phrase(phrase_length(rng)));
    for (std::size_t i = 0; i < cfg.absent_pool; ++i) {
      t.absent.push_back(words.phrase(2));
      t.cues.push_back(words.make());
    }
  }
  std::vector<Phrase> fillers;
  for (std::size_t i = 0; i < 40; ++i) fillers.push_back(words.phrase(phrase_length(rng)));

  std::vector<LabeledDocument> all;
  for (std::size_t n = 0; n < cfg.documents; ++n)
    all.push_back(make_document(rng, topics[rng.below(topics.size())], fillers, n, cfg));

  SynthCorpus out;
  const std::size_t train_n = cfg.documents - cfg.valid - cfg.test;
  out.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(train_n));
  out.valid.assign(all.begin() + static_cast<std::ptrdiff_t>(train_n),
                   all.begin() + static_cast<std::ptrdiff_t>(train_n + cfg.valid));
  out.test.assign(all.begin() + static_cast<std::ptrdiff_t>(train_n + cfg.valid), all.end());
  return out;
}

void write_corpus(const std::filesystem::path& path, std::span<const LabeledDocument> docs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) data_error("cannot write corpus: " + path.string());
  for (const auto& d : docs) write_jsonl_document(out, d);
  if (!out) data_error("failed writing corpus: " + path.string());
}

}  // namespace kpforge
