#include "corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "error.hpp"
#include "json.hpp"
#include "stemmer.hpp"
#include "tokenizer.hpp"

namespace kpforge {

using nlohmann::json;

namespace {

std::vector<std::string> string_array(const json& j, const char* key) {
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw std::invalid_argument(std::string("field \"") + key + "\" is not an array");
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_string()) throw std::invalid_argument(std::string("field \"") + key + "\" has a non-string element");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string string_field(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw std::invalid_argument(std::string("field \"") + key + "\" is not a string");
  return v.get<std::string>();
}

LabeledDocument parse_record(const std::string& line, std::size_t line_no) {
  const json j = json::parse(line);
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  for (const char* key : {"title", "abstract", "keyphrases"})
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing field \"") + key + "\"");

  LabeledDocument doc;
  doc.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : std::to_string(line_no);
  doc.title = string_field(j, "title");
  doc.abstract = string_field(j, "abstract");

  std::unordered_set<std::string> seen;
  for (auto& kp : string_array(j, "keyphrases")) {
    std::string key = phrase_key(kp);
    if (key.empty() || !seen.insert(key).second) continue;
    doc.keyphrases.push_back(std::move(kp));
  }
  if (j.contains("tokens")) doc.tokens = string_array(j, "tokens");
  if (j.contains("pos_tags")) {
    doc.pos_tags = string_array(j, "pos_tags");
    if (!doc.tokens) throw std::invalid_argument("\"pos_tags\" given without \"tokens\"");
    if (doc.tokens->size() != doc.pos_tags->size())
      throw std::invalid_argument("\"tokens\" and \"pos_tags\" differ in length");
  }
  return doc;
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      corpus.documents.push_back(parse_record(line, line_no));
    } catch (const std::exception& e) {
      corpus.errors.push_back({line_no, e.what()});
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) data_error("cannot read corpus file: " + path.string());
  return parse_corpus(in);
}

std::string phrase_key(std::string_view phrase) { return stem_phrase(tokenize_text(phrase)); }

TokenizedDocument tokenize(const LabeledDocument& doc) {
  TokenizedDocument out;
  out.source = doc.id;
  if (doc.tokens) {
    out.tokens.reserve(doc.tokens->size());
    for (const auto& t : *doc.tokens) out.tokens.push_back(to_lower_ascii(t));
    out.pos_tags = doc.pos_tags;
  } else {
    out.tokens = tokenize_text(doc.text());
  }
  out.stems.reserve(out.tokens.size());
  for (const auto& t : out.tokens) out.stems.push_back(stem_word(t));
  return out;
}

namespace {

bool contains_sequence(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    std::size_t k = 0;
    while (k < needle.size() && haystack[i + k] == needle[k]) ++k;
    if (k == needle.size()) return true;
  }
  return false;
}

}  // namespace

KeyphrasePartition partition_keyphrases(const TokenizedDocument& doc, std::span<const std::string> keyphrases) {
  KeyphrasePartition out;
  for (const auto& kp : keyphrases) {
    std::vector<std::string> stems;
    for (const auto& t : tokenize_text(kp)) stems.push_back(stem_word(t));
    (contains_sequence(doc.stems, stems) ? out.present : out.absent).push_back(kp);
  }
  return out;
}

CorpusStats corpus_stats(std::span<const LabeledDocument> corpus) {
  if (corpus.empty()) usage_error("corpus_stats: empty corpus");
  CorpusStats stats;
  stats.samples = corpus.size();
  double sum = 0, length_sum = 0;
  std::size_t length_docs = 0, total_kp = 0, absent_kp = 0;
  for (const auto& doc : corpus) {
    const double n = static_cast<double>(doc.keyphrases.size());
    sum += n;
    if (!doc.keyphrases.empty()) {
      // n-gram length counts whitespace-separated words of the raw phrase.
      double words = 0;
      for (const auto& kp : doc.keyphrases) {
        std::istringstream in(kp);
        for (std::string w; in >> w;) words += 1;
      }
      length_sum += words / n;
      ++length_docs;
    }
    const auto part = partition_keyphrases(tokenize(doc), doc.keyphrases);
    total_kp += doc.keyphrases.size();
    absent_kp += part.absent.size();
  }
  const double count = static_cast<double>(corpus.size());
  stats.kp_mean = sum / count;
  double var = 0;
  for (const auto& doc : corpus) {
    const double d = static_cast<double>(doc.keyphrases.size()) - stats.kp_mean;
    var += d * d;
  }
  stats.kp_stddev = std::sqrt(var / count);
  stats.kp_length = length_docs ? length_sum / static_cast<double>(length_docs) : 0.0;
  stats.pct_absent = total_kp ? 100.0 * static_cast<double>(absent_kp) / static_cast<double>(total_kp) : 0.0;
  return stats;
}

void write_jsonl_document(std::ostream& out, const LabeledDocument& doc) {
  json j;
  j["id"] = doc.id;
  j["title"] = doc.title;
  j["abstract"] = doc.abstract;
  j["keyphrases"] = doc.keyphrases;
  if (doc.tokens) j["tokens"] = *doc.tokens;
  if (doc.pos_tags) j["pos_tags"] = *doc.pos_tags;
  out << j.dump() << '\n';
}

}  // namespace kpforge
