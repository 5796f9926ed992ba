#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kpforge {

struct LabeledDocument {
  std::string id;
  std::string title;
  std::string abstract;
  // Gold keyphrases in file order, deduplicated by stemmed form.
  std::vector<std::string> keyphrases;
  // Optional pre-tokenized, pre-tagged input (same length when both present).
  std::optional<std::vector<std::string>> tokens;
  std::optional<std::vector<std::string>> pos_tags;

  std::string text() const { return title + " " + abstract; }
};

struct TokenizedDocument {
  std::string source;
  std::vector<std::string> tokens;
  std::vector<std::string> stems;
  std::optional<std::vector<std::string>> pos_tags;
};

struct LoadError {
  std::size_t line = 0;
  std::string message;
};

struct Corpus {
  std::vector<LabeledDocument> documents;
  std::vector<LoadError> errors;
};

/// Reads a JSONL corpus. Malformed records are collected in `errors` with
/// their 1-based line numbers; an unreadable file throws a data error.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::istream& in);

/// Tokenized keyphrase stem key, e.g. "Generation Models" -> "gener model".
std::string phrase_key(std::string_view phrase);

TokenizedDocument tokenize(const LabeledDocument& doc);

struct KeyphrasePartition {
  std::vector<std::string> present;
  std::vector<std::string> absent;
};

/// Present iff the stemmed token sequence occurs contiguously in doc.stems.
KeyphrasePartition partition_keyphrases(const TokenizedDocument& doc, std::span<const std::string> keyphrases);

struct CorpusStats {
  double kp_mean = 0;     // #KP_mu
  double kp_stddev = 0;   // #KP_sigma, population
  double kp_length = 0;   // |KP|_mu
  double pct_absent = 0;  // % absent
  std::size_t samples = 0;
};

CorpusStats corpus_stats(std::span<const LabeledDocument> corpus);

void write_jsonl_document(std::ostream& out, const LabeledDocument& doc);

}  // namespace kpforge
