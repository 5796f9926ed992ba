#include "tagger.hpp"

#include <algorithm>
#include <unordered_map>

#include "error.hpp"
#include "tokenizer.hpp"

namespace kpforge {

std::string_view to_string(TagCategory c) {
  switch (c) {
    case TagCategory::Indep: return "INDEP";
    case TagCategory::Dep: return "DEP";
    case TagCategory::StartDep: return "START_DEP";
    case TagCategory::EndDep: return "END_DEP";
    case TagCategory::Invalid: return "INVALID";
  }
  return "INVALID";
}

TagSetTable TagSetTable::defaults() {
  return {{"CD", "FW", "GW", "NN*", "VB*", "JJ*", "RB*", "ADD"},
          {"CC", "POS", "HYPH", "IN"},
          {"RP"},
          {"DT", "AFX", "LS"}};
}

TagSetTable TagSetTable::noun_phrases_only() {
  auto t = defaults();
  t.indep = {"NN*"};
  return t;
}

const std::vector<std::string>& penn_tag_inventory() {
  static const std::vector<std::string> tags = {
      "CC",  "CD",  "DT",   "EX",  "FW",  "IN",  "JJ",   "JJR", "JJS",  "LS",  "MD",    "NN",
      "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB",  "RBR",  "RBS", "RP",    "SYM",
      "TO",  "UH",  "VB",   "VBD", "VBG", "VBN", "VBP",  "VBZ", "WDT",  "WP",  "WP$",   "WRB",
      "$",   "#",   "``",   "''",  "-LRB-", "-RRB-", ",", ".", ":", "ADD", "AFX", "GW", "HYPH", "NFP", "XX"};
  return tags;
}

bool tag_matches(std::string_view pattern, std::string_view tag) {
  if (!pattern.empty() && pattern.back() == '*') return tag.starts_with(pattern.substr(0, pattern.size() - 1));
  return pattern == tag;
}

TagCategory classify_tag(std::string_view tag, const TagSetTable& table) {
  auto in = [&](const std::vector<std::string>& set) {
    return std::any_of(set.begin(), set.end(), [&](const std::string& p) { return tag_matches(p, tag); });
  };
  if (in(table.indep)) return TagCategory::Indep;
  if (in(table.dep)) return TagCategory::Dep;
  if (in(table.start_dep)) return TagCategory::StartDep;
  if (in(table.end_dep)) return TagCategory::EndDep;
  return TagCategory::Invalid;
}

bool tag_sets_disjoint(const TagSetTable& table) {
  const std::vector<const std::vector<std::string>*> sets = {&table.indep, &table.dep, &table.start_dep,
                                                             &table.end_dep};
  for (const auto& tag : penn_tag_inventory()) {
    int hits = 0;
    for (const auto* set : sets)
      hits += std::any_of(set->begin(), set->end(), [&](const std::string& p) { return tag_matches(p, tag); });
    if (hits > 1) return false;
  }
  return true;
}

namespace {

const std::unordered_map<std::string, std::string>& lexicon() {
  static const std::unordered_map<std::string, std::string> lex = [] {
    std::unordered_map<std::string, std::string> m;
    auto add = [&](std::initializer_list<const char*> words, const char* tag) {
      for (const char* w : words) m.emplace(w, tag);
    };
    add({"the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any", "no", "another",
         "either", "neither", "such"},
        "DT");
    add({"all", "both", "half"}, "PDT");
    add({"of",      "in",      "on",      "at",      "by",      "for",     "with",    "from",       "into",
         "onto",    "over",    "under",   "about",   "above",   "across",  "after",   "against",    "along",
         "among",   "amongst", "around",  "as",      "before",  "behind",  "below",   "beneath",    "beside",
         "besides", "between", "beyond",  "despite", "during",  "except",  "inside",  "like",       "near",
         "outside", "per",     "since",   "through", "throughout", "toward", "towards", "upon",     "via",
         "within",  "without", "whether", "if",      "because", "although", "though", "while",     "than",
         "unless",  "until",   "whereas", "wherein", "whereby", "amid",    "versus",  "unlike",     "onto",
         "beyond",  "till",    "vs"},
        "IN");
    add({"and", "or", "but", "nor", "yet", "plus"}, "CC");
    add({"to"}, "TO");
    add({"i", "we", "you", "he", "she", "it", "they", "me", "us", "him", "them", "itself", "themselves",
         "ourselves", "himself", "herself", "one's"},
        "PRP");
    add({"my", "our", "your", "his", "her", "its", "their"}, "PRP$");
    add({"which", "that's", "whichever", "whatever"}, "WDT");
    add({"who", "whom", "what"}, "WP");
    add({"whose"}, "WP$");
    add({"how", "when", "where", "why", "whenever", "wherever"}, "WRB");
    add({"can", "could", "may", "might", "must", "shall", "should", "will", "would", "cannot"}, "MD");
    add({"is", "has", "does"}, "VBZ");
    add({"are", "have", "do", "am"}, "VBP");
    add({"was", "were", "had", "did"}, "VBD");
    add({"be"}, "VB");
    add({"been"}, "VBN");
    add({"being"}, "VBG");
    add({"not", "also", "very", "often", "however", "thus", "then", "here", "only", "well", "even", "still",
         "just", "already", "hence", "therefore", "moreover", "furthermore", "further", "again", "always",
         "never", "sometimes", "usually", "too", "almost", "quite", "rather", "instead", "so", "indeed", "now",
         "once", "twice", "together", "else", "otherwise", "nevertheless", "nonetheless", "meanwhile"},
        "RB");
    add({"more", "less"}, "RBR");
    add({"most", "least"}, "RBS");
    add({"there"}, "EX");
    add({"up", "out", "off", "down", "away", "back"}, "RP");
    add({"zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
         "twelve", "hundred", "thousand", "million", "billion", "dozen", "first", "second", "third"},
        "CD");
    add({"many", "few", "several", "various", "other", "new", "same", "different", "own", "much", "good",
         "high", "low", "large", "small", "novel", "main", "key", "recent", "previous", "existing", "certain",
         "better", "best", "higher", "lower", "larger", "smaller"},
        "JJ");
    add({"oh", "yes"}, "UH");
    add({"etc"}, "FW");
    add({".", "?", "!"}, ".");
    add({","}, ",");
    add({":", ";", "...", "--"}, ":");
    add({"(", "[", "{"}, "-LRB-");
    add({")", "]", "}"}, "-RRB-");
    add({"-"}, "HYPH");
    add({"`", "``", "\""}, "``");
    add({"'", "''"}, "''");
    add({"$"}, "$");
    add({"#"}, "#");
    add({"&"}, "CC");
    add({"%"}, "NN");
    add({"'s"}, "POS");
    return m;
  }();
  return lex;
}

bool has_digit(std::string_view w) {
  return std::any_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::string baseline_tag(std::string_view word) {
  const std::string w = to_lower_ascii(word);
  if (auto it = lexicon().find(w); it != lexicon().end()) return it->second;
  if (has_digit(w)) return "CD";
  if (is_punct_token(w)) return "SYM";
  const auto n = w.size();
  if (n > 4 && w.ends_with("ly")) return "RB";
  if (n > 4 && w.ends_with("ing")) return "VBG";
  if (n > 3 && w.ends_with("ed")) return "VBD";
  for (std::string_view suffix : {"ous", "ive", "able", "ible", "ful", "less", "ical"})
    if (n > suffix.size() + 2 && w.ends_with(suffix)) return "JJ";
  if (n > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is")) return "NNS";
  return "NN";
}

std::vector<TaggedToken> tag_tokens(std::span<const std::string> tokens,
                                    const std::optional<std::vector<std::string>>& pre_tags) {
  std::vector<TaggedToken> out;
  out.reserve(tokens.size());
  if (pre_tags) {
    if (pre_tags->size() != tokens.size())
      data_error("tag_tokens: " + std::to_string(pre_tags->size()) + " tags for " + std::to_string(tokens.size()) +
                 " tokens");
    for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back({tokens[i], (*pre_tags)[i]});
    return out;
  }
  for (const auto& t : tokens) out.push_back({t, baseline_tag(t)});
  return out;
}

}  // namespace kpforge
