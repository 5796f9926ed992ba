#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kpforge {

enum class TagCategory { Indep, Dep, StartDep, EndDep, Invalid };

std::string_view to_string(TagCategory c);

/// Tag patterns for the four mining categories. A trailing '*' matches any
/// tag with that prefix.
struct TagSetTable {
  std::vector<std::string> indep;
  std::vector<std::string> dep;
  std::vector<std::string> start_dep;
  std::vector<std::string> end_dep;

  static TagSetTable defaults();
  // Same as defaults() but with indep restricted to NN*.
  static TagSetTable noun_phrases_only();
};

struct TaggedToken {
  std::string word;
  std::string tag;
};

/// Penn Treebank tags as used by NLTK, plus the extended OntoNotes tags
/// (ADD, AFX, GW, HYPH, NFP, XX) referenced by the mining tag sets.
const std::vector<std::string>& penn_tag_inventory();

bool tag_matches(std::string_view pattern, std::string_view tag);

TagCategory classify_tag(std::string_view tag, const TagSetTable& table);

/// True when no inventory tag falls into two categories.
bool tag_sets_disjoint(const TagSetTable& table);

/// Lexicon + suffix-rule tag for a single lowercase token.
std::string baseline_tag(std::string_view word);

/// Pass-through when pre_tags is given (lengths must match), otherwise
/// baseline tagging.
std::vector<TaggedToken> tag_tokens(std::span<const std::string> tokens,
                                    const std::optional<std::vector<std::string>>& pre_tags = std::nullopt);

}  // namespace kpforge
