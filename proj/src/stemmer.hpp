#pragma once

#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kpforge {

/// Classic (1980) Porter stemmer, matching the reference C implementation
/// including its two documented departures ("bli" -> "ble", "logi" -> "log").
/// Words of length <= 2 and words containing anything other than a-z are
/// returned unchanged.
std::string stem_word(std::string_view word);

/// Stems each token and joins with single spaces.
std::string stem_phrase(std::span<const std::string> tokens);

/// Convenience overload: splits `phrase` on whitespace first.
std::string stem_phrase(std::string_view phrase);

/// Memoizing wrapper around stem_word. Safe for concurrent use.
class StemCache {
 public:
  std::string stem(const std::string& word);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> map_;
};

}  // namespace kpforge
