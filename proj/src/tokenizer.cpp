#include "tokenizer.hpp"

#include <algorithm>

namespace kpforge {
namespace {

enum class CharClass { Space, Punct, Word };

CharClass classify(unsigned char c) {
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return CharClass::Space;
  if (c < 0x80 && ((c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) || (c >= 0x5b && c <= 0x60) ||
                   (c >= 0x7b && c <= 0x7e)))
    return CharClass::Punct;
  return CharClass::Word;
}

}  // namespace

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::vector<std::string> tokenize_text(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  CharClass current_class = CharClass::Space;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const CharClass cls = classify(static_cast<unsigned char>(ch));
    if (cls != current_class) flush();
    current_class = cls;
    if (cls == CharClass::Space) continue;
    current += (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
  }
  flush();
  return tokens;
}

bool is_punct_token(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
    return classify(static_cast<unsigned char>(c)) == CharClass::Punct;
  });
}

std::string join(const std::vector<std::string>& parts, std::string_view sep, std::size_t begin, std::size_t end) {
  end = std::min(end, parts.size());
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace kpforge
