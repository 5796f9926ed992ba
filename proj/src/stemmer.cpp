#include "stemmer.hpp"

#include <mutex>
#include <sstream>

namespace kpforge {
namespace {

// Port of the reference algorithm. The buffer b holds the word; k is the
// offset of the last character and j is a general-purpose marker set by ends().
class PorterState {
 public:
  explicit PorterState(std::string word) : b_(std::move(word)), k_(static_cast<int>(b_.size()) - 1) {}

  std::string run() {
    if (k_ <= 1) return b_;
    step1ab();
    if (k_ > 0) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    return b_.substr(0, static_cast<std::size_t>(k_ + 1));
  }

 private:
  bool cons(int i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b[0..j].
  int m() const {
    int n = 0;
    int i = 0;
    while (true) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i)
      if (!cons(i)) return true;
    return false;
  }

  bool doublec(int j) const {
    if (j < 1) return false;
    if (b_[j] != b_[j - 1]) return false;
    return cons(j);
  }

  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    const char ch = b_[i];
    return !(ch == 'w' || ch == 'x' || ch == 'y');
  }

  bool ends(std::string_view s) {
    const int len = static_cast<int>(s.size());
    if (len > k_ + 1) return false;
    if (std::string_view(b_).substr(static_cast<std::size_t>(k_ - len + 1), s.size()) != s) return false;
    j_ = k_ - len;
    return true;
  }

  void setto(std::string_view s) {
    b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
    k_ = j_ + static_cast<int>(s.size());
    b_.resize(static_cast<std::size_t>(k_ + 1));
  }

  void r(std::string_view s) {
    if (m() > 0) setto(s);
  }

  void truncate_to_k() { b_.resize(static_cast<std::size_t>(k_ + 1)); }

  void step1ab() {
    if (b_[k_] == 's') {
      if (ends("sses")) {
        k_ -= 2;
      } else if (ends("ies")) {
        setto("i");
      } else if (b_[k_ - 1] != 's') {
        --k_;
      }
      truncate_to_k();
    }
    if (ends("eed")) {
      if (m() > 0) {
        --k_;
        truncate_to_k();
      }
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k_ = j_;
      truncate_to_k();
      if (ends("at")) {
        setto("ate");
      } else if (ends("bl")) {
        setto("ble");
      } else if (ends("iz")) {
        setto("ize");
      } else if (doublec(k_)) {
        --k_;
        const char ch = b_[k_];
        if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
        truncate_to_k();
      } else if (j_ = k_; m() == 1 && cvc(k_)) {
        setto("e");
      }
    }
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_[k_] = 'i';
  }

  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };

  // Applies the first rule whose suffix matches; r() only fires when m() > 0.
  template <std::size_t N>
  void apply_first(const Rule (&rules)[N]) {
    for (const auto& rule : rules) {
      if (ends(rule.suffix)) {
        r(rule.replacement);
        return;
      }
    }
  }

  void step2() {
    if (k_ < 1) return;
    switch (b_[k_ - 1]) {
      case 'a': {
        static const Rule rules[] = {{"ational", "ate"}, {"tional", "tion"}};
        apply_first(rules);
        break;
      }
      case 'c': {
        static const Rule rules[] = {{"enci", "ence"}, {"anci", "ance"}};
        apply_first(rules);
        break;
      }
      case 'e': {
        static const Rule rules[] = {{"izer", "ize"}};
        apply_first(rules);
        break;
      }
      case 'l': {
        static const Rule rules[] = {
            {"bli", "ble"}, {"alli", "al"}, {"entli", "ent"}, {"eli", "e"}, {"ousli", "ous"}};
        apply_first(rules);
        break;
      }
      case 'o': {
        static const Rule rules[] = {{"ization", "ize"}, {"ation", "ate"}, {"ator", "ate"}};
        apply_first(rules);
        break;
      }
      case 's': {
        static const Rule rules[] = {
            {"alism", "al"}, {"iveness", "ive"}, {"fulness", "ful"}, {"ousness", "ous"}};
        apply_first(rules);
        break;
      }
      case 't': {
        static const Rule rules[] = {{"aliti", "al"}, {"iviti", "ive"}, {"biliti", "ble"}};
        apply_first(rules);
        break;
      }
      case 'g': {
        static const Rule rules[] = {{"logi", "log"}};
        apply_first(rules);
        break;
      }
      default:
        break;
    }
  }

  void step3() {
    switch (b_[k_]) {
      case 'e': {
        static const Rule rules[] = {{"icate", "ic"}, {"ative", ""}, {"alize", "al"}};
        apply_first(rules);
        break;
      }
      case 'i': {
        static const Rule rules[] = {{"iciti", "ic"}};
        apply_first(rules);
        break;
      }
      case 'l': {
        static const Rule rules[] = {{"ical", "ic"}, {"ful", ""}};
        apply_first(rules);
        break;
      }
      case 's': {
        static const Rule rules[] = {{"ness", ""}};
        apply_first(rules);
        break;
      }
      default:
        break;
    }
  }

  void step4() {
    if (k_ < 1) return;
    bool matched = false;
    switch (b_[k_ - 1]) {
      case 'a': matched = ends("al"); break;
      case 'c': matched = ends("ance") || ends("ence"); break;
      case 'e': matched = ends("er"); break;
      case 'i': matched = ends("ic"); break;
      case 'l': matched = ends("able") || ends("ible"); break;
      case 'n': matched = ends("ant") || ends("ement") || ends("ment") || ends("ent"); break;
      case 'o':
        matched = (ends("ion") && j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't')) || ends("ou");
        break;
      case 's': matched = ends("ism"); break;
      case 't': matched = ends("ate") || ends("iti"); break;
      case 'u': matched = ends("ous"); break;
      case 'v': matched = ends("ive"); break;
      case 'z': matched = ends("ize"); break;
      default: break;
    }
    if (matched && m() > 1) {
      k_ = j_;
      truncate_to_k();
    }
  }

  void step5() {
    j_ = k_;
    if (b_[k_] == 'e') {
      const int a = m();
      if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
    }
    if (b_[k_] == 'l' && doublec(k_) && m() > 1) --k_;
    truncate_to_k();
  }

  std::string b_;
  int k_;
  int j_ = 0;
};

bool is_lower_alpha(std::string_view w) {
  for (char c : w)
    if (c < 'a' || c > 'z') return false;
  return !w.empty();
}

}  // namespace

std::string stem_word(std::string_view word) {
  if (word.size() <= 2 || !is_lower_alpha(word)) return std::string(word);
  return PorterState(std::string(word)).run();
}

std::string stem_phrase(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += stem_word(t);
  }
  return out;
}

std::string stem_phrase(std::string_view phrase) {
  std::istringstream in{std::string(phrase)};
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(std::move(t));
  return stem_phrase(tokens);
}

std::string StemCache::stem(const std::string& word) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = map_.find(word); it != map_.end()) return it->second;
  }
  std::string s = stem_word(word);
  std::unique_lock lock(mutex_);
  map_.emplace(word, s);
  return s;
}

std::size_t StemCache::size() const {
  std::shared_lock lock(mutex_);
  return map_.size();
}

}  // namespace kpforge
