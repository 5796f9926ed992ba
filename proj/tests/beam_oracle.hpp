#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "generator.hpp"
#include "rng.hpp"

namespace kpforge::testing {

// Next-token distribution is a fixed pseudo-random table keyed by the prefix.
class TableModel final : public SequenceModel {
 public:
  TableModel(std::size_t vocab, int eos, std::uint64_t seed, double sharpness = 2.0)
      : vocab_(vocab), eos_(eos), seed_(seed), sharpness_(sharpness) {}
  std::size_t vocab_size() const override { return vocab_; }
  int eos() const override { return eos_; }
  std::vector<double> initial_state() const override { return {}; }
  std::vector<double> advance(const std::vector<double>& state, int token) const override {
    auto next = state;
    next.push_back(token);
    return next;
  }
  std::vector<double> next_log_probs(const std::vector<double>& state) const override {
    std::uint64_t key = seed_;
    for (double t : state) key = key * 1000003u + static_cast<std::uint64_t>(t) + 1;
    Rng rng(key);
    std::vector<double> logits(vocab_);
    for (auto& l : logits) l = rng.uniform(-sharpness_, sharpness_);
    double m = *std::max_element(logits.begin(), logits.end()), z = 0;
    for (double l : logits) z += std::exp(l - m);
    for (auto& l : logits) l = l - m - std::log(z);
    return logits;
  }

 private:
  std::size_t vocab_;
  int eos_;
  std::uint64_t seed_;
  double sharpness_;
};

struct Scored {
  std::vector<int> tokens;
  double log_prob;
  std::size_t finish;  // length when finished, max otherwise
};

// Every sequence beam search can return: EOS-terminated ones up to max_len,
// plus unterminated ones of exactly max_len.
inline void enumerate(const SequenceModel& m, std::vector<double> state, std::vector<int>& prefix, double lp,
               std::size_t max_len, std::vector<Scored>& out) {
  if (prefix.size() == max_len) {
    out.push_back({prefix, lp, std::numeric_limits<std::size_t>::max()});
    return;
  }
  const auto next = m.next_log_probs(state);
  for (std::size_t v = 0; v < next.size(); ++v) {
    prefix.push_back(static_cast<int>(v));
    if (static_cast<int>(v) == m.eos())
      out.push_back({prefix, lp + next[v], prefix.size()});
    else
      enumerate(m, m.advance(state, static_cast<int>(v)), prefix, lp + next[v], max_len, out);
    prefix.pop_back();
  }
}

inline std::vector<Scored> exhaustive(const SequenceModel& m, std::size_t max_len) {
  std::vector<Scored> all;
  std::vector<int> prefix;
  enumerate(m, m.initial_state(), prefix, 0.0, max_len, all);
  std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    if (a.finish != b.finish) return a.finish < b.finish;
    return a.tokens < b.tokens;
  });
  return all;
}

inline std::vector<int> greedy(const SequenceModel& m, std::size_t max_len) {
  std::vector<int> out;
  auto state = m.initial_state();
  while (out.size() < max_len) {
    const auto lp = m.next_log_probs(state);
    const int best = static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    out.push_back(best);
    if (best == m.eos()) break;
    state = m.advance(state, best);
  }
  return out;
}

inline std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

}  // namespace kpforge::testing
