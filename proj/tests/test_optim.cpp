#include <cmath>

#include "doctest.h"
#include "error.hpp"
#include "optim.hpp"

using namespace kpforge;

TEST_CASE("learning-rate schedule") {
  CHECK(scheduled_lr(1.0, 0, 10, 2) == 0.5);
  CHECK(scheduled_lr(1.0, 1, 10, 2) == 1.0);
  CHECK(scheduled_lr(1.0, 2, 10, 2) == 1.0);
  CHECK(scheduled_lr(1.0, 6, 10, 2) == 0.5);
  CHECK(scheduled_lr(1.0, 10, 10, 2) == 0.0);
  CHECK(scheduled_lr(2.0, 0, 4, 0) == 2.0);
  CHECK(scheduled_lr(2.0, 3, 4, 0) == 0.5);
  for (std::size_t s = 1; s < 20; ++s) {
    if (s >= 5) CHECK(scheduled_lr(1.0, s, 20, 5) <= scheduled_lr(1.0, s - 1, 20, 5));
    else CHECK(scheduled_lr(1.0, s, 20, 5) > scheduled_lr(1.0, s - 1, 20, 5));
  }
}

TEST_CASE("gradient clipping") {
  ParamStore s;
  auto& p = s.add("p", 1, 2);
  p.grad.data = {3, 4};
  CHECK(clip_grad_norm(s, 10) == 5.0);
  CHECK(p.grad.data == std::vector<double>{3, 4});
  CHECK(clip_grad_norm(s, 1) == 5.0);
  CHECK(std::abs(p.grad.data[0] - 0.6) < 1e-15);
  CHECK(std::abs(p.grad.data[1] - 0.8) < 1e-15);
}

TEST_CASE("AdamW update matches a hand-rolled reference") {
  ParamStore s;
  auto& p = s.add("p", 1, 3);
  p.value.data = {1.0, -2.0, 0.5};
  AdamW opt(s, 0.1);
  const std::vector<std::vector<double>> grads = {{0.5, -1.0, 0.0}, {0.25, 2.0, -3.0}, {-1.0, 0.1, 0.2}};
  std::vector<double> x = p.value.data, m(3, 0), v(3, 0);
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    p.grad.data = grads[t - 1];
    opt.step(lr);
    for (std::size_t k = 0; k < 3; ++k) {
      const double g = grads[t - 1][k];
      m[k] = b1 * m[k] + (1 - b1) * g;
      v[k] = b2 * v[k] + (1 - b2) * g * g;
      const double mh = m[k] / (1 - std::pow(b1, t)), vh = v[k] / (1 - std::pow(b2, t));
      x[k] = x[k] * (1 - lr * 0.1) - lr * mh / (std::sqrt(vh) + eps);
      CHECK(std::abs(p.value.data[k] - x[k]) < 1e-14);
    }
  }
}

namespace {

// Loss (w - 3)^2 on a single scalar parameter.
std::optional<ExampleLoss> quadratic(ParamStore& s, Tape& t) {
  const int row[1] = {0};
  Var w = ops::embed(t, s.get("w"), row);
  Var d = ops::add(t, w, t.constant(Matrix(1, 1, -3.0)));
  ExampleLoss out;
  out.total = ops::mul(t, d, d);
  out.cl = t.scalar(out.total);
  return out;
}

}  // namespace

TEST_CASE("run_training minimizes and logs") {
  ParamStore s;
  s.add("w", 1, 1);
  TrainLoopConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0;
  cfg.epochs = 300;
  cfg.batch_size = 1;
  cfg.max_grad_norm = 0;
  const auto summary = run_training(s, 1, [&](std::size_t, Tape& t) { return quadratic(s, t); }, {}, cfg);
  CHECK(summary.steps == 300);
  CHECK(summary.log.size() == 300);
  CHECK(std::abs(s.get("w").value.data[0] - 3.0) < 0.05);
  CHECK(*summary.log.back().cl < *summary.log.front().cl);
}

TEST_CASE("early stopping restores the best parameters") {
  ParamStore s;
  s.add("w", 1, 1);
  TrainLoopConfig cfg;
  cfg.lr = 0.05;
  cfg.epochs = 50;
  cfg.batch_size = 1;
  cfg.max_tolerance = 2;
  const std::vector<double> scores = {0.1, 0.5, 0.4, 0.45, 0.3, 0.9};
  std::size_t call = 0;
  std::vector<double> snapshots;
  auto validate = [&] {
    snapshots.push_back(s.get("w").value.data[0]);
    return scores[std::min(call++, scores.size() - 1)];
  };
  const auto summary = run_training(s, 1, [&](std::size_t, Tape& t) { return quadratic(s, t); }, validate, cfg);
  // The third and fifth evaluations drop, exhausting the tolerance.
  CHECK(summary.early_stopped);
  CHECK(summary.steps == 5);
  CHECK(*summary.best_val_f1m == 0.5);
  CHECK(s.get("w").value.data[0] == snapshots[1]);
}

TEST_CASE("training rejects bad input") {
  ParamStore s;
  s.add("w", 1, 1);
  TrainLoopConfig cfg;
  auto fn = [&](std::size_t, Tape& t) { return quadratic(s, t); };
  CHECK_THROWS_AS(run_training(s, 0, fn, {}, cfg), Error);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(run_training(s, 1, fn, {}, cfg), Error);
  cfg.batch_size = 1;
  auto bad = [&](std::size_t, Tape& t) {
    auto l = quadratic(s, t);
    l->total = ops::scale(t, l->total, std::nan(""));
    return l;
  };
  try {
    run_training(s, 1, bad, {}, cfg);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
  }
  int skipped_calls = 0;
  const auto summary = run_training(s, 3, [&](std::size_t, Tape&) -> std::optional<ExampleLoss> {
    ++skipped_calls;
    return std::nullopt;
  }, {}, cfg);
  CHECK(summary.skipped_examples == static_cast<std::size_t>(skipped_calls));
}
