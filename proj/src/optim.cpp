#include "optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace kpforge {

AdamW::AdamW(ParamStore& store, double weight_decay, double beta1, double beta2, double eps)
    : store_(store), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : store_.params()) {
    m_.emplace_back(p.value.rows, p.value.cols);
    v_.emplace_back(p.value.rows, p.value.cols);
  }
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto& params = store_.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i].data;
    auto& v = v_[i].data;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad.data[k];
      m[k] = beta1_ * m[k] + (1 - beta1_) * g;
      v[k] = beta2_ * v[k] + (1 - beta2_) * g * g;
      p.value.data[k] -= lr * weight_decay_ * p.value.data[k];
      p.value.data[k] -= lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + eps_);
    }
  }
}

double scheduled_lr(double base_lr, std::size_t step, std::size_t total_steps, std::size_t warmup_steps) {
  if (step < warmup_steps) return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  if (total_steps <= warmup_steps) return base_lr;
  const double remaining = static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup_steps);
  return base_lr * std::max(0.0, remaining);
}

double clip_grad_norm(ParamStore& store, double max_norm) {
  double sq = 0;
  for (const auto& p : store.params())
    for (double g : p.grad.data) sq += g * g;
  const double n = std::sqrt(sq);
  if (max_norm > 0 && n > max_norm) {
    const double s = max_norm / n;
    for (auto& p : store.params())
      for (double& g : p.grad.data) g *= s;
  }
  return n;
}

TrainSummary run_training(ParamStore& store, std::size_t num_examples, const ExampleLossFn& loss_fn,
                          const ValidateFn& validate, const TrainLoopConfig& config) {
  if (num_examples == 0) usage_error("training corpus is empty");
  if (config.batch_size == 0) usage_error("batch_size must be positive");

  TrainSummary summary;
  const std::size_t steps_per_epoch = (num_examples + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = steps_per_epoch * config.epochs;
  const auto warmup_steps = static_cast<std::size_t>(std::floor(config.warmup * static_cast<double>(total_steps)));
  const std::size_t eval_every = config.eval_every ? config.eval_every : steps_per_epoch;

  AdamW optimizer(store, config.weight_decay);
  Rng rng(config.seed);
  std::vector<std::size_t> order(num_examples);
  std::iota(order.begin(), order.end(), 0);

  std::vector<Matrix> best_values;
  std::optional<double> previous_val;
  std::size_t tolerance = 0;

  for (std::size_t epoch = 0; epoch < config.epochs && !summary.early_stopped; ++epoch) {
    rng.shuffle(order);
    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      store.zero_grad();
      double mle_sum = 0, cl_sum = 0;
      std::size_t mle_n = 0, cl_n = 0;
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(begin + config.batch_size, num_examples);
      for (std::size_t k = begin; k < end; ++k) {
        Tape tape;
        auto loss = loss_fn(order[k], tape);
        if (!loss) {
          ++summary.skipped_examples;
          continue;
        }
        const double value = tape.scalar(loss->total);
        if (!std::isfinite(value))
          numeric_error("non-finite loss " + std::to_string(value) + " at step " + std::to_string(summary.steps) +
                        " on example " + std::to_string(order[k]));
        if (loss->mle) {
          mle_sum += *loss->mle;
          ++mle_n;
        }
        if (loss->cl) {
          cl_sum += *loss->cl;
          ++cl_n;
        }
        tape.backward(ops::scale(tape, loss->total, 1.0 / static_cast<double>(config.batch_size)));
      }
      clip_grad_norm(store, config.max_grad_norm);
      optimizer.step(scheduled_lr(config.lr, summary.steps, total_steps, warmup_steps));
      ++summary.steps;

      TrainLogRow row;
      row.step = summary.steps;
      if (mle_n) row.mle = mle_sum / static_cast<double>(mle_n);
      if (cl_n) row.cl = cl_sum / static_cast<double>(cl_n);
      if (validate && summary.steps % eval_every == 0) {
        const double val = validate();
        row.val_f1m = val;
        if (!summary.best_val_f1m || val > *summary.best_val_f1m) {
          summary.best_val_f1m = val;
          best_values.clear();
          for (const auto& p : store.params()) best_values.push_back(p.value);
        }
        if (previous_val && val < *previous_val) ++tolerance;
        previous_val = val;
        if (tolerance >= config.max_tolerance) summary.early_stopped = true;
      }
      summary.log.push_back(row);
      if (summary.early_stopped) break;
    }
  }
  if (!best_values.empty()) {
    auto& params = store.params();
    for (std::size_t i = 0; i < params.size(); ++i) params[i].value = best_values[i];
  }
  return summary;
}

}  // namespace kpforge
