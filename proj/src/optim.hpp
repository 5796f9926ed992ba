#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "autograd.hpp"

namespace kpforge {

/// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(ParamStore& store, double weight_decay, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(double lr);

 private:
  ParamStore& store_;
  double weight_decay_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_, v_;
};

/// Linear warmup over the first warmup_steps, then linear decay to 0 at total_steps.
double scheduled_lr(double base_lr, std::size_t step, std::size_t total_steps, std::size_t warmup_steps);

/// Rescales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(ParamStore& store, double max_norm);

struct TrainLoopConfig {
  double lr = 1e-2;
  double weight_decay = 0.01;
  double warmup = 0.0;  // fraction of total steps
  std::size_t batch_size = 8;
  std::size_t epochs = 10;
  std::size_t max_tolerance = 10;
  double max_grad_norm = 1.0;
  std::size_t eval_every = 0;  // optimizer steps; 0 = end of each epoch
  std::uint64_t seed = 42;
};

/// Loss of a single example built on `tape`. Components are reported for
/// logging; `total` is what gets differentiated.
struct ExampleLoss {
  Var total;
  std::optional<double> mle;
  std::optional<double> cl;
};

struct TrainLogRow {
  std::size_t step = 0;
  std::optional<double> mle;
  std::optional<double> cl;
  std::optional<double> val_f1m;
};

struct TrainSummary {
  std::vector<TrainLogRow> log;
  std::size_t steps = 0;
  std::size_t skipped_examples = 0;  // examples that produced no loss
  std::optional<double> best_val_f1m;
  bool early_stopped = false;
};

using ExampleLossFn = std::function<std::optional<ExampleLoss>(std::size_t example, Tape& tape)>;
using ValidateFn = std::function<double()>;

/// Mini-batch training: each batch averages per-example losses over the batch
/// size, clips, and takes one AdamW step on the scheduled learning rate.
/// With a validator, parameters are restored to the best-scoring evaluation
/// and training stops once the score has dropped max_tolerance times.
TrainSummary run_training(ParamStore& store, std::size_t num_examples, const ExampleLossFn& loss_fn,
                          const ValidateFn& validate, const TrainLoopConfig& config);

}  // namespace kpforge
