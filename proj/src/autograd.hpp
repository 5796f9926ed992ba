#pragma once

#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tensor.hpp"

namespace kpforge {

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
};

/// Named parameters in insertion order.
class ParamStore {
 public:
  Param& add(const std::string& name, std::size_t rows, std::size_t cols);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.contains(name); }

  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  std::size_t scalar_count() const;

  void zero_grad();

 private:
  std::vector<Param> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Handle to a tape node.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Reverse-mode tape. With record=false only forward values are computed
/// (inference); with record=true backward() accumulates gradients into the
/// Param::grad buffers touched by the recorded ops.
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}

  bool recording() const { return record_; }
  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const { return nodes_[v.id].value.data.at(0); }

  Var constant(Matrix m);

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 node and runs the backward pass.
  void backward(Var loss);

  // Internal: used by the op implementations.
  Var push(Matrix value, std::function<void(Tape&, std::size_t)> back);
  Matrix& grad(std::size_t id);
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }
  const Matrix& grad_or_empty(std::size_t id) const { return nodes_[id].grad; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&, std::size_t)> back;
  };
  bool record_;
  std::vector<Node> nodes_;
};

namespace ops {

/// Rows of `table` selected by ids: n x d.
Var embed(Tape& t, Param& table, std::span<const int> ids);
/// x W^T + b for each row of x. W is out x in, b is 1 x out (optional).
Var linear(Tape& t, Var x, Param& weight, Param* bias);
Var tanh(Tape& t, Var x);
Var sigmoid(Tape& t, Var x);
Var one_minus(Tape& t, Var x);
Var add(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var x, double c);
Var concat_cols(Tape& t, std::span<const Var> parts);
Var stack_rows(Tape& t, std::span<const Var> rows);
Var row(Tape& t, Var x, std::size_t r);
/// Sum of rows [start, end).
Var rows_sum(Tape& t, Var x, std::size_t start, std::size_t end);
/// A B^T.
Var matmul_nt(Tape& t, Var a, Var b);
/// A B.
Var matmul(Tape& t, Var a, Var b);
Var softmax_rows(Tape& t, Var x);
/// Cosine similarity of the 1 x d vector a against every row of b: 1 x n.
/// Zero-norm inputs yield similarity 0 with zero gradient.
Var cosine_rows(Tape& t, Var a, Var b);
/// Sum over positives of the temperature-scaled softmax cross-entropy that
/// contrasts each positive similarity against all negative similarities.
Var contrastive(Tape& t, Var pos_sims, Var neg_sims, double tau);
/// -log softmax(logits)[target] for a 1 x V row.
Var nll(Tape& t, Var logits, int target);
/// sum_i weights[i] * terms[i] over 1x1 nodes.
Var weighted_sum(Tape& t, std::span<const Var> terms, std::span<const double> weights);

}  // namespace ops

/// Forward-only contrastive objective shared by the tape op and callers that
/// work on plain similarity values.
double contrastive_from_similarities(std::span<const double> pos_sims, std::span<const double> neg_sims, double tau);

}  // namespace kpforge
