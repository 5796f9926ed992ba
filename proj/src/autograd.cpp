#include "autograd.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace kpforge {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -INFINITY;
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

void log_softmax_inplace(std::span<double> x) {
  const double lse = log_sum_exp(x);
  for (double& v : x) v -= lse;
}

Param& ParamStore::add(const std::string& name, std::size_t rows, std::size_t cols) {
  if (index_.contains(name)) usage_error("duplicate parameter name: " + name);
  index_.emplace(name, params_.size());
  params_.push_back({name, Matrix(rows, cols), Matrix(rows, cols)});
  return params_.back();
}

Param& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) usage_error("unknown parameter: " + name);
  return params_[it->second];
}

const Param& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) usage_error("unknown parameter: " + name);
  return params_[it->second];
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
}

Var Tape::constant(Matrix m) { return push(std::move(m), nullptr); }

Var Tape::push(Matrix value, std::function<void(Tape&, std::size_t)> back) {
  nodes_.push_back({std::move(value), Matrix(), record_ ? std::move(back) : nullptr});
  return Var{nodes_.size() - 1};
}

Matrix& Tape::grad(std::size_t id) {
  auto& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows, n.value.cols);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (!record_) usage_error("backward() on a tape that does not record");
  if (nodes_[loss.id].value.size() != 1) usage_error("backward() needs a scalar loss");
  grad(loss.id).data[0] += 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    if (nodes_[id].back && has_grad(id)) nodes_[id].back(*this, id);
  }
}

double contrastive_from_similarities(std::span<const double> pos_sims, std::span<const double> neg_sims,
                                     double tau) {
  if (pos_sims.empty()) usage_error("contrastive loss needs at least one positive");
  if (!(tau > 0)) usage_error("contrastive loss needs tau > 0");
  double total = 0;
  std::vector<double> d(neg_sims.size());
  for (double p : pos_sims) {
    // -log(e^{p/tau} / (e^{p/tau} + sum_j e^{n_j/tau})) = log(1 + sum_j e^{(n_j - p)/tau})
    double m = 0;
    for (std::size_t j = 0; j < neg_sims.size(); ++j) {
      d[j] = (neg_sims[j] - p) / tau;
      m = std::max(m, d[j]);
    }
    double s = 0;
    for (double v : d) s += std::exp(v - m);
    total += m == 0 ? std::log1p(s) : m + std::log(std::exp(-m) + s);
  }
  return total;
}

namespace ops {
namespace {

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) usage_error(std::string(op) + ": shape mismatch " + detail);
}

}  // namespace

Var embed(Tape& t, Param& table, std::span<const int> ids) {
  const std::size_t d = table.value.cols;
  Matrix out(ids.size(), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto id = static_cast<std::size_t>(ids[i]);
    if (ids[i] < 0 || id >= table.value.rows) usage_error("embed: id out of range: " + std::to_string(ids[i]));
    std::copy_n(table.value.row(id).begin(), d, out.row(i).begin());
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return t.push(std::move(out), [&table, idv = std::move(idv)](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    for (std::size_t i = 0; i < idv.size(); ++i) {
      auto dst = table.grad.row(static_cast<std::size_t>(idv[i]));
      auto src = g.row(i);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  });
}

Var linear(Tape& t, Var x, Param& weight, Param* bias) {
  const Matrix& xv = t.value(x);
  const Matrix& w = weight.value;
  require(xv.cols == w.cols, "linear", xv.shape_string() + " vs W " + w.shape_string());
  if (bias) require(bias->value.rows == 1 && bias->value.cols == w.rows, "linear", "bias");
  Matrix out(xv.rows, w.rows);
  for (std::size_t r = 0; r < xv.rows; ++r) {
    auto xr = xv.row(r);
    for (std::size_t o = 0; o < w.rows; ++o) out(r, o) = dot(xr, w.row(o)) + (bias ? bias->value.data[o] : 0.0);
  }
  return t.push(std::move(out), [x, &weight, bias](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& xv = tp.value(x);
    const Matrix& w = weight.value;
    Matrix& gx = tp.grad(x.id);
    for (std::size_t r = 0; r < g.rows; ++r) {
      auto xr = xv.row(r);
      auto gxr = gx.row(r);
      for (std::size_t o = 0; o < w.rows; ++o) {
        const double go = g(r, o);
        if (go == 0) continue;
        auto wr = w.row(o);
        auto gwr = weight.grad.row(o);
        for (std::size_t k = 0; k < wr.size(); ++k) {
          gxr[k] += go * wr[k];
          gwr[k] += go * xr[k];
        }
        if (bias) bias->grad.data[o] += go;
      }
    }
  });
}

Var tanh(Tape& t, Var x) {
  Matrix out = t.value(x);
  for (double& v : out.data) v = std::tanh(v);
  return t.push(std::move(out), [x](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& y = tp.value(Var{self});
    Matrix& gx = tp.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += g.data[i] * (1 - y.data[i] * y.data[i]);
  });
}

Var sigmoid(Tape& t, Var x) {
  Matrix out = t.value(x);
  for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  return t.push(std::move(out), [x](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& y = tp.value(Var{self});
    Matrix& gx = tp.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += g.data[i] * y.data[i] * (1 - y.data[i]);
  });
}

Var one_minus(Tape& t, Var x) {
  Matrix out = t.value(x);
  for (double& v : out.data) v = 1.0 - v;
  return t.push(std::move(out), [x](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    Matrix& gx = tp.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] -= g.data[i];
  });
}

Var add(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require(av.same_shape(bv), "add", av.shape_string() + " vs " + bv.shape_string());
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
  return t.push(std::move(out), [a, b](Tape& tp, std::size_t self) {
    const Matrix g = tp.grad(self);
    Matrix& ga = tp.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
    Matrix& gb = tp.grad(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i];
  });
}

Var mul(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require(av.same_shape(bv), "mul", av.shape_string() + " vs " + bv.shape_string());
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= bv.data[i];
  return t.push(std::move(out), [a, b](Tape& tp, std::size_t self) {
    const Matrix g = tp.grad(self);
    const Matrix& av = tp.value(a);
    const Matrix& bv = tp.value(b);
    Matrix& ga = tp.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * bv.data[i];
    Matrix& gb = tp.grad(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i] * av.data[i];
  });
}

Var scale(Tape& t, Var x, double c) {
  Matrix out = t.value(x);
  for (double& v : out.data) v *= c;
  return t.push(std::move(out), [x, c](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    Matrix& gx = tp.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += c * g.data[i];
  });
}

Var concat_cols(Tape& t, std::span<const Var> parts) {
  if (parts.empty()) usage_error("concat_cols: no inputs");
  const std::size_t rows = t.value(parts[0]).rows;
  std::size_t cols = 0;
  for (Var p : parts) {
    require(t.value(p).rows == rows, "concat_cols", "row count");
    cols += t.value(p).cols;
  }
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const Matrix& v = t.value(p);
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(v.row(r).begin(), v.cols, out.row(r).begin() + off);
    off += v.cols;
  }
  std::vector<Var> pv(parts.begin(), parts.end());
  return t.push(std::move(out), [pv = std::move(pv)](Tape& tp, std::size_t self) {
    const Matrix g = tp.grad(self);
    std::size_t off = 0;
    for (Var p : pv) {
      Matrix& gp = tp.grad(p.id);
      for (std::size_t r = 0; r < gp.rows; ++r)
        for (std::size_t c = 0; c < gp.cols; ++c) gp(r, c) += g(r, off + c);
      off += gp.cols;
    }
  });
}

Var stack_rows(Tape& t, std::span<const Var> rows) {
  if (rows.empty()) usage_error("stack_rows: no inputs");
  const std::size_t cols = t.value(rows[0]).cols;
  Matrix out(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Matrix& v = t.value(rows[i]);
    require(v.rows == 1 && v.cols == cols, "stack_rows", v.shape_string());
    std::copy_n(v.data.begin(), cols, out.row(i).begin());
  }
  std::vector<Var> rv(rows.begin(), rows.end());
  return t.push(std::move(out), [rv = std::move(rv)](Tape& tp, std::size_t self) {
    const Matrix g = tp.grad(self);
    for (std::size_t i = 0; i < rv.size(); ++i) {
      Matrix& gr = tp.grad(rv[i].id);
      for (std::size_t c = 0; c < g.cols; ++c) gr.data[c] += g(i, c);
    }
  });
}

Var row(Tape& t, Var x, std::size_t r) { return rows_sum(t, x, r, r + 1); }

Var rows_sum(Tape& t, Var x, std::size_t start, std::size_t end) {
  const Matrix& xv = t.value(x);
  if (start >= end || end > xv.rows)
    usage_error("rows_sum: range [" + std::to_string(start) + ", " + std::to_string(end) + ") outside " +
                std::to_string(xv.rows) + " rows");
  Matrix out(1, xv.cols);
  for (std::size_t r = start; r < end; ++r)
    for (std::size_t c = 0; c < xv.cols; ++c) out.data[c] += xv(r, c);
  return t.push(std::move(out), [x, start, end](Tape& tp, std::size_t self) {
    const Matrix g = tp.grad(self);
    Matrix& gx = tp.grad(x.id);
    for (std::size_t r = start; r < end; ++r)
      for (std::size_t c = 0; c < gx.cols; ++c) gx(r, c) += g.data[c];
  });
}

Var matmul_nt(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require(av.cols == bv.cols, "matmul_nt", av.shape_string() + " vs " + bv.shape_string());
  Matrix out(av.rows, bv.rows);
  for (std::size_t i = 0; i < av.rows; ++i)
    for (std::size_t j = 0; j < bv.rows; ++j) out(i, j) = dot(av.row(i), bv.row(j));
  return t.push(std::move(out), [a, b](Tape& tp, std::size_t self) {
    const Matrix g = tp.grad(self);
    const Matrix& av = tp.value(a);
    const Matrix& bv = tp.value(b);
    Matrix& ga = tp.grad(a.id);
    Matrix& gb = tp.grad(b.id);
    for (std::size_t i = 0; i < g.rows; ++i)
      for (std::size_t j = 0; j < g.cols; ++j) {
        const double gij = g(i, j);
        if (gij == 0) continue;
        for (std::size_t k = 0; k < av.cols; ++k) {
          ga(i, k) += gij * bv(j, k);
          gb(j, k) += gij * av(i, k);
        }
      }
  });
}

Var matmul(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require(av.cols == bv.rows, "matmul", av.shape_string() + " vs " + bv.shape_string());
  Matrix out(av.rows, bv.cols);
  for (std::size_t i = 0; i < av.rows; ++i)
    for (std::size_t k = 0; k < av.cols; ++k) {
      const double aik = av(i, k);
      for (std::size_t j = 0; j < bv.cols; ++j) out(i, j) += aik * bv(k, j);
    }
  return t.push(std::move(out), [a, b](Tape& tp, std::size_t self) {
    const Matrix g = tp.grad(self);
    const Matrix& av = tp.value(a);
    const Matrix& bv = tp.value(b);
    Matrix& ga = tp.grad(a.id);
    Matrix& gb = tp.grad(b.id);
    for (std::size_t i = 0; i < av.rows; ++i)
      for (std::size_t k = 0; k < av.cols; ++k) {
        double acc = 0;
        for (std::size_t j = 0; j < bv.cols; ++j) {
          acc += g(i, j) * bv(k, j);
          gb(k, j) += av(i, k) * g(i, j);
        }
        ga(i, k) += acc;
      }
  });
}

Var softmax_rows(Tape& t, Var x) {
  Matrix out = t.value(x);
  for (std::size_t r = 0; r < out.rows; ++r) {
    auto row = out.row(r);
    log_softmax_inplace(row);
    for (double& v : row) v = std::exp(v);
  }
  return t.push(std::move(out), [x](Tape& tp, std::size_t self) {
    const Matrix g = tp.grad(self);
    const Matrix& y = tp.value(Var{self});
    Matrix& gx = tp.grad(x.id);
    for (std::size_t r = 0; r < y.rows; ++r) {
      const double s = dot(y.row(r), g.row(r));
      for (std::size_t c = 0; c < y.cols; ++c) gx(r, c) += y(r, c) * (g(r, c) - s);
    }
  });
}

Var cosine_rows(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require(av.rows == 1 && av.cols == bv.cols, "cosine_rows", av.shape_string() + " vs " + bv.shape_string());
  Matrix out(1, bv.rows);
  const double na = norm(av.row(0));
  for (std::size_t j = 0; j < bv.rows; ++j) {
    const double nb = norm(bv.row(j));
    out.data[j] = (na > 0 && nb > 0) ? dot(av.row(0), bv.row(j)) / (na * nb) : 0.0;
  }
  return t.push(std::move(out), [a, b](Tape& tp, std::size_t self) {
    const Matrix g = tp.grad(self);
    const Matrix& av = tp.value(a);
    const Matrix& bv = tp.value(b);
    const Matrix& c = tp.value(Var{self});
    Matrix& ga = tp.grad(a.id);
    Matrix& gb = tp.grad(b.id);
    const double na = norm(av.row(0));
    if (na == 0) return;
    for (std::size_t j = 0; j < bv.rows; ++j) {
      const double nb = norm(bv.row(j));
      if (nb == 0 || g.data[j] == 0) continue;
      const double gj = g.data[j];
      for (std::size_t k = 0; k < av.cols; ++k) {
        ga.data[k] += gj * (bv(j, k) / (na * nb) - c.data[j] * av.data[k] / (na * na));
        gb(j, k) += gj * (av.data[k] / (na * nb) - c.data[j] * bv(j, k) / (nb * nb));
      }
    }
  });
}

Var contrastive(Tape& t, Var pos_sims, Var neg_sims, double tau) {
  const Matrix& pv = t.value(pos_sims);
  const Matrix& nv = t.value(neg_sims);
  Matrix out(1, 1);
  out.data[0] = contrastive_from_similarities(pv.data, nv.data, tau);
  return t.push(std::move(out), [pos_sims, neg_sims, tau](Tape& tp, std::size_t self) {
    const double g = tp.grad(self).data[0];
    const Matrix& pv = tp.value(pos_sims);
    const Matrix& nv = tp.value(neg_sims);
    Matrix& gp = tp.grad(pos_sims.id);
    Matrix* gn = nv.empty() ? nullptr : &tp.grad(neg_sims.id);
    std::vector<double> logits(nv.size() + 1);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      logits[0] = pv.data[i] / tau;
      for (std::size_t j = 0; j < nv.size(); ++j) logits[j + 1] = nv.data[j] / tau;
      log_softmax_inplace(logits);
      gp.data[i] += g * (std::exp(logits[0]) - 1.0) / tau;
      for (std::size_t j = 0; j < nv.size(); ++j) gn->data[j] += g * std::exp(logits[j + 1]) / tau;
    }
  });
}

Var nll(Tape& t, Var logits, int target) {
  const Matrix& lv = t.value(logits);
  if (lv.rows != 1 || target < 0 || static_cast<std::size_t>(target) >= lv.cols)
    usage_error("nll: target " + std::to_string(target) + " outside vocabulary of " + std::to_string(lv.cols));
  Matrix out(1, 1);
  out.data[0] = log_sum_exp(lv.data) - lv.data[static_cast<std::size_t>(target)];
  return t.push(std::move(out), [logits, target](Tape& tp, std::size_t self) {
    const double g = tp.grad(self).data[0];
    std::vector<double> p = tp.value(logits).data;
    log_softmax_inplace(p);
    Matrix& gl = tp.grad(logits.id);
    for (std::size_t i = 0; i < p.size(); ++i) gl.data[i] += g * std::exp(p[i]);
    gl.data[static_cast<std::size_t>(target)] -= g;
  });
}

Var weighted_sum(Tape& t, std::span<const Var> terms, std::span<const double> weights) {
  if (terms.size() != weights.size()) usage_error("weighted_sum: terms/weights length mismatch");
  Matrix out(1, 1);
  for (std::size_t i = 0; i < terms.size(); ++i) out.data[0] += weights[i] * t.scalar(terms[i]);
  std::vector<Var> tv(terms.begin(), terms.end());
  std::vector<double> wv(weights.begin(), weights.end());
  return t.push(std::move(out), [tv = std::move(tv), wv = std::move(wv)](Tape& tp, std::size_t self) {
    const double g = tp.grad(self).data[0];
    for (std::size_t i = 0; i < tv.size(); ++i) tp.grad(tv[i].id).data[0] += g * wv[i];
  });
}

}  // namespace ops
}  // namespace kpforge
