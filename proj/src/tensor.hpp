#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kpforge {

/// Dense row-major matrix of doubles. Vectors are 1 x n.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  static Matrix row_vector(std::span<const double> v) {
    Matrix m(1, v.size());
    m.data.assign(v.begin(), v.end());
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_string() const { return std::to_string(rows) + "x" + std::to_string(cols); }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// Numerically stable log(sum(exp(x))).
double log_sum_exp(std::span<const double> x);

void log_softmax_inplace(std::span<double> x);

}  // namespace kpforge
