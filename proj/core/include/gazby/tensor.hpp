#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gazby::nn {

// Dense row-major tensor of doubles. Values are treated as immutable once an
// operation has produced them; mutation is reserved for parameter storage.
// Rank 0 (shape {}) is a scalar with one element.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double v);
  // 2D convenience, row-major initializer
  static Tensor matrix(int rows, int cols, std::vector<double> data);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty() && shape_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // 2D access; callers are responsible for rank
  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }

  int rows() const { return shape_[0]; }
  int cols() const { return shape_[1]; }

  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<int>& shape);

// Verifies every element is finite, else throws NumericalError tagged with
// `where`.
void require_finite(const Tensor& t, const char* where);

// --- forward kernels -------------------------------------------------------
// These are the raw numeric routines; the autodiff tape wraps them.

// Standard matrix product. Throws ValidationError on inner-extent mismatch,
// naming both shapes.
Tensor matmul(const Tensor& a, const Tensor& b);

// Row-wise softmax, stabilized by subtracting each row's max before
// exponentiation. Accepts an optional keep mask over columns; masked columns
// get probability exactly 0 (the -inf logit convention without the infs).
Tensor softmax_rows(const Tensor& m);
Tensor softmax_rows_masked(const Tensor& m, const std::vector<std::uint8_t>& keep_col);

// Per-row standardization to mean 0 / unit variance (population variance,
// eps inside the sqrt), then the gamma/beta affine map.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

Tensor transpose(const Tensor& m);

}  // namespace gazby::nn
