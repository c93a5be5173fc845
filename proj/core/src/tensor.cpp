#include "gazby/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

#include "gazby/errors.hpp"

namespace gazby::nn {

namespace {

std::size_t shape_product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ValidationError("tensor extent must be positive, got shape " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

using MatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MutMatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != data_.size()) {
    throw ValidationError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                          shape_string(shape_));
  }
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.data_.assign(1, v);
  return t;
}

Tensor Tensor::full(std::vector<int> shape, double v) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), v);
  return t;
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> data) {
  return Tensor({rows, cols}, std::move(data));
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string shape_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void require_finite(const Tensor& t, const char* where) {
  if (!t.all_finite()) throw NumericalError(std::string(where) + ": non-finite value in tensor");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ValidationError("matmul requires rank-2 tensors, got " + shape_string(a.shape()) + " and " +
                          shape_string(b.shape()));
  }
  if (a.cols() != b.rows()) {
    throw ValidationError("matmul shape mismatch: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor out({a.rows(), b.cols()});
  MatMap ma(a.data(), a.rows(), a.cols());
  MatMap mb(b.data(), b.rows(), b.cols());
  MutMatMap mo(out.data(), out.rows(), out.cols());
  mo.noalias() = ma * mb;
  return out;
}

Tensor softmax_rows(const Tensor& m) {
  return softmax_rows_masked(m, {});
}

Tensor softmax_rows_masked(const Tensor& m, const std::vector<std::uint8_t>& keep_col) {
  if (m.rank() != 2) throw ValidationError("softmax_rows requires rank-2 input, got " + shape_string(m.shape()));
  const int r = m.rows(), c = m.cols();
  if (!keep_col.empty() && static_cast<int>(keep_col.size()) != c) {
    throw ValidationError("softmax mask length " + std::to_string(keep_col.size()) + " != column count " +
                          std::to_string(c));
  }
  auto kept = [&](int j) { return keep_col.empty() || keep_col[static_cast<std::size_t>(j)] != 0; };
  Tensor out({r, c});
  for (int i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < c; ++j) {
      if (kept(j)) mx = std::max(mx, m(i, j));
    }
    if (!std::isfinite(mx)) {
      throw ValidationError("softmax row " + std::to_string(i) + " has no unmasked finite entry");
    }
    double denom = 0.0;
    for (int j = 0; j < c; ++j) {
      if (kept(j)) {
        out(i, j) = std::exp(m(i, j) - mx);
        denom += out(i, j);
      }
    }
    for (int j = 0; j < c; ++j) {
      out(i, j) = kept(j) ? out(i, j) / denom : 0.0;
    }
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (x.rank() != 2) throw ValidationError("layer_norm requires rank-2 input, got " + shape_string(x.shape()));
  const int n = x.rows(), d = x.cols();
  if (gamma.rank() != 1 || gamma.dim(0) != d || beta.rank() != 1 || beta.dim(0) != d) {
    throw ValidationError("layer_norm gamma/beta shape mismatch: x " + shape_string(x.shape()) + ", gamma " +
                          shape_string(gamma.shape()) + ", beta " + shape_string(beta.shape()));
  }
  if (eps <= 0.0) throw ValidationError("layer_norm eps must be positive");
  Tensor out({n, d});
  for (int i = 0; i < n; ++i) {
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += x(i, j);
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double dv = x(i, j) - mean;
      var += dv * dv;
    }
    var /= d;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < d; ++j) {
      out(i, j) = gamma[static_cast<std::size_t>(j)] * ((x(i, j) - mean) * inv) + beta[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

Tensor transpose(const Tensor& m) {
  if (m.rank() != 2) throw ValidationError("transpose requires rank-2 input, got " + shape_string(m.shape()));
  Tensor out({m.cols(), m.rows()});
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  }
  return out;
}

}  // namespace gazby::nn
