#include "gazby/optim.hpp"

#include <cmath>

#include "gazby/errors.hpp"

namespace gazby::nn {

Adam::Adam(std::vector<Parameter*> params, Options opt) : params_(std::move(params)), opt_(opt) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Parameter* p : params_) {
    m_.push_back(Tensor::zeros(p->value.shape()));
    v_.push_back(Tensor::zeros(p->value.shape()));
  }
}

double Adam::grad_norm() const {
  double sq = 0.0;
  for (const Parameter* p : params_) {
    for (std::size_t i = 0; i < p->grad.size(); ++i) sq += p->grad[i] * p->grad[i];
  }
  return std::sqrt(sq);
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

void Adam::step() {
  double scale = 1.0;
  if (opt_.clip_norm > 0.0) {
    const double norm = grad_norm();
    if (!std::isfinite(norm)) throw NumericalError("Adam: non-finite gradient norm");
    if (norm > opt_.clip_norm) scale = opt_.clip_norm / norm;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Parameter& p = *params_[pi];
    Tensor& m = m_[pi];
    Tensor& v = v_[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i] * scale;
      m[i] = opt_.beta1 * m[i] + (1.0 - opt_.beta1) * g;
      v[i] = opt_.beta2 * v[i] + (1.0 - opt_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= opt_.lr * mhat / (std::sqrt(vhat) + opt_.eps);
    }
    p.snap_to_f32();
  }
}

}  // namespace gazby::nn
