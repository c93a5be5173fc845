#pragma once

#include <vector>

#include "gazby/autodiff.hpp"

namespace gazby::nn {

// Adam over a fixed parameter set. step() consumes the accumulated gradients
// and snaps updated values to f32 (see Parameter).
class Adam {
 public:
  struct Options {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 0.0;  // 0 disables global-norm clipping
  };

  Adam(std::vector<Parameter*> params, Options opt);

  void step();
  void zero_grad();
  double grad_norm() const;  // global L2 norm over all parameters

  const Options& options() const { return opt_; }

 private:
  std::vector<Parameter*> params_;
  Options opt_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  long t_ = 0;
};

}  // namespace gazby::nn
