#include "gazby/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gazby/errors.hpp"
#include "gazby/rng.hpp"

namespace gazby::nn {

namespace {

double eval_scalar(const std::function<Var(Tape&)>& build_loss) {
  Tape tape;
  Var loss = build_loss(tape);
  const Tensor& v = tape.value(loss);
  if (v.size() != 1) throw ValidationError("finite_difference_check: loss is not scalar");
  return v[0];
}

}  // namespace

double finite_difference_check(const std::vector<Parameter*>& params,
                               const std::function<Var(Tape&)>& build_loss,
                               const GradCheckOptions& opt) {
  if (opt.eps < 1e-6 || opt.eps > 1e-3) {
    throw ValidationError("finite_difference_check: eps must lie in [1e-6, 1e-3]");
  }
  const double base0 = eval_scalar(build_loss);
  const double base1 = eval_scalar(build_loss);
  if (base0 != base1) {
    throw ValidationError("finite_difference_check: function is non-deterministic (baselines differ)");
  }

  // analytic gradients
  std::vector<Tensor> saved;
  saved.reserve(params.size());
  for (Parameter* p : params) {
    p->zero_grad();
  }
  {
    Tape tape;
    Var loss = build_loss(tape);
    tape.backward(loss);
  }
  for (Parameter* p : params) saved.push_back(p->grad);

  Rng rng(opt.seed);
  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    const std::size_t n = p.value.size();
    std::vector<std::size_t> coords;
    if (static_cast<int>(n) <= opt.samples_per_param) {
      for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (int s = 0; s < opt.samples_per_param; ++s) {
        coords.push_back(static_cast<std::size_t>(rng.next_u64() % n));
      }
    }
    for (std::size_t c : coords) {
      const double orig = p.value[c];
      p.value[c] = orig + opt.eps;
      const double plus = eval_scalar(build_loss);
      p.value[c] = orig - opt.eps;
      const double minus = eval_scalar(build_loss);
      p.value[c] = orig;
      const double fd = (plus - minus) / (2.0 * opt.eps);
      const double analytic = saved[pi][c];
      const double denom = std::max({1.0, std::abs(analytic), std::abs(fd)});
      worst = std::max(worst, std::abs(analytic - fd) / denom);
    }
  }
  return worst;
}

}  // namespace gazby::nn
