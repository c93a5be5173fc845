#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gazby/autodiff.hpp"

namespace gazby::nn {

struct GradCheckOptions {
  double eps = 1e-4;           // central-difference step, must lie in [1e-6, 1e-3]
  int samples_per_param = 4;   // coordinates probed per parameter (all if fewer)
  std::uint64_t seed = 0x9d5f;
};

// Central-difference verification of the tape's gradients.
//
// `build_loss` must deterministically record the scalar loss for the current
// parameter values on the given tape. Two baseline evaluations are compared
// first; a mismatch throws ValidationError (non-deterministic function).
//
// Returns max over sampled coordinates of
//   |g_analytic - g_fd| / max(1, |g_analytic|, |g_fd|).
double finite_difference_check(const std::vector<Parameter*>& params,
                               const std::function<Var(Tape&)>& build_loss,
                               const GradCheckOptions& opt = {});

}  // namespace gazby::nn
