#include "gazby/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "gazby/errors.hpp"

namespace gazby::nn {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ValidationError(std::string(op) + " shape mismatch: " + shape_string(a.shape()) + " vs " +
                          shape_string(b.shape()));
  }
}

void check_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ValidationError(std::string(op) + " requires rank-2 input, got " + shape_string(t.shape()));
  }
}

}  // namespace

Parameter::Parameter(std::string param_name, Tensor v) : name(std::move(param_name)), value(std::move(v)) {
  grad = Tensor::zeros(value.shape());
}

void Parameter::zero_grad() {
  std::fill(grad.data(), grad.data() + grad.size(), 0.0);
}

void Parameter::snap_to_f32() {
  for (std::size_t i = 0; i < value.size(); ++i) {
    value[i] = static_cast<double>(static_cast<float>(value[i]));
  }
}

void zero_gradients(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
}

void init_uniform_fan_in(Tensor& t, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  init_uniform(t, -bound, bound, rng);
}

void init_uniform(Tensor& t, double lo, double hi, Rng& rng) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(static_cast<float>(rng.uniform(lo, hi)));
  }
}

Var Tape::emplace(const char* op, Tensor value, std::vector<int> parents, BackwardFn fn) {
  Node n;
  n.value = std::make_shared<Tensor>(std::move(value));
  n.parents = std::move(parents);
  n.backward = std::move(fn);
  n.op = op;
  n.requires_grad = any_requires_grad(n.parents);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

bool Tape::any_requires_grad(const std::vector<int>& parents) const {
  for (int p : parents) {
    if (nodes_[static_cast<std::size_t>(p)].requires_grad) return true;
  }
  return false;
}

Var Tape::constant(Tensor t) {
  return emplace("constant", std::move(t), {}, nullptr);
}

Var Tape::constant_ref(const Tensor& t) {
  Node n;
  n.value = std::shared_ptr<const Tensor>(std::shared_ptr<void>(), &t);
  n.op = "constant_ref";
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::parameter(Parameter& p) {
  Node n;
  n.value = std::shared_ptr<const Tensor>(std::shared_ptr<void>(), &p.value);
  n.param = &p;
  n.op = "parameter";
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::value(Var v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) throw ValidationError("invalid tape variable");
  return val(v.id);
}

void Tape::accumulate(int id, const Tensor& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.requires_grad) return;
  Tensor& slot = grads_[static_cast<std::size_t>(id)];
  if (slot.size() == 0) {
    slot = g;
    return;
  }
  for (std::size_t i = 0; i < slot.size(); ++i) slot[i] += g[i];
}

void Tape::backward(Var loss) {
  if (!loss.valid() || loss.id >= static_cast<int>(nodes_.size())) throw ValidationError("invalid loss variable");
  if (val(loss.id).size() != 1) {
    throw ValidationError("backward requires a scalar loss, got shape " + shape_string(val(loss.id).shape()));
  }
  for (const Node& n : nodes_) {
    if (!n.value->all_finite()) {
      throw NumericalError(std::string("backward: non-finite value recorded by op '") + n.op + "'");
    }
  }
  grads_.assign(nodes_.size(), Tensor{});
  grads_[static_cast<std::size_t>(loss.id)] = Tensor::full(val(loss.id).shape(), 1.0);
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad) continue;
    const Tensor& g = grads_[static_cast<std::size_t>(id)];
    if (g.size() == 0) continue;
    if (!g.all_finite()) {
      throw NumericalError(std::string("backward: non-finite gradient at op '") + n.op + "'");
    }
    if (n.param != nullptr) {
      for (std::size_t i = 0; i < g.size(); ++i) n.param->grad[i] += g[i];
    }
    if (n.backward) n.backward(*this, n, g);
  }
  grads_.clear();
}

// --- elementwise -------------------------------------------------------------

Var Tape::add(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  check_same_shape(ta, tb, "add");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tb[i];
  return emplace("add", std::move(out), {a.id, b.id}, [](Tape& t, const Node& n, const Tensor& g) {
    t.accumulate(n.parents[0], g);
    t.accumulate(n.parents[1], g);
  });
}

Var Tape::sub(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  check_same_shape(ta, tb, "sub");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tb[i];
  return emplace("sub", std::move(out), {a.id, b.id}, [](Tape& t, const Node& n, const Tensor& g) {
    t.accumulate(n.parents[0], g);
    Tensor neg = g;
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -neg[i];
    t.accumulate(n.parents[1], neg);
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  check_same_shape(ta, tb, "mul");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
  return emplace("mul", std::move(out), {a.id, b.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& pa = t.val(n.parents[0]);
    const Tensor& pb = t.val(n.parents[1]);
    Tensor ga = g, gb = g;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] *= pb[i];
      gb[i] *= pa[i];
    }
    t.accumulate(n.parents[0], ga);
    t.accumulate(n.parents[1], gb);
  });
}

Var Tape::affine(Var a, double s, double shift) {
  Tensor out = val(a.id);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * out[i] + shift;
  return emplace("affine", std::move(out), {a.id}, [s](Tape& t, const Node& n, const Tensor& g) {
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= s;
    t.accumulate(n.parents[0], ga);
  });
}

Var Tape::sigmoid(Var a) {
  Tensor out = val(a.id);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = out[i];
    out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  Var v = emplace("sigmoid", std::move(out), {a.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& y = *n.value;
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= y[i] * (1.0 - y[i]);
    t.accumulate(n.parents[0], ga);
  });
  return v;
}

Var Tape::tanh(Var a) {
  Tensor out = val(a.id);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  return emplace("tanh", std::move(out), {a.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& y = *n.value;
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= 1.0 - y[i] * y[i];
    t.accumulate(n.parents[0], ga);
  });
}

Var Tape::relu(Var a) {
  Tensor out = val(a.id);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, out[i]);
  return emplace("relu", std::move(out), {a.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) {
      if (x[i] <= 0.0) ga[i] = 0.0;
    }
    t.accumulate(n.parents[0], ga);
  });
}

Var Tape::exp(Var a) {
  Tensor out = val(a.id);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  return emplace("exp", std::move(out), {a.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& y = *n.value;
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= y[i];
    t.accumulate(n.parents[0], ga);
  });
}

Var Tape::log(Var a) {
  Tensor out = val(a.id);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
  return emplace("log", std::move(out), {a.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] /= x[i];
    t.accumulate(n.parents[0], ga);
  });
}

Var Tape::softplus(Var a) {
  Tensor out = val(a.id);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = out[i];
    out[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  return emplace("softplus", std::move(out), {a.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double xv = x[i];
      const double s = xv >= 0.0 ? 1.0 / (1.0 + std::exp(-xv)) : std::exp(xv) / (1.0 + std::exp(xv));
      ga[i] *= s;
    }
    t.accumulate(n.parents[0], ga);
  });
}

Var Tape::clamp(Var a, double lo, double hi) {
  Tensor out = val(a.id);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(hi, std::max(lo, out[i]));
  return emplace("clamp", std::move(out), {a.id}, [lo, hi](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) {
      if (x[i] < lo || x[i] > hi) ga[i] = 0.0;
    }
    t.accumulate(n.parents[0], ga);
  });
}

// --- matrix ------------------------------------------------------------------

Var Tape::matmul(Var a, Var b) {
  Tensor out = nn::matmul(val(a.id), val(b.id));
  return emplace("matmul", std::move(out), {a.id, b.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& pa = t.val(n.parents[0]);
    const Tensor& pb = t.val(n.parents[1]);
    t.accumulate(n.parents[0], nn::matmul(g, nn::transpose(pb)));
    t.accumulate(n.parents[1], nn::matmul(nn::transpose(pa), g));
  });
}

Var Tape::transpose(Var a) {
  Tensor out = nn::transpose(val(a.id));
  return emplace("transpose", std::move(out), {a.id}, [](Tape& t, const Node& n, const Tensor& g) {
    t.accumulate(n.parents[0], nn::transpose(g));
  });
}

Var Tape::add_row_broadcast(Var m, Var rowv) {
  const Tensor& tm = val(m.id);
  const Tensor& tr = val(rowv.id);
  check_rank2(tm, "add_row_broadcast");
  if (tr.rank() != 1 || tr.dim(0) != tm.cols()) {
    throw ValidationError("add_row_broadcast shape mismatch: " + shape_string(tm.shape()) + " + " +
                          shape_string(tr.shape()));
  }
  Tensor out = tm;
  for (int i = 0; i < tm.rows(); ++i) {
    for (int j = 0; j < tm.cols(); ++j) out(i, j) += tr[static_cast<std::size_t>(j)];
  }
  return emplace("add_row_broadcast", std::move(out), {m.id, rowv.id}, [](Tape& t, const Node& n, const Tensor& g) {
    t.accumulate(n.parents[0], g);
    Tensor gr({g.cols()});
    for (int i = 0; i < g.rows(); ++i) {
      for (int j = 0; j < g.cols(); ++j) gr[static_cast<std::size_t>(j)] += g(i, j);
    }
    t.accumulate(n.parents[1], gr);
  });
}

Var Tape::mul_rows(Var m, Var v) {
  const Tensor& tm = val(m.id);
  const Tensor& tv = val(v.id);
  check_rank2(tm, "mul_rows");
  if (tv.rank() != 1 || tv.dim(0) != tm.rows()) {
    throw ValidationError("mul_rows shape mismatch: " + shape_string(tm.shape()) + " rows vs " +
                          shape_string(tv.shape()));
  }
  Tensor out = tm;
  for (int i = 0; i < tm.rows(); ++i) {
    const double s = tv[static_cast<std::size_t>(i)];
    for (int j = 0; j < tm.cols(); ++j) out(i, j) *= s;
  }
  return emplace("mul_rows", std::move(out), {m.id, v.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& pm = t.val(n.parents[0]);
    const Tensor& pv = t.val(n.parents[1]);
    Tensor gm = g;
    Tensor gv({pm.rows()});
    for (int i = 0; i < pm.rows(); ++i) {
      double acc = 0.0;
      for (int j = 0; j < pm.cols(); ++j) {
        acc += g(i, j) * pm(i, j);
        gm(i, j) *= pv[static_cast<std::size_t>(i)];
      }
      gv[static_cast<std::size_t>(i)] = acc;
    }
    t.accumulate(n.parents[0], gm);
    t.accumulate(n.parents[1], gv);
  });
}

Var Tape::mul_cols(Var m, Var v) {
  const Tensor& tm = val(m.id);
  const Tensor& tv = val(v.id);
  check_rank2(tm, "mul_cols");
  if (tv.rank() != 1 || tv.dim(0) != tm.cols()) {
    throw ValidationError("mul_cols shape mismatch: " + shape_string(tm.shape()) + " cols vs " +
                          shape_string(tv.shape()));
  }
  Tensor out = tm;
  for (int i = 0; i < tm.rows(); ++i) {
    for (int j = 0; j < tm.cols(); ++j) out(i, j) *= tv[static_cast<std::size_t>(j)];
  }
  return emplace("mul_cols", std::move(out), {m.id, v.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& pm = t.val(n.parents[0]);
    const Tensor& pv = t.val(n.parents[1]);
    Tensor gm = g;
    Tensor gv({pm.cols()});
    for (int i = 0; i < pm.rows(); ++i) {
      for (int j = 0; j < pm.cols(); ++j) {
        gv[static_cast<std::size_t>(j)] += g(i, j) * pm(i, j);
        gm(i, j) *= pv[static_cast<std::size_t>(j)];
      }
    }
    t.accumulate(n.parents[0], gm);
    t.accumulate(n.parents[1], gv);
  });
}

Var Tape::expand_cols(Var v, int cols) {
  const Tensor& tv = val(v.id);
  if (tv.rank() != 1) throw ValidationError("expand_cols requires rank-1 input, got " + shape_string(tv.shape()));
  if (tv.dim(0) == 0 || cols < 1) throw ValidationError("expand_cols requires nonempty input and cols >= 1");
  const int n = tv.dim(0);
  Tensor out({n, cols});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = tv[static_cast<std::size_t>(i)];
  }
  return emplace("expand_cols", std::move(out), {v.id}, [](Tape& t, const Node& n, const Tensor& g) {
    Tensor gv({g.rows()});
    for (int i = 0; i < g.rows(); ++i) {
      double acc = 0.0;
      for (int j = 0; j < g.cols(); ++j) acc += g(i, j);
      gv[static_cast<std::size_t>(i)] = acc;
    }
    t.accumulate(n.parents[0], gv);
  });
}

namespace {

// shared softmax backward: dx = y * (g - sum(g * y)) per row
void softmax_backward(Tape& t, const Tensor& y, const Tensor& g, int parent,
                      const std::function<void(Tape&, int, const Tensor&)>& sink) {
  Tensor gx = g;
  for (int i = 0; i < y.rows(); ++i) {
    double dotp = 0.0;
    for (int j = 0; j < y.cols(); ++j) dotp += g(i, j) * y(i, j);
    for (int j = 0; j < y.cols(); ++j) gx(i, j) = y(i, j) * (g(i, j) - dotp);
  }
  sink(t, parent, gx);
}

}  // namespace

Var Tape::softmax_rows(Var m) {
  Tensor out = nn::softmax_rows(val(m.id));
  return emplace("softmax_rows", std::move(out), {m.id}, [](Tape& t, const Node& n, const Tensor& g) {
    softmax_backward(t, *n.value, g, n.parents[0],
                     [](Tape& tt, int id, const Tensor& gx) { tt.accumulate(id, gx); });
  });
}

Var Tape::softmax_rows_masked(Var m, std::vector<std::uint8_t> keep_col) {
  Tensor out = nn::softmax_rows_masked(val(m.id), keep_col);
  return emplace("softmax_rows_masked", std::move(out), {m.id}, [](Tape& t, const Node& n, const Tensor& g) {
    // masked entries have y == 0, so the shared formula already zeroes them
    softmax_backward(t, *n.value, g, n.parents[0],
                     [](Tape& tt, int id, const Tensor& gx) { tt.accumulate(id, gx); });
  });
}

Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  Tensor out = nn::layer_norm(val(x.id), val(gamma.id), val(beta.id), eps);
  return emplace("layer_norm", std::move(out), {x.id, gamma.id, beta.id},
                 [eps](Tape& t, const Node& n, const Tensor& g) {
                   const Tensor& x = t.val(n.parents[0]);
                   const Tensor& gamma = t.val(n.parents[1]);
                   const int rows = x.rows(), d = x.cols();
                   Tensor gx({rows, d});
                   Tensor ggamma({d});
                   Tensor gbeta({d});
                   for (int i = 0; i < rows; ++i) {
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
                     // xhat_j = (x_j - mean) * inv; dy through gamma
                     double mean_dy = 0.0, mean_dy_xhat = 0.0;
                     for (int j = 0; j < d; ++j) {
                       const double xhat = (x(i, j) - mean) * inv;
                       const double dy = g(i, j) * gamma[static_cast<std::size_t>(j)];
                       mean_dy += dy;
                       mean_dy_xhat += dy * xhat;
                       ggamma[static_cast<std::size_t>(j)] += g(i, j) * xhat;
                       gbeta[static_cast<std::size_t>(j)] += g(i, j);
                     }
                     mean_dy /= d;
                     mean_dy_xhat /= d;
                     for (int j = 0; j < d; ++j) {
                       const double xhat = (x(i, j) - mean) * inv;
                       const double dy = g(i, j) * gamma[static_cast<std::size_t>(j)];
                       gx(i, j) = (dy - mean_dy - xhat * mean_dy_xhat) * inv;
                     }
                   }
                   t.accumulate(n.parents[0], gx);
                   t.accumulate(n.parents[1], ggamma);
                   t.accumulate(n.parents[2], gbeta);
                 });
}

Var Tape::l2_normalize_rows(Var m) {
  const Tensor& tm = val(m.id);
  check_rank2(tm, "l2_normalize_rows");
  constexpr double kEps = 1e-12;  // guards zero rows
  Tensor out = tm;
  for (int i = 0; i < tm.rows(); ++i) {
    double sq = 0.0;
    for (int j = 0; j < tm.cols(); ++j) sq += tm(i, j) * tm(i, j);
    const double inv = 1.0 / std::sqrt(sq + kEps);
    for (int j = 0; j < tm.cols(); ++j) out(i, j) *= inv;
  }
  return emplace("l2_normalize_rows", std::move(out), {m.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    const Tensor& y = *n.value;
    Tensor gx = g;
    for (int i = 0; i < x.rows(); ++i) {
      double sq = 0.0, ydotg = 0.0;
      for (int j = 0; j < x.cols(); ++j) {
        sq += x(i, j) * x(i, j);
        ydotg += y(i, j) * g(i, j);
      }
      const double inv = 1.0 / std::sqrt(sq + 1e-12);
      for (int j = 0; j < x.cols(); ++j) {
        gx(i, j) = (g(i, j) - y(i, j) * ydotg) * inv;
      }
    }
    t.accumulate(n.parents[0], gx);
  });
}

Var Tape::row_max(Var m) {
  const Tensor& tm = val(m.id);
  check_rank2(tm, "row_max");
  Tensor out({tm.rows()});
  auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(tm.rows()), 0);
  for (int i = 0; i < tm.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < tm.cols(); ++j) {
      if (tm(i, j) > tm(i, best)) best = j;
    }
    (*argmax)[static_cast<std::size_t>(i)] = best;
    out[static_cast<std::size_t>(i)] = tm(i, best);
  }
  return emplace("row_max", std::move(out), {m.id}, [argmax](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    Tensor gx(x.shape());
    for (int i = 0; i < x.rows(); ++i) {
      gx(i, (*argmax)[static_cast<std::size_t>(i)]) = g[static_cast<std::size_t>(i)];
    }
    t.accumulate(n.parents[0], gx);
  });
}

// --- shape / indexing ----------------------------------------------------------

Var Tape::reshape(Var a, std::vector<int> shape) {
  Tensor out(std::move(shape), std::vector<double>(val(a.id).data(), val(a.id).data() + val(a.id).size()));
  return emplace("reshape", std::move(out), {a.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    Tensor gx(x.shape(), std::vector<double>(g.data(), g.data() + g.size()));
    t.accumulate(n.parents[0], gx);
  });
}

Var Tape::slice_rows(Var m, int begin, int count) {
  const Tensor& tm = val(m.id);
  check_rank2(tm, "slice_rows");
  if (begin < 0 || count < 1 || begin + count > tm.rows()) {
    throw ValidationError("slice_rows out of range for " + shape_string(tm.shape()));
  }
  Tensor out({count, tm.cols()});
  std::memcpy(out.data(), tm.data() + static_cast<std::size_t>(begin) * tm.cols(),
              sizeof(double) * static_cast<std::size_t>(count) * tm.cols());
  return emplace("slice_rows", std::move(out), {m.id}, [begin, count](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    Tensor gx(x.shape());
    std::memcpy(gx.data() + static_cast<std::size_t>(begin) * x.cols(), g.data(),
                sizeof(double) * static_cast<std::size_t>(count) * x.cols());
    t.accumulate(n.parents[0], gx);
  });
}

Var Tape::slice_cols(Var m, int begin, int count) {
  const Tensor& tm = val(m.id);
  check_rank2(tm, "slice_cols");
  if (begin < 0 || count < 1 || begin + count > tm.cols()) {
    throw ValidationError("slice_cols out of range for " + shape_string(tm.shape()));
  }
  Tensor out({tm.rows(), count});
  for (int i = 0; i < tm.rows(); ++i) {
    for (int j = 0; j < count; ++j) out(i, j) = tm(i, begin + j);
  }
  return emplace("slice_cols", std::move(out), {m.id}, [begin, count](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    Tensor gx(x.shape());
    for (int i = 0; i < x.rows(); ++i) {
      for (int j = 0; j < count; ++j) gx(i, begin + j) = g(i, j);
    }
    t.accumulate(n.parents[0], gx);
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ValidationError("concat_cols of zero parts");
  int rows = val(parts[0].id).rows();
  int cols = 0;
  std::vector<int> parents;
  for (Var p : parts) {
    const Tensor& t = val(p.id);
    check_rank2(t, "concat_cols");
    if (t.rows() != rows) throw ValidationError("concat_cols row mismatch");
    cols += t.cols();
    parents.push_back(p.id);
  }
  Tensor out({rows, cols});
  int off = 0;
  for (Var p : parts) {
    const Tensor& t = val(p.id);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < t.cols(); ++j) out(i, off + j) = t(i, j);
    }
    off += t.cols();
  }
  return emplace("concat_cols", std::move(out), std::move(parents), [](Tape& t, const Node& n, const Tensor& g) {
    int off = 0;
    for (int pid : n.parents) {
      const Tensor& x = t.val(pid);
      Tensor gx(x.shape());
      for (int i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < x.cols(); ++j) gx(i, j) = g(i, off + j);
      }
      t.accumulate(pid, gx);
      off += x.cols();
    }
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ValidationError("concat_rows of zero parts");
  int cols = val(parts[0].id).cols();
  int rows = 0;
  std::vector<int> parents;
  for (Var p : parts) {
    const Tensor& t = val(p.id);
    check_rank2(t, "concat_rows");
    if (t.cols() != cols) throw ValidationError("concat_rows column mismatch");
    rows += t.rows();
    parents.push_back(p.id);
  }
  Tensor out({rows, cols});
  int off = 0;
  for (Var p : parts) {
    const Tensor& t = val(p.id);
    std::memcpy(out.data() + static_cast<std::size_t>(off) * cols, t.data(), sizeof(double) * t.size());
    off += t.rows();
  }
  return emplace("concat_rows", std::move(out), std::move(parents), [](Tape& t, const Node& n, const Tensor& g) {
    int off = 0;
    for (int pid : n.parents) {
      const Tensor& x = t.val(pid);
      Tensor gx(x.shape());
      std::memcpy(gx.data(), g.data() + static_cast<std::size_t>(off) * x.cols(), sizeof(double) * x.size());
      t.accumulate(pid, gx);
      off += x.rows();
    }
  });
}

Var Tape::embedding(Var table, std::vector<int> ids) {
  const Tensor& tt = val(table.id);
  check_rank2(tt, "embedding");
  for (int id : ids) {
    if (id < 0 || id >= tt.rows()) {
      throw ValidationError("embedding id " + std::to_string(id) + " out of range for table " +
                            shape_string(tt.shape()));
    }
  }
  const int n = static_cast<int>(ids.size());
  Tensor out({n, tt.cols()});
  for (int i = 0; i < n; ++i) {
    std::memcpy(out.data() + static_cast<std::size_t>(i) * tt.cols(),
                tt.data() + static_cast<std::size_t>(ids[static_cast<std::size_t>(i)]) * tt.cols(),
                sizeof(double) * static_cast<std::size_t>(tt.cols()));
  }
  auto ids_ptr = std::make_shared<std::vector<int>>(std::move(ids));
  return emplace("embedding", std::move(out), {table.id}, [ids_ptr](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& tab = t.val(n.parents[0]);
    Tensor gt(tab.shape());
    for (std::size_t i = 0; i < ids_ptr->size(); ++i) {
      const int row = (*ids_ptr)[i];
      for (int j = 0; j < tab.cols(); ++j) gt(row, j) += g(static_cast<int>(i), j);
    }
    t.accumulate(n.parents[0], gt);
  });
}

Var Tape::pick(Var a, int flat_index) {
  const Tensor& ta = val(a.id);
  if (flat_index < 0 || static_cast<std::size_t>(flat_index) >= ta.size()) {
    throw ValidationError("pick index " + std::to_string(flat_index) + " out of range for " +
                          shape_string(ta.shape()));
  }
  Tensor out = Tensor::scalar(ta[static_cast<std::size_t>(flat_index)]);
  return emplace("pick", std::move(out), {a.id}, [flat_index](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    Tensor gx(x.shape());
    gx[static_cast<std::size_t>(flat_index)] = g[0];
    t.accumulate(n.parents[0], gx);
  });
}

Var Tape::sum_all(Var a) {
  const Tensor& ta = val(a.id);
  double acc = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) acc += ta[i];
  return emplace("sum_all", Tensor::scalar(acc), {a.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    t.accumulate(n.parents[0], Tensor::full(x.shape(), g[0]));
  });
}

Var Tape::mean_all(Var a) {
  const Tensor& ta = val(a.id);
  double acc = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) acc += ta[i];
  const double inv = 1.0 / static_cast<double>(ta.size());
  return emplace("mean_all", Tensor::scalar(acc * inv), {a.id}, [inv](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& x = t.val(n.parents[0]);
    t.accumulate(n.parents[0], Tensor::full(x.shape(), g[0] * inv));
  });
}

Var Tape::dot(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  if (ta.size() != tb.size()) {
    throw ValidationError("dot size mismatch: " + shape_string(ta.shape()) + " vs " + shape_string(tb.shape()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) acc += ta[i] * tb[i];
  return emplace("dot", Tensor::scalar(acc), {a.id, b.id}, [](Tape& t, const Node& n, const Tensor& g) {
    const Tensor& pa = t.val(n.parents[0]);
    const Tensor& pb = t.val(n.parents[1]);
    Tensor ga(pa.shape()), gb(pb.shape());
    for (std::size_t i = 0; i < pa.size(); ++i) {
      ga[i] = g[0] * pb[i];
      gb[i] = g[0] * pa[i];
    }
    t.accumulate(n.parents[0], ga);
    t.accumulate(n.parents[1], gb);
  });
}

}  // namespace gazby::nn
