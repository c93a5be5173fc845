#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "gazby/rng.hpp"
#include "gazby/tensor.hpp"

namespace gazby::nn {

// A named, trainable tensor. The gradient always mirrors the value's shape
// and accumulates across backward() calls until zero_grad().
//
// Values are kept float32-representable at all times (initialization, every
// optimizer step, checkpoint load), so the float32 checkpoint payload is an
// exact encoding and save -> load reproduces scores bitwise. Forward and
// backward arithmetic still runs in doubles.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string param_name, Tensor v);

  void zero_grad();
  void snap_to_f32();
};

void zero_gradients(const std::vector<Parameter*>& params);

// Fills `t` with uniform(-bound, bound) where bound = 1/sqrt(fan_in), then
// snaps to f32.
void init_uniform_fan_in(Tensor& t, int fan_in, Rng& rng);
void init_uniform(Tensor& t, double lo, double hi, Rng& rng);

// Reverse-mode tape over tensor-valued nodes. Nodes are created in
// topological order by construction; backward() walks them in reverse.
//
// A tape instance is single-threaded. Scoring under frozen parameters builds
// constant leaves (no copies, no gradient bookkeeping), so concurrent
// forward passes across inputs each use their own tape.
class Tape {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // --- leaves ---
  Var constant(Tensor t);
  // Non-owning view of a tensor that outlives the tape (frozen parameters,
  // cached embeddings). No gradient flows into it.
  Var constant_ref(const Tensor& t);
  Var parameter(Parameter& p);

  // --- elementwise / scalar ---
  Var add(Var a, Var b);                 // same shape
  Var sub(Var a, Var b);                 // same shape
  Var mul(Var a, Var b);                 // same shape, elementwise
  Var affine(Var a, double scale, double shift);
  Var scale(Var a, double s) { return affine(a, s, 0.0); }
  Var neg(Var a) { return affine(a, -1.0, 0.0); }
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var softplus(Var a);                   // log(1 + e^x), stable
  Var clamp(Var a, double lo, double hi);

  // --- matrix ---
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add_row_broadcast(Var m, Var row);  // m[n x d] + row[d] per row
  Var mul_rows(Var m, Var v);             // row i scaled by v[i]
  Var mul_cols(Var m, Var v);             // column j scaled by v[j]
  Var expand_cols(Var v, int cols);       // v[n] -> [n x cols], every column = v
  Var softmax_rows(Var m);
  Var softmax_rows_masked(Var m, std::vector<std::uint8_t> keep_col);
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
  Var l2_normalize_rows(Var m);
  Var row_max(Var m);                     // [r x c] -> [r]; subgradient to first argmax

  // --- shape / indexing ---
  Var reshape(Var a, std::vector<int> shape);
  Var slice_rows(Var m, int begin, int count);
  Var slice_cols(Var m, int begin, int count);
  Var row(Var m, int i) { return slice_rows(m, i, 1); }
  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  Var embedding(Var table, std::vector<int> ids);  // gather rows
  // same gather, named for selecting rows of an intermediate matrix
  Var gather_rows(Var m, std::vector<int> rows) { return embedding(m, std::move(rows)); }
  Var pick(Var a, int flat_index);                 // -> scalar
  Var sum_all(Var a);                              // -> scalar
  Var mean_all(Var a);                             // -> scalar
  Var dot(Var a, Var b);                           // flat dot product -> scalar

  // --- execution ---
  const Tensor& value(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every reachable
  // Parameter. Throws ValidationError if loss is not scalar and
  // NumericalError if any recorded value or propagated gradient is
  // non-finite. Repeated calls accumulate; zero via Parameter::zero_grad.
  void backward(Var loss);

 private:
  struct Node;
  using BackwardFn = std::function<void(Tape&, const Node&, const Tensor& grad)>;

  struct Node {
    std::shared_ptr<const Tensor> value;
    std::vector<int> parents;
    BackwardFn backward;
    Parameter* param = nullptr;
    const char* op = "leaf";
    bool requires_grad = false;
  };

  Var emplace(const char* op, Tensor value, std::vector<int> parents, BackwardFn fn);
  const Tensor& val(int id) const { return *nodes_[static_cast<std::size_t>(id)].value; }
  void accumulate(int id, const Tensor& g);
  bool any_requires_grad(const std::vector<int>& parents) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;  // scratch, sized during backward
};

using Var = Tape::Var;

// Memoized Parameter -> Var binding for one tape. Trainable maps register
// gradient sinks; frozen maps create non-owning constants, which is the
// scoring path (no copies, no gradient bookkeeping). The const_cast in the
// trainable path is confined to callers that hold mutable models.
class ParamMap {
 public:
  static ParamMap trainable(Tape& tape) { return ParamMap(tape, true); }
  static ParamMap frozen(Tape& tape) { return ParamMap(tape, false); }

  Var operator()(const Parameter& p) {
    auto it = cache_.find(&p);
    if (it != cache_.end()) return it->second;
    Var v = trainable_ ? tape_->parameter(const_cast<Parameter&>(p)) : tape_->constant_ref(p.value);
    cache_.emplace(&p, v);
    return v;
  }

  Tape& tape() { return *tape_; }
  bool is_trainable() const { return trainable_; }

 private:
  ParamMap(Tape& tape, bool trainable) : tape_(&tape), trainable_(trainable) {}
  Tape* tape_;
  bool trainable_;
  std::unordered_map<const Parameter*, Var> cache_;
};

}  // namespace gazby::nn
