#pragma once

#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "holo/nn/tensor.hpp"

namespace holo::nn {

struct Parameter {
  std::string name;
  Tensor4 value;
  Tensor4 grad;
};

class Tape;

/// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor4& value() const;
  const Tensor4& grad() const;
};

/// Reverse-mode autodiff recorder. Every op appends a node holding its value
/// and a closure that pushes the node's gradient to its inputs.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor4 value);
  /// Leaf bound to a parameter; backward() accumulates into param.grad.
  /// Repeated calls with the same parameter return the same leaf.
  Var param(Parameter& p);
  /// Leaf whose gradient is kept on the tape (read it with Var::grad()).
  Var input(Tensor4 value);

  Var record(Tensor4 value, std::function<void(Tape&, int self)> backward);

  const Tensor4& value(int id) const { return nodes_[id].value; }
  const Tensor4& grad(int id) const { return nodes_[id].grad; }
  /// Gradient buffer of node id, allocated as zeros on first use.
  Tensor4& grad_buffer(int id);
  bool has_grad(int id) const { return !nodes_[id].grad.empty(); }

  /// Seeds d(loss)/d(loss) = 1 (loss must hold one element) and runs the
  /// recorded closures in reverse order. Throws NumericalError on a
  /// non-finite parameter gradient.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor4 value;
    Tensor4 grad;
    std::function<void(Tape&, int)> backward;
    Parameter* param = nullptr;
  };
  std::deque<Node> nodes_;  // deque: values stay put while ops append
  std::unordered_map<const Parameter*, int> param_nodes_;
};

// Elementwise and structural ops. Shapes must match unless stated.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var one_minus(Var a);
Var square(Var a);
/// max(x, 0)^e; the gradient is zero where x <= 0.
Var pow_clamped(Var a, double e);
Var leaky_relu(Var a, double slope = 0.1);
Var sigmoid(Var a);
Var tanh(Var a);

/// Concatenate along channels.
Var concat(Var a, Var b);
/// Select channel c as a one-channel tensor.
Var channel(Var a, int c);

/// Same-size cross-correlation with zero padding. w: (out, in, k, k) with odd k,
/// b: (1, out, 1, 1).
Var conv2d(Var x, Var w, Var b, int dilation = 1);
Var avgpool2(Var x);
Var upsample2(Var x);
/// x flattened per batch element to (n, features); w: (out, features, 1, 1),
/// b: (1, out, 1, 1). Output (n, out, 1, 1).
Var dense(Var x, Var w, Var b);

Var sum(Var a);
Var mean(Var a);
/// Mean absolute difference.
Var mae(Var a, Var b);

/// Per-plane separable correlation with a fixed normalized 1D window.
/// 'valid' shrinks each side by size - 1; 'same' uses symmetric boundaries.
Var filter_valid(Var x, const std::vector<double>& taps);
Var filter_same_symmetric(Var x, const std::vector<double>& taps);

}  // namespace holo::nn
