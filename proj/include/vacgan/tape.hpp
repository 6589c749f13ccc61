#pragma once

#include <functional>
#include <vector>

#include "vacgan/tensor.hpp"

namespace vacgan {

class Tape;

// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

enum class Padding { same, valid };

// Reverse-mode tape. One tape per training step, single-threaded.
class Tape {
 public:
  Var leaf(Tensor value, bool requires_grad = true);

  const Tensor& value(Var v) const { return nodes_[check(v)].value; }
  const Tensor& grad(Var v) const { return nodes_[check(v)].grad; }

  // Reverse traversal from a scalar output; fills grad for every node.
  void backward(Var scalar_output);

  std::size_t num_nodes() const { return nodes_.size(); }
  void clear();

  // Internal surface for primitive implementations.
  Var record(Tensor value, std::vector<int> inputs,
             std::function<void(Tape&, int)> backward_rule);
  Tensor& grad_ref(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
  const Tensor& value_ref(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<int> inputs;
    std::function<void(Tape&, int)> backward_rule;  // arg: this node's id
    bool requires_grad = true;
  };

  int check(Var v) const;

  std::vector<Node> nodes_;
};

// Elementwise, same-shape binary primitives.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

// Scalar-coefficient helpers used to assemble weighted losses.
Var scale(Var a, double c);
Var add_const(Var a, double c);

Var matmul(Var a, Var b);                          // (m,k) x (k,n)
Var affine(Var x, Var w, Var b);                   // x (n,in), w (in,out), b (out)
Var conv2d(Var x, Var w, Var b, int stride, Padding padding);  // x NCHW, w FCkk, b (F)
Var maxpool2x2(Var x);
Var unpool2x2(Var x);  // nearest-neighbor duplication

Var relu(Var x);
Var elu(Var x);  // alpha = 1
Var sigmoid(Var x);
Var tanh_(Var x);
Var abs_(Var x);
Var square(Var x);
Var mean(Var x);  // reduce all elements to a scalar
Var sum(Var x);
Var concat(Var a, Var b, std::size_t axis);
Var reshape(Var x, std::vector<std::size_t> shape);

// Mean binary cross-entropy with probabilities clamped to [eps, 1-eps].
Var bce(Var prediction, const Tensor& target, double eps = 1e-7);

// Mean squared elementwise difference |v - reconstruction|^2.
Var mse_loss(Var v, Var reconstruction);

struct GradCheckResult {
  bool pass = false;
  double max_rel_error = 0.0;
};

// Compares backward() gradients against central finite differences.
// Relative error uses an absolute floor of 1e-8 for near-zero entries.
GradCheckResult grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& point,
                           double step, double tol);

}  // namespace vacgan
