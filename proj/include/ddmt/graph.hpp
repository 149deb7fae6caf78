#pragma once

#include <map>
#include <string>
#include <vector>

#include "ddmt/tensor.hpp"

namespace ddmt {

using NamedTensors = std::map<std::string, Tensor>;

// Reverse-mode differentiable computation graph over 2-D tensors.
//
// Nodes are appended in evaluation order (arguments must already exist), so
// the graph is acyclic by construction and evaluation order is deterministic.
// Parameters live inside the graph and are updated in place between
// evaluations; inputs are supplied per call.
class Graph {
 public:
  enum class Op {
    Input,
    Param,
    Const,
    MatMul,         // a(n x k) * b(k x m)
    MatMulNT,       // a(n x k) * b(m x k)^T
    Transpose,
    Add,            // elementwise, same shape
    Mul,            // elementwise, same shape
    Scale,          // a * scalar
    ScaleByInput,   // a * s[0], s a non-differentiable 1 x 1 input
    AddRow,         // a(n x m) + broadcast v(1 x m)
    Relu,
    LayerNorm,      // row-wise; args: a(n x d), gain(1 x d), bias(1 x d)
    MaskedSoftmax,  // row-wise; args: logits, mask01 (1 = blocked)
    Mse,            // mean over entries of (a - b)^2 -> 1 x 1
    Sum,            // sum of entries -> 1 x 1
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    int c = -1;
    double scalar = 0.0;  // Scale factor / LayerNorm eps
    int rows = 0;
    int cols = 0;
    std::string name;  // Input / Param only
  };

  int input(const std::string& name, int rows, int cols);
  int parameter(const std::string& name, Tensor init);
  int constant(Tensor value);

  int matmul(int a, int b);
  int matmul_nt(int a, int b);
  int transpose(int a);
  int add(int a, int b);
  int mul(int a, int b);
  int scale(int a, double factor);
  int scale_by(int a, int s);
  int add_row(int a, int v);
  int relu(int a);
  int layer_norm(int a, int gain, int bias, double eps = 1e-5);
  int masked_softmax(int logits, int mask01);
  int mse(int a, int b);
  int sum(int a);

  void set_output(int node);
  int output() const { return output_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  NamedTensors& params() { return params_; }
  const NamedTensors& params() const { return params_; }
  const Tensor& const_value(int id) const { return consts_.at(id); }

  // Zero tensors shaped like the trainable parameters (gradient accumulators).
  NamedTensors zero_grads() const;

  // Throws if a trainable parameter is never consumed by any node.
  void check_params_used() const;

 private:
  int push(Node n);
  void require(bool cond, int node_hint, const std::string& msg) const;
  const Node& arg(int id, int at_node) const;

  std::vector<Node> nodes_;
  NamedTensors params_;
  std::map<int, Tensor> consts_;
  int output_ = -1;
};

// Per-evaluation buffers. Reusable across calls with the same graph; each
// concurrent evaluation needs its own workspace.
struct Workspace {
  std::vector<Tensor> val;
  std::vector<Tensor> grad;
};

// Forward pass; returns the output node's value (owned by the workspace).
const Tensor& graph_forward(const Graph& g, const NamedTensors& inputs, Workspace& ws);

// Backward pass from a scalar output. Requires a prior graph_forward with the
// same workspace. Parameter gradients are accumulated (+=) into grad_accum.
void graph_backward(const Graph& g, Workspace& ws, NamedTensors& grad_accum);

struct EvalResult {
  Tensor value;
  NamedTensors grads;
};

// One-shot evaluation. With want_grads the output must be scalar (1 x 1).
EvalResult evaluate_and_backprop(const Graph& g, const NamedTensors& inputs, bool want_grads = true);

// p <- p - lr * g for every named parameter. Names and shapes must match.
void sgd_step(NamedTensors& params, const NamedTensors& grads, double lr);

}  // namespace ddmt
