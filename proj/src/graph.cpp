#include "ddmt/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace ddmt {

namespace {

const char* op_name(Graph::Op op) {
  switch (op) {
    case Graph::Op::Input: return "Input";
    case Graph::Op::Param: return "Param";
    case Graph::Op::Const: return "Const";
    case Graph::Op::MatMul: return "MatMul";
    case Graph::Op::MatMulNT: return "MatMulNT";
    case Graph::Op::Transpose: return "Transpose";
    case Graph::Op::Add: return "Add";
    case Graph::Op::Mul: return "Mul";
    case Graph::Op::Scale: return "Scale";
    case Graph::Op::ScaleByInput: return "ScaleByInput";
    case Graph::Op::AddRow: return "AddRow";
    case Graph::Op::Relu: return "Relu";
    case Graph::Op::LayerNorm: return "LayerNorm";
    case Graph::Op::MaskedSoftmax: return "MaskedSoftmax";
    case Graph::Op::Mse: return "Mse";
    case Graph::Op::Sum: return "Sum";
  }
  return "?";
}

std::string node_str(int id, Graph::Op op) {
  return "node " + std::to_string(id) + " (" + op_name(op) + ")";
}

// out += a * b
void mm(const Tensor& a, const Tensor& b, Tensor& out) {
  const int n = a.rows, k = a.cols, m = b.cols;
  for (int i = 0; i < n; ++i) {
    const double* arow = &a.data[static_cast<std::size_t>(i) * k];
    double* orow = &out.data[static_cast<std::size_t>(i) * m];
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = &b.data[static_cast<std::size_t>(kk) * m];
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

// out += a * b^T
void mm_nt(const Tensor& a, const Tensor& b, Tensor& out) {
  const int n = a.rows, k = a.cols, m = b.rows;
  for (int i = 0; i < n; ++i) {
    const double* arow = &a.data[static_cast<std::size_t>(i) * k];
    double* orow = &out.data[static_cast<std::size_t>(i) * m];
    for (int j = 0; j < m; ++j) {
      const double* brow = &b.data[static_cast<std::size_t>(j) * k];
      double s = 0.0;
      for (int kk = 0; kk < k; ++kk) s += arow[kk] * brow[kk];
      orow[j] += s;
    }
  }
}

// out += a^T * b
void mm_tn(const Tensor& a, const Tensor& b, Tensor& out) {
  const int n = a.rows, k = a.cols, m = b.cols;
  for (int i = 0; i < n; ++i) {
    const double* arow = &a.data[static_cast<std::size_t>(i) * k];
    const double* brow = &b.data[static_cast<std::size_t>(i) * m];
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      double* orow = &out.data[static_cast<std::size_t>(kk) * m];
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

void resize_like(Tensor& t, int rows, int cols) {
  t.rows = rows;
  t.cols = cols;
  t.data.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

}  // namespace

int Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Graph::require(bool cond, int node_hint, const std::string& msg) const {
  if (!cond) {
    throw std::invalid_argument("graph: " + msg + " at node " + std::to_string(node_hint));
  }
}

const Graph::Node& Graph::arg(int id, int at_node) const {
  require(id >= 0 && id < static_cast<int>(nodes_.size()), at_node, "argument out of range");
  return nodes_[static_cast<std::size_t>(id)];
}

int Graph::input(const std::string& name, int rows, int cols) {
  Node n;
  n.op = Op::Input;
  n.rows = rows;
  n.cols = cols;
  n.name = name;
  return push(std::move(n));
}

int Graph::parameter(const std::string& name, Tensor init) {
  if (params_.count(name)) throw std::invalid_argument("graph: duplicate parameter " + name);
  Node n;
  n.op = Op::Param;
  n.rows = init.rows;
  n.cols = init.cols;
  n.name = name;
  params_.emplace(name, std::move(init));
  return push(std::move(n));
}

int Graph::constant(Tensor value) {
  Node n;
  n.op = Op::Const;
  n.rows = value.rows;
  n.cols = value.cols;
  const int id = push(std::move(n));
  consts_.emplace(id, std::move(value));
  return id;
}

int Graph::matmul(int a, int b) {
  const int id = static_cast<int>(nodes_.size());
  const Node &na = arg(a, id), &nb = arg(b, id);
  require(na.cols == nb.rows, id,
          "MatMul inner dims " + std::to_string(na.cols) + " vs " + std::to_string(nb.rows));
  return push({Op::MatMul, a, b, -1, 0.0, na.rows, nb.cols, {}});
}

int Graph::matmul_nt(int a, int b) {
  const int id = static_cast<int>(nodes_.size());
  const Node &na = arg(a, id), &nb = arg(b, id);
  require(na.cols == nb.cols, id, "MatMulNT inner dims");
  return push({Op::MatMulNT, a, b, -1, 0.0, na.rows, nb.rows, {}});
}

int Graph::transpose(int a) {
  const int id = static_cast<int>(nodes_.size());
  const Node& na = arg(a, id);
  return push({Op::Transpose, a, -1, -1, 0.0, na.cols, na.rows, {}});
}

int Graph::add(int a, int b) {
  const int id = static_cast<int>(nodes_.size());
  const Node &na = arg(a, id), &nb = arg(b, id);
  require(na.rows == nb.rows && na.cols == nb.cols, id, "Add shape mismatch");
  return push({Op::Add, a, b, -1, 0.0, na.rows, na.cols, {}});
}

int Graph::mul(int a, int b) {
  const int id = static_cast<int>(nodes_.size());
  const Node &na = arg(a, id), &nb = arg(b, id);
  require(na.rows == nb.rows && na.cols == nb.cols, id, "Mul shape mismatch");
  return push({Op::Mul, a, b, -1, 0.0, na.rows, na.cols, {}});
}

int Graph::scale(int a, double factor) {
  const int id = static_cast<int>(nodes_.size());
  const Node& na = arg(a, id);
  return push({Op::Scale, a, -1, -1, factor, na.rows, na.cols, {}});
}

int Graph::scale_by(int a, int s) {
  const int id = static_cast<int>(nodes_.size());
  const Node &na = arg(a, id), &ns = arg(s, id);
  require(ns.rows == 1 && ns.cols == 1, id, "ScaleBy factor must be 1x1");
  return push({Op::ScaleByInput, a, s, -1, 0.0, na.rows, na.cols, {}});
}

int Graph::add_row(int a, int v) {
  const int id = static_cast<int>(nodes_.size());
  const Node &na = arg(a, id), &nv = arg(v, id);
  require(nv.rows == 1 && nv.cols == na.cols, id, "AddRow vector shape");
  return push({Op::AddRow, a, v, -1, 0.0, na.rows, na.cols, {}});
}

int Graph::relu(int a) {
  const int id = static_cast<int>(nodes_.size());
  const Node& na = arg(a, id);
  return push({Op::Relu, a, -1, -1, 0.0, na.rows, na.cols, {}});
}

int Graph::layer_norm(int a, int gain, int bias, double eps) {
  const int id = static_cast<int>(nodes_.size());
  const Node &na = arg(a, id), &ng = arg(gain, id), &nb = arg(bias, id);
  require(eps > 0.0, id, "LayerNorm eps must be positive");
  require(ng.rows == 1 && ng.cols == na.cols, id, "LayerNorm gain shape");
  require(nb.rows == 1 && nb.cols == na.cols, id, "LayerNorm bias shape");
  return push({Op::LayerNorm, a, gain, bias, eps, na.rows, na.cols, {}});
}

int Graph::masked_softmax(int logits, int mask01) {
  const int id = static_cast<int>(nodes_.size());
  const Node &nl = arg(logits, id), &nm = arg(mask01, id);
  require(nl.rows == nm.rows && nl.cols == nm.cols, id, "MaskedSoftmax mask shape");
  return push({Op::MaskedSoftmax, logits, mask01, -1, 0.0, nl.rows, nl.cols, {}});
}

int Graph::mse(int a, int b) {
  const int id = static_cast<int>(nodes_.size());
  const Node &na = arg(a, id), &nb = arg(b, id);
  require(na.rows == nb.rows && na.cols == nb.cols, id, "Mse shape mismatch");
  return push({Op::Mse, a, b, -1, 0.0, 1, 1, {}});
}

int Graph::sum(int a) {
  const int id = static_cast<int>(nodes_.size());
  arg(a, id);
  return push({Op::Sum, a, -1, -1, 0.0, 1, 1, {}});
}

void Graph::set_output(int node) {
  arg(node, node);
  output_ = node;
}

NamedTensors Graph::zero_grads() const {
  NamedTensors g;
  for (const auto& [name, t] : params_) g.emplace(name, Tensor(t.rows, t.cols));
  return g;
}

void Graph::check_params_used() const {
  std::vector<char> used(nodes_.size(), 0);
  for (const Node& n : nodes_) {
    if (n.a >= 0) used[static_cast<std::size_t>(n.a)] = 1;
    if (n.b >= 0) used[static_cast<std::size_t>(n.b)] = 1;
    if (n.c >= 0) used[static_cast<std::size_t>(n.c)] = 1;
  }
  if (output_ >= 0) used[static_cast<std::size_t>(output_)] = 1;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].op == Op::Param && !used[i]) {
      throw std::invalid_argument("graph: unused parameter " + nodes_[i].name);
    }
  }
}

const Tensor& graph_forward(const Graph& g, const NamedTensors& inputs, Workspace& ws) {
  const auto& nodes = g.nodes();
  if (g.output() < 0) throw std::invalid_argument("graph: no output set");
  ws.val.resize(nodes.size());

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Graph::Node& n = nodes[i];
    Tensor& out = ws.val[i];
    switch (n.op) {
      case Graph::Op::Input: {
        auto it = inputs.find(n.name);
        if (it == inputs.end()) throw std::invalid_argument("graph: missing input " + n.name);
        if (it->second.rows != n.rows || it->second.cols != n.cols) {
          throw std::invalid_argument("graph: input " + n.name + " has shape " +
                                      it->second.shape_str() + ", expected " +
                                      std::to_string(n.rows) + "x" + std::to_string(n.cols) +
                                      " at " + node_str(static_cast<int>(i), n.op));
        }
        out = it->second;
        break;
      }
      case Graph::Op::Param:
        out = g.params().at(n.name);
        break;
      case Graph::Op::Const:
        out = g.const_value(static_cast<int>(i));
        break;
      case Graph::Op::MatMul:
        resize_like(out, n.rows, n.cols);
        mm(ws.val[n.a], ws.val[n.b], out);
        break;
      case Graph::Op::MatMulNT:
        resize_like(out, n.rows, n.cols);
        mm_nt(ws.val[n.a], ws.val[n.b], out);
        break;
      case Graph::Op::Transpose: {
        const Tensor& a = ws.val[n.a];
        resize_like(out, n.rows, n.cols);
        for (int r = 0; r < a.rows; ++r)
          for (int c = 0; c < a.cols; ++c) out.at(c, r) = a.at(r, c);
        break;
      }
      case Graph::Op::Add: {
        const Tensor &a = ws.val[n.a], &b = ws.val[n.b];
        resize_like(out, n.rows, n.cols);
        for (std::size_t j = 0; j < out.data.size(); ++j) out.data[j] = a.data[j] + b.data[j];
        break;
      }
      case Graph::Op::Mul: {
        const Tensor &a = ws.val[n.a], &b = ws.val[n.b];
        resize_like(out, n.rows, n.cols);
        for (std::size_t j = 0; j < out.data.size(); ++j) out.data[j] = a.data[j] * b.data[j];
        break;
      }
      case Graph::Op::Scale: {
        const Tensor& a = ws.val[n.a];
        resize_like(out, n.rows, n.cols);
        for (std::size_t j = 0; j < out.data.size(); ++j) out.data[j] = n.scalar * a.data[j];
        break;
      }
      case Graph::Op::ScaleByInput: {
        const Tensor& a = ws.val[n.a];
        const double s = ws.val[n.b].data[0];
        resize_like(out, n.rows, n.cols);
        for (std::size_t j = 0; j < out.data.size(); ++j) out.data[j] = s * a.data[j];
        break;
      }
      case Graph::Op::AddRow: {
        const Tensor &a = ws.val[n.a], &v = ws.val[n.b];
        resize_like(out, n.rows, n.cols);
        for (int r = 0; r < a.rows; ++r)
          for (int c = 0; c < a.cols; ++c) out.at(r, c) = a.at(r, c) + v.data[c];
        break;
      }
      case Graph::Op::Relu: {
        const Tensor& a = ws.val[n.a];
        resize_like(out, n.rows, n.cols);
        for (std::size_t j = 0; j < out.data.size(); ++j)
          out.data[j] = a.data[j] > 0.0 ? a.data[j] : 0.0;
        break;
      }
      case Graph::Op::LayerNorm: {
        const Tensor &a = ws.val[n.a], &gain = ws.val[n.b], &bias = ws.val[n.c];
        resize_like(out, n.rows, n.cols);
        const int d = a.cols;
        for (int r = 0; r < a.rows; ++r) {
          const double* x = &a.data[static_cast<std::size_t>(r) * d];
          double* y = &out.data[static_cast<std::size_t>(r) * d];
          double mean = 0.0;
          for (int c = 0; c < d; ++c) mean += x[c];
          mean /= d;
          double var = 0.0;
          for (int c = 0; c < d; ++c) var += (x[c] - mean) * (x[c] - mean);
          var /= d;  // population variance
          const double inv = 1.0 / std::sqrt(var + n.scalar);
          for (int c = 0; c < d; ++c) y[c] = gain.data[c] * ((x[c] - mean) * inv) + bias.data[c];
        }
        break;
      }
      case Graph::Op::MaskedSoftmax: {
        const Tensor &a = ws.val[n.a], &mask = ws.val[n.b];
        resize_like(out, n.rows, n.cols);
        const int m = a.cols;
        for (int r = 0; r < a.rows; ++r) {
          const double* x = &a.data[static_cast<std::size_t>(r) * m];
          const double* blocked = &mask.data[static_cast<std::size_t>(r) * m];
          double* y = &out.data[static_cast<std::size_t>(r) * m];
          // Row max over visible entries keeps exp() in range.
          double mx = -1.0;
          bool has_visible = false;
          for (int c = 0; c < m; ++c) {
            if (blocked[c] != 0.0) continue;
            if (!has_visible || x[c] > mx) mx = x[c];
            has_visible = true;
          }
          if (!has_visible) {
            throw std::invalid_argument("masked_softmax: fully masked row " + std::to_string(r) +
                                        " at " + node_str(static_cast<int>(i), n.op));
          }
          double denom = 0.0;
          for (int c = 0; c < m; ++c) {
            y[c] = blocked[c] != 0.0 ? 0.0 : std::exp(x[c] - mx);
            denom += y[c];
          }
          const double inv = 1.0 / denom;
          for (int c = 0; c < m; ++c) y[c] *= inv;
        }
        break;
      }
      case Graph::Op::Mse: {
        const Tensor &a = ws.val[n.a], &b = ws.val[n.b];
        double s = 0.0;
        for (std::size_t j = 0; j < a.data.size(); ++j) {
          const double d = a.data[j] - b.data[j];
          s += d * d;
        }
        resize_like(out, 1, 1);
        out.data[0] = s / static_cast<double>(a.data.size());
        break;
      }
      case Graph::Op::Sum: {
        const Tensor& a = ws.val[n.a];
        double s = 0.0;
        for (double v : a.data) s += v;
        resize_like(out, 1, 1);
        out.data[0] = s;
        break;
      }
    }
  }

  const Tensor& result = ws.val[static_cast<std::size_t>(g.output())];
  if (!result.all_finite()) throw std::runtime_error("graph: non-finite output");
  return result;
}

void graph_backward(const Graph& g, Workspace& ws, NamedTensors& grad_accum) {
  const auto& nodes = g.nodes();
  const int out = g.output();
  if (out < 0) throw std::invalid_argument("graph: no output set");
  const Graph::Node& on = nodes[static_cast<std::size_t>(out)];
  if (on.rows != 1 || on.cols != 1) {
    throw std::invalid_argument("graph: gradients require a scalar output, got " +
                                std::to_string(on.rows) + "x" + std::to_string(on.cols));
  }
  if (ws.val.size() != nodes.size()) throw std::logic_error("graph_backward before graph_forward");

  ws.grad.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    resize_like(ws.grad[i], nodes[i].rows, nodes[i].cols);
  }
  ws.grad[static_cast<std::size_t>(out)].data[0] = 1.0;

  for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; --i) {
    const Graph::Node& n = nodes[static_cast<std::size_t>(i)];
    const Tensor& gout = ws.grad[static_cast<std::size_t>(i)];
    switch (n.op) {
      case Graph::Op::Input:
      case Graph::Op::Const:
        break;
      case Graph::Op::Param: {
        auto it = grad_accum.find(n.name);
        if (it != grad_accum.end()) {
          Tensor& acc = it->second;
          for (std::size_t j = 0; j < acc.data.size(); ++j) acc.data[j] += gout.data[j];
        }
        break;
      }
      case Graph::Op::MatMul:
        mm_nt(gout, ws.val[n.b], ws.grad[n.a]);  // dA += dC * B^T
        mm_tn(ws.val[n.a], gout, ws.grad[n.b]);  // dB += A^T * dC
        break;
      case Graph::Op::MatMulNT:
        mm(gout, ws.val[n.b], ws.grad[n.a]);     // dA += dC * B
        mm_tn(gout, ws.val[n.a], ws.grad[n.b]);  // dB += dC^T * A
        break;
      case Graph::Op::Transpose: {
        Tensor& ga = ws.grad[n.a];
        for (int r = 0; r < gout.rows; ++r)
          for (int c = 0; c < gout.cols; ++c) ga.at(c, r) += gout.at(r, c);
        break;
      }
      case Graph::Op::Add: {
        Tensor &ga = ws.grad[n.a], &gb = ws.grad[n.b];
        for (std::size_t j = 0; j < gout.data.size(); ++j) {
          ga.data[j] += gout.data[j];
          gb.data[j] += gout.data[j];
        }
        break;
      }
      case Graph::Op::Mul: {
        Tensor &ga = ws.grad[n.a], &gb = ws.grad[n.b];
        const Tensor &a = ws.val[n.a], &b = ws.val[n.b];
        for (std::size_t j = 0; j < gout.data.size(); ++j) {
          ga.data[j] += gout.data[j] * b.data[j];
          gb.data[j] += gout.data[j] * a.data[j];
        }
        break;
      }
      case Graph::Op::Scale: {
        Tensor& ga = ws.grad[n.a];
        for (std::size_t j = 0; j < gout.data.size(); ++j) ga.data[j] += n.scalar * gout.data[j];
        break;
      }
      case Graph::Op::ScaleByInput: {
        // The factor is treated as a constant; nothing flows into n.b.
        Tensor& ga = ws.grad[n.a];
        const double s = ws.val[n.b].data[0];
        for (std::size_t j = 0; j < gout.data.size(); ++j) ga.data[j] += s * gout.data[j];
        break;
      }
      case Graph::Op::AddRow: {
        Tensor &ga = ws.grad[n.a], &gv = ws.grad[n.b];
        for (int r = 0; r < gout.rows; ++r)
          for (int c = 0; c < gout.cols; ++c) {
            ga.at(r, c) += gout.at(r, c);
            gv.data[c] += gout.at(r, c);
          }
        break;
      }
      case Graph::Op::Relu: {
        Tensor& ga = ws.grad[n.a];
        const Tensor& a = ws.val[n.a];
        for (std::size_t j = 0; j < gout.data.size(); ++j)
          if (a.data[j] > 0.0) ga.data[j] += gout.data[j];
        break;
      }
      case Graph::Op::LayerNorm: {
        const Tensor &a = ws.val[n.a], &gain = ws.val[n.b];
        Tensor &ga = ws.grad[n.a], &gg = ws.grad[n.b], &gb = ws.grad[n.c];
        const int d = a.cols;
        for (int r = 0; r < a.rows; ++r) {
          const double* x = &a.data[static_cast<std::size_t>(r) * d];
          const double* go = &gout.data[static_cast<std::size_t>(r) * d];
          double* gx = &ga.data[static_cast<std::size_t>(r) * d];
          double mean = 0.0;
          for (int c = 0; c < d; ++c) mean += x[c];
          mean /= d;
          double var = 0.0;
          for (int c = 0; c < d; ++c) var += (x[c] - mean) * (x[c] - mean);
          var /= d;
          const double inv = 1.0 / std::sqrt(var + n.scalar);
          // xhat = (x - mean) * inv;  y = gain .* xhat + bias
          double dot_g = 0.0, dot_gx = 0.0;
          for (int c = 0; c < d; ++c) {
            const double xhat = (x[c] - mean) * inv;
            const double gy = go[c] * gain.data[c];
            dot_g += gy;
            dot_gx += gy * xhat;
            gg.data[c] += go[c] * xhat;
            gb.data[c] += go[c];
          }
          for (int c = 0; c < d; ++c) {
            const double xhat = (x[c] - mean) * inv;
            const double gy = go[c] * gain.data[c];
            gx[c] += inv * (gy - dot_g / d - xhat * dot_gx / d);
          }
        }
        break;
      }
      case Graph::Op::MaskedSoftmax: {
        const Tensor& y = ws.val[static_cast<std::size_t>(i)];
        Tensor& ga = ws.grad[n.a];
        const int m = y.cols;
        // Mask argument is non-differentiable; nothing flows into n.b.
        for (int r = 0; r < y.rows; ++r) {
          const double* yr = &y.data[static_cast<std::size_t>(r) * m];
          const double* go = &gout.data[static_cast<std::size_t>(r) * m];
          double* gx = &ga.data[static_cast<std::size_t>(r) * m];
          double dot = 0.0;
          for (int c = 0; c < m; ++c) dot += go[c] * yr[c];
          for (int c = 0; c < m; ++c) gx[c] += yr[c] * (go[c] - dot);
        }
        break;
      }
      case Graph::Op::Mse: {
        const Tensor &a = ws.val[n.a], &b = ws.val[n.b];
        Tensor &ga = ws.grad[n.a], &gb = ws.grad[n.b];
        const double s = 2.0 * gout.data[0] / static_cast<double>(a.data.size());
        for (std::size_t j = 0; j < a.data.size(); ++j) {
          const double d = s * (a.data[j] - b.data[j]);
          ga.data[j] += d;
          gb.data[j] -= d;
        }
        break;
      }
      case Graph::Op::Sum: {
        Tensor& ga = ws.grad[n.a];
        for (std::size_t j = 0; j < ga.data.size(); ++j) ga.data[j] += gout.data[0];
        break;
      }
    }
  }
}

EvalResult evaluate_and_backprop(const Graph& g, const NamedTensors& inputs, bool want_grads) {
  g.check_params_used();
  Workspace ws;
  EvalResult res;
  res.value = graph_forward(g, inputs, ws);
  if (want_grads) {
    res.grads = g.zero_grads();
    graph_backward(g, ws, res.grads);
    for (const auto& [name, t] : res.grads) {
      if (!t.all_finite()) throw std::runtime_error("graph: non-finite gradient for " + name);
    }
  }
  return res;
}

void sgd_step(NamedTensors& params, const NamedTensors& grads, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: lr must be positive");
  if (params.size() != grads.size()) throw std::invalid_argument("sgd_step: parameter/gradient name sets differ");
  auto pit = params.begin();
  auto git = grads.begin();
  for (; pit != params.end(); ++pit, ++git) {
    if (pit->first != git->first) {
      throw std::invalid_argument("sgd_step: name mismatch: " + pit->first + " vs " + git->first);
    }
    Tensor& p = pit->second;
    const Tensor& g = git->second;
    if (!p.same_shape(g)) {
      throw std::invalid_argument("sgd_step: shape mismatch for " + pit->first + ": " +
                                  p.shape_str() + " vs " + g.shape_str());
    }
    for (std::size_t j = 0; j < p.data.size(); ++j) p.data[j] -= lr * g.data[j];
    if (!p.all_finite()) throw std::runtime_error("sgd_step: non-finite parameter " + pit->first);
  }
}

}  // namespace ddmt
