#include "ddmt/adnm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ddmt/graph.hpp"
#include "ddmt/rng.hpp"
#include "ddmt/util.hpp"

namespace ddmt {

MaskMatrix MaskMatrix::all_visible(int size) {
  MaskMatrix m;
  m.size = size;
  m.blocked = BoolMat(size, size);
  m.scales.assign(size, 0);
  return m;
}

AEParams train_autoencoder(const WindowBatch& train_windows, const AETrainOptions& opt,
                           std::uint64_t seed) {
  if (train_windows.windows.empty()) {
    throw std::invalid_argument("train_autoencoder: no windows");
  }
  const int C = train_windows.channels;
  const int h = (C + 1) / 2;
  Rng rng(seed);

  Graph g;
  const int x = g.input("x", 1, C);
  const int enc_w = g.parameter("enc_w", Tensor::uniform(C, h, 1.0 / std::sqrt(C), rng));
  const int enc_b = g.parameter("enc_b", Tensor::uniform(1, h, 1.0 / std::sqrt(C), rng));
  const int dec_w = g.parameter("dec_w", Tensor::uniform(h, C, 1.0 / std::sqrt(h), rng));
  const int dec_b = g.parameter("dec_b", Tensor::uniform(1, C, 1.0 / std::sqrt(h), rng));
  const int hidden = g.relu(g.add_row(g.matmul(x, enc_w), enc_b));
  const int xhat = g.add_row(g.matmul(hidden, dec_w), dec_b);
  g.set_output(g.mse(xhat, x));

  // One sample per timestamp, shuffled each epoch.
  const int W = train_windows.window;
  std::vector<std::pair<int, int>> order;
  for (int w = 0; w < static_cast<int>(train_windows.windows.size()); ++w) {
    for (int i = 0; i < W; ++i) order.emplace_back(w, i);
  }

  Workspace ws;
  NamedTensors grads = g.zero_grads();
  NamedTensors inputs;
  inputs.emplace("x", Tensor(1, C));
  Tensor& xin = inputs.at("x");

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    rng.shuffle(order);
    for (const auto& [w, i] : order) {
      const Tensor& win = train_windows.windows[static_cast<std::size_t>(w)];
      for (int c = 0; c < C; ++c) xin.data[c] = win.at(i, c);
      graph_forward(g, inputs, ws);
      for (auto& [name, t] : grads) std::fill(t.data.begin(), t.data.end(), 0.0);
      graph_backward(g, ws, grads);
      sgd_step(g.params(), grads, opt.lr);
    }
  }

  AEParams params;
  params.channels = C;
  params.hidden = h;
  params.enc_w = g.params().at("enc_w");
  params.enc_b = g.params().at("enc_b");
  params.dec_w = g.params().at("dec_w");
  params.dec_b = g.params().at("dec_b");
  return params;
}

Tensor ae_reconstruct(const AEParams& p, const Tensor& window) {
  if (window.cols != p.channels) {
    throw std::invalid_argument("ae_reconstruct: window has " + std::to_string(window.cols) +
                                " channels, params expect " + std::to_string(p.channels));
  }
  const int C = p.channels, h = p.hidden;
  Tensor out(window.rows, C);
  std::vector<double> hval(h);
  for (int i = 0; i < window.rows; ++i) {
    for (int j = 0; j < h; ++j) {
      double s = p.enc_b.data[j];
      for (int c = 0; c < C; ++c) s += window.at(i, c) * p.enc_w.at(c, j);
      hval[j] = s > 0.0 ? s : 0.0;
    }
    for (int c = 0; c < C; ++c) {
      double s = p.dec_b.data[c];
      for (int j = 0; j < h; ++j) s += hval[j] * p.dec_w.at(j, c);
      out.at(i, c) = s;
    }
  }
  return out;
}

std::vector<double> reconstruction_error(const AEParams& p, const Tensor& window) {
  const Tensor rec = ae_reconstruct(p, window);
  std::vector<double> err(window.rows, 0.0);
  for (int i = 0; i < window.rows; ++i) {
    double s = 0.0;
    for (int c = 0; c < window.cols; ++c) {
      const double d = window.at(i, c) - rec.at(i, c);
      s += d * d;
    }
    err[static_cast<std::size_t>(i)] = s / window.cols;
  }
  return err;
}

double ae_dataset_mse(const AEParams& params, const WindowBatch& windows) {
  double total = 0.0;
  std::size_t count = 0;
  for (const Tensor& win : windows.windows) {
    for (double e : reconstruction_error(params, win)) {
      total += e;
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

double pearson(const double* u, const double* v, int n) {
  double mu = 0.0, mv = 0.0;
  for (int i = 0; i < n; ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double suu = 0.0, svv = 0.0, suv = 0.0;
  for (int i = 0; i < n; ++i) {
    const double du = u[i] - mu;
    const double dv = v[i] - mv;
    suu += du * du;
    svv += dv * dv;
    suv += du * dv;
  }
  const double denom = std::sqrt(suu * svv);
  if (denom == 0.0) return 0.0;
  const double r = suv / denom;
  return std::clamp(r, -1.0, 1.0);
}

MaskMatrix build_mask(const std::vector<double>& errors, const Tensor& window, double ratio,
                      double rho, int cap) {
  const int W = static_cast<int>(errors.size());
  if (window.rows != W) {
    throw std::invalid_argument("build_mask: errors length " + std::to_string(W) +
                                " does not match window rows " + std::to_string(window.rows));
  }
  if (ratio < 0.0 || ratio >= 1.0) throw std::invalid_argument("build_mask: ratio must be in [0, 1)");
  if (!(rho > 0.0)) throw std::invalid_argument("build_mask: rho must be positive");
  if (cap < 0) throw std::invalid_argument("build_mask: cap must be non-negative");

  MaskMatrix m = MaskMatrix::all_visible(W);
  if (ratio == 0.0) return m;

  const int n_seeds = ceil_count(ratio * W);
  if (n_seeds >= W) {
    throw std::invalid_argument("build_mask: " + std::to_string(n_seeds) +
                                " seeds would cover the whole window of " + std::to_string(W));
  }

  std::vector<int> idx(errors.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (errors[a] != errors[b]) return errors[a] > errors[b];
    return a < b;
  });
  m.seeds.assign(idx.begin(), idx.begin() + n_seeds);
  std::sort(m.seeds.begin(), m.seeds.end());

  const int C = window.cols;
  for (int i : m.seeds) {
    int scale = 0;
    if (C < 2) {
      // Pearson over one channel is undefined; fall back to the full cap.
      scale = cap;
    } else {
      const double* row_i = &window.data[static_cast<std::size_t>(i) * C];
      int left = 0, right = 0;
      for (int k = 1; k <= cap; ++k) {
        const int j = i - k;
        if (j < 0) break;
        if (pearson(row_i, &window.data[static_cast<std::size_t>(j) * C], C) > rho) {
          left = k;
        } else {
          break;
        }
      }
      for (int k = 1; k <= cap; ++k) {
        const int j = i + k;
        if (j >= W) break;
        if (pearson(row_i, &window.data[static_cast<std::size_t>(j) * C], C) > rho) {
          right = k;
        } else {
          break;
        }
      }
      scale = std::max(left, right);
    }
    m.scales[static_cast<std::size_t>(i)] = scale;

    const int lo = std::max(0, i - scale);
    const int hi = std::min(W - 1, i + scale);
    for (int j = lo; j <= hi; ++j) m.blocked.set(i, j, true);

    if (lo == 0 && hi == W - 1) {
      // Keep one visible column: the farthest in-range one.
      const int farthest = (W - 1 - i) > i ? W - 1 : 0;
      m.blocked.set(i, farthest, false);
    }
  }
  return m;
}

}  // namespace ddmt
