#include "ddmt/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ddmt/rng.hpp"

namespace ddmt {

namespace {

// Stability cap on the schedule-derived output gain (1/sqrt(1 - abar_t)
// grows without bound as t -> 1).
constexpr double kEpsGainCap = 10.0;

std::string pname(int layer, const std::string& tail) {
  return "l" + std::to_string(layer) + "_" + tail;
}

std::string hname(int layer, int head, const std::string& tail) {
  return "l" + std::to_string(layer) + "_h" + std::to_string(head) + "_" + tail;
}

void check_hyper(const DenoiserHyper& h) {
  if (h.channels < 1) throw std::invalid_argument("denoiser: channels must be positive");
  if (h.d_model < 2 || h.d_model % 2 != 0) {
    throw std::invalid_argument("denoiser: d_model must be even and >= 2");
  }
  if (h.heads < 1 || h.d_model % h.heads != 0) {
    throw std::invalid_argument("denoiser: d_model must be divisible by heads");
  }
  if (h.layers < 1) throw std::invalid_argument("denoiser: need at least one layer");
  if (h.ffn < 1) throw std::invalid_argument("denoiser: ffn width must be positive");
}

void zero_all(NamedTensors& grads) {
  for (auto& [name, t] : grads) std::fill(t.data.begin(), t.data.end(), 0.0);
}

}  // namespace

double eps_output_gain(const NoiseSchedule& sched, int t) {
  if (t < 1) return 1.0;
  return std::min(1.0 / std::sqrt(1.0 - sched.alpha_bar_at(t)), kEpsGainCap);
}

Tensor embed_conditioning(int window, int d_model, int t, int max_step) {
  if (window < 1) throw std::invalid_argument("embed_conditioning: window must be positive");
  if (d_model < 2 || d_model % 2 != 0) {
    throw std::invalid_argument("embed_conditioning: d must be even, got " +
                                std::to_string(d_model));
  }
  if (t < 0 || (max_step > 0 && t > max_step)) {
    throw std::out_of_range("embed_conditioning: t outside [0, max_step]");
  }

  const int half = d_model / 2;
  std::vector<double> inv_freq(half);
  for (int k = 0; k < half; ++k) {
    inv_freq[k] = std::pow(10000.0, -2.0 * k / d_model);
  }

  Tensor out(window, d_model);
  for (int pos = 0; pos < window; ++pos) {
    for (int k = 0; k < half; ++k) {
      const double pos_angle = pos * inv_freq[k];
      const double step_angle = t * inv_freq[k];
      out.at(pos, 2 * k) = std::sin(pos_angle) + std::sin(step_angle);
      out.at(pos, 2 * k + 1) = std::cos(pos_angle) + std::cos(step_angle);
    }
  }
  return out;
}

NamedTensors init_denoiser_params(const DenoiserHyper& h, std::uint64_t seed) {
  check_hyper(h);
  Rng rng(seed);
  const int C = h.channels, d = h.d_model, f = h.ffn;
  const int dk = d / h.heads;
  const double in_bound = 1.0 / std::sqrt(C);
  const double d_bound = 1.0 / std::sqrt(d);
  const double dk_bound = 1.0 / std::sqrt(dk);
  const double f_bound = 1.0 / std::sqrt(f);

  NamedTensors p;
  p.emplace("in_w", Tensor::uniform(C, d, in_bound, rng));
  p.emplace("in_b", Tensor::uniform(1, d, in_bound, rng));
  for (int l = 0; l < h.layers; ++l) {
    for (int hd = 0; hd < h.heads; ++hd) {
      p.emplace(hname(l, hd, "wq"), Tensor::uniform(d, dk, d_bound, rng));
      p.emplace(hname(l, hd, "wk"), Tensor::uniform(d, dk, d_bound, rng));
      p.emplace(hname(l, hd, "wv"), Tensor::uniform(d, dk, d_bound, rng));
      p.emplace(hname(l, hd, "wo"), Tensor::uniform(dk, d, dk_bound, rng));
    }
    p.emplace(pname(l, "ff_w1"), Tensor::uniform(d, f, d_bound, rng));
    p.emplace(pname(l, "ff_b1"), Tensor::uniform(1, f, d_bound, rng));
    p.emplace(pname(l, "ff_w2"), Tensor::uniform(f, d, f_bound, rng));
    p.emplace(pname(l, "ff_b2"), Tensor::uniform(1, d, f_bound, rng));
    p.emplace(pname(l, "ln1_g"), Tensor::full(1, d, 1.0));
    p.emplace(pname(l, "ln1_b"), Tensor(1, d));
    p.emplace(pname(l, "ln2_g"), Tensor::full(1, d, 1.0));
    p.emplace(pname(l, "ln2_b"), Tensor(1, d));
  }
  // Zero output projection: the network predicts 0 until the first update.
  p.emplace("out_w", Tensor(d, C));
  p.emplace("out_b", Tensor(1, C));
  return p;
}

DenoiserGraph build_denoiser_graph(const DenoiserHyper& h, int window, const NamedTensors& params,
                                   bool train_mode) {
  check_hyper(h);
  const int C = h.channels, d = h.d_model;
  const int dk = d / h.heads;
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(dk));

  DenoiserGraph dg;
  Graph& g = dg.g;
  const int x = g.input("x", window, C);
  const int cond = g.input("cond", window, d);
  const int mask = g.input("mask", window, window);
  const int gain = g.input("gain", 1, 1);

  auto param = [&](const std::string& name) { return g.parameter(name, params.at(name)); };

  // Scale token embeddings ahead of the additive positional/step code, as in
  // standard encoder stacks, so the content is not drowned by the code.
  int hcur = g.add(g.scale(g.add_row(g.matmul(x, param("in_w")), param("in_b")), std::sqrt(d)), cond);
  for (int l = 0; l < h.layers; ++l) {
    int attn = -1;
    for (int hd = 0; hd < h.heads; ++hd) {
      const int q = g.matmul(hcur, param(hname(l, hd, "wq")));
      const int k = g.matmul(hcur, param(hname(l, hd, "wk")));
      const int v = g.matmul(hcur, param(hname(l, hd, "wv")));
      const int scores = g.scale(g.matmul_nt(q, k), attn_scale);
      const int probs = g.masked_softmax(scores, mask);
      const int contrib = g.matmul(g.matmul(probs, v), param(hname(l, hd, "wo")));
      attn = attn < 0 ? contrib : g.add(attn, contrib);
    }
    dg.attn_out.push_back(attn);
    const int n1 = g.layer_norm(g.add(hcur, attn), param(pname(l, "ln1_g")), param(pname(l, "ln1_b")));
    const int ff = g.add_row(
        g.matmul(g.relu(g.add_row(g.matmul(n1, param(pname(l, "ff_w1"))), param(pname(l, "ff_b1")))),
                 param(pname(l, "ff_w2"))),
        param(pname(l, "ff_b2")));
    hcur = g.layer_norm(g.add(n1, ff), param(pname(l, "ln2_g")), param(pname(l, "ln2_b")));
  }
  const int head = g.add_row(g.matmul(hcur, param("out_w")), param("out_b"));
  dg.prediction = g.scale_by(head, gain);

  if (train_mode) {
    // Trained against the gain-normalized target (the caller feeds
    // target = eps / gain), so every step t sees a unit-scale regression and
    // the same gradient scale. The reported loss is gain^2 * this value,
    // which equals the plain mean squared eps error.
    const int target = g.input("target", window, C);
    dg.loss = g.mse(head, target);
    // The gradient step descends the squared-error norm, not its mean.
    g.set_output(g.scale(dg.loss, static_cast<double>(window) * C));
  } else {
    g.set_output(dg.prediction);
  }
  return dg;
}

Denoiser::Denoiser(DenoiserHyper hyper, NamedTensors params, const NoiseSchedule* sched)
    : hyper_(hyper), params_(std::move(params)) {
  check_hyper(hyper_);
  if (sched) {
    has_sched_ = true;
    sched_ = *sched;
  }
}

const DenoiserGraph& Denoiser::graph_for(int window) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(window);
  if (it == cache_.end()) {
    auto dg = std::make_unique<DenoiserGraph>(build_denoiser_graph(hyper_, window, params_, false));
    it = cache_.emplace(window, std::move(dg)).first;
  }
  return *it->second;
}

Tensor Denoiser::forward(const Tensor& x, int t, const MaskMatrix& mask) const {
  if (x.cols != hyper_.channels) {
    throw std::invalid_argument("denoiser: input has " + std::to_string(x.cols) +
                                " channels, expected " + std::to_string(hyper_.channels));
  }
  if (mask.size != x.rows) {
    throw std::invalid_argument("denoiser: mask size " + std::to_string(mask.size) +
                                " does not match window " + std::to_string(x.rows));
  }
  const DenoiserGraph& dg = graph_for(x.rows);
  NamedTensors inputs;
  inputs.emplace("x", x);
  inputs.emplace("cond",
                 embed_conditioning(x.rows, hyper_.d_model, t, has_sched_ ? sched_.steps : 0));
  inputs.emplace("mask", mask.blocked.to_tensor());
  inputs.emplace("gain",
                 Tensor::scalar(has_sched_ && t >= 1 ? eps_output_gain(sched_, t) : 1.0));
  Workspace ws;
  return graph_forward(dg.g, inputs, ws);
}

namespace {

// Shared training loop. With a schedule this is diffusion noise prediction;
// without one it degenerates to plain reconstruction of the clean window.
DenoiserTrainResult train_impl(const WindowBatch& train_windows,
                               const std::vector<MaskMatrix>* masks, const NoiseSchedule* sched,
                               const DenoiserTrainConfig& cfg, std::uint64_t seed) {
  const int n = static_cast<int>(train_windows.windows.size());
  if (n < 2) throw std::invalid_argument("train_denoiser: need at least 2 windows");
  if (train_windows.channels != cfg.arch.channels) {
    throw std::invalid_argument("train_denoiser: config channels " +
                                std::to_string(cfg.arch.channels) + " vs data " +
                                std::to_string(train_windows.channels));
  }
  if (masks && static_cast<int>(masks->size()) != n) {
    throw std::invalid_argument("train_denoiser: expected one mask per window");
  }
  if (cfg.lr <= 0.0 || cfg.batch < 1 || cfg.max_epochs < 1 || cfg.patience < 1 ||
      cfg.samples_per_window < 1) {
    throw std::invalid_argument("train_denoiser: bad training configuration");
  }

  const int W = train_windows.window;
  const int C = train_windows.channels;
  const int S = sched ? sched->steps : 0;
  const bool noise_mode = sched != nullptr;

  Rng rng(seed);
  NamedTensors init = init_denoiser_params(cfg.arch, rng.fork());
  DenoiserGraph dg = build_denoiser_graph(cfg.arch, W, init, true);
  Graph& g = dg.g;

  // Last 10% of windows (at least one) validate; the rest train.
  const int val_n = std::max(1, n / 10);
  const int train_n = n - val_n;

  const Tensor no_mask01 = BoolMat(W, W).to_tensor();
  std::vector<Tensor> mask01;
  if (masks) {
    mask01.reserve(masks->size());
    for (const MaskMatrix& m : *masks) mask01.push_back(m.blocked.to_tensor());
  }
  auto mask_for = [&](int w) -> const Tensor& { return masks ? mask01[w] : no_mask01; };

  std::map<int, Tensor> cond_cache;
  auto cond_for = [&](int t) -> const Tensor& {
    auto it = cond_cache.find(t);
    if (it == cond_cache.end()) {
      it = cond_cache.emplace(t, embed_conditioning(W, cfg.arch.d_model, t, S)).first;
    }
    return it->second;
  };

  struct Draw {
    int window;
    int t;
    Tensor eps;
  };
  auto make_draw = [&](int w) {
    Draw d;
    d.window = w;
    if (noise_mode) {
      d.t = 1 + static_cast<int>(rng.uniform_int(S));
      d.eps = Tensor(W, C);
      for (double& v : d.eps.data) v = rng.gaussian();
    } else {
      d.t = 0;
    }
    return d;
  };

  Workspace ws;
  NamedTensors inputs;  // reused across evaluations
  auto eval_draw = [&](const Draw& d, bool with_grad, NamedTensors* grads) {
    const Tensor& x0 = train_windows.windows[d.window];
    const double gain = noise_mode ? eps_output_gain(*sched, d.t) : 1.0;
    inputs.clear();
    if (noise_mode) {
      inputs.emplace("x", q_sample(*sched, x0, d.t, d.eps));
      Tensor target = d.eps;
      for (double& v : target.data) v /= gain;
      inputs.emplace("target", std::move(target));
    } else {
      inputs.emplace("x", x0);
      inputs.emplace("target", x0);
    }
    inputs.emplace("cond", cond_for(d.t));
    inputs.emplace("mask", mask_for(d.window));
    inputs.emplace("gain", Tensor::scalar(gain));
    graph_forward(g, inputs, ws);
    if (with_grad) graph_backward(g, ws, *grads);
    // gain^2 restores the plain mean squared eps error for reporting.
    return gain * gain * ws.val[dg.loss].data[0];
  };

  // Fixed draws for the validation loss and the pre-training reference.
  const int val_draws = noise_mode ? 4 : 1;
  std::vector<Draw> val_set;
  for (int w = train_n; w < n; ++w) {
    for (int k = 0; k < val_draws; ++k) val_set.push_back(make_draw(w));
  }
  std::vector<Draw> init_probe;
  for (int w = 0; w < train_n; ++w) init_probe.push_back(make_draw(w));

  auto mean_loss = [&](const std::vector<Draw>& set) {
    double s = 0.0;
    for (const Draw& d : set) s += eval_draw(d, false, nullptr);
    return s / static_cast<double>(set.size());
  };

  DenoiserTrainResult result;
  result.initial_loss = mean_loss(init_probe);

  NamedTensors grads = g.zero_grads();
  NamedTensors best_params = g.params();
  double best_val = std::numeric_limits<double>::infinity();
  int patience_left = cfg.patience;
  std::vector<int> order(train_n);
  std::iota(order.begin(), order.end(), 0);
  const int rounds = noise_mode ? cfg.samples_per_window : 1;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    int batches = 0;
    for (int round = 0; round < rounds; ++round) {
      rng.shuffle(order);
      for (int start = 0; start < train_n; start += cfg.batch) {
        const int count = std::min(cfg.batch, train_n - start);
        zero_all(grads);
        double batch_loss = 0.0;
        for (int b = 0; b < count; ++b) {
          batch_loss += eval_draw(make_draw(order[start + b]), true, &grads);
        }
        sgd_step(g.params(), grads, cfg.lr / count);
        loss_sum += batch_loss / count;
        ++batches;
      }
    }
    result.train_loss.push_back(loss_sum / batches);

    const double vloss = mean_loss(val_set);
    result.val_loss.push_back(vloss);
    if (vloss < best_val) {
      best_val = vloss;
      best_params = g.params();
      result.best_epoch = epoch;
      patience_left = cfg.patience;
    } else if (--patience_left == 0) {
      break;
    }
  }

  result.params = std::move(best_params);
  return result;
}

}  // namespace

DenoiserTrainResult train_denoiser(const WindowBatch& train_windows,
                                   const std::vector<MaskMatrix>& masks,
                                   const NoiseSchedule& sched, const DenoiserTrainConfig& cfg,
                                   std::uint64_t seed) {
  return train_impl(train_windows, &masks, &sched, cfg, seed);
}

DenoiserTrainResult train_reconstructor(const WindowBatch& train_windows,
                                        const DenoiserTrainConfig& cfg, std::uint64_t seed) {
  return train_impl(train_windows, nullptr, nullptr, cfg, seed);
}

}  // namespace ddmt
