#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "ddmt/adnm.hpp"
#include "ddmt/diffusion.hpp"
#include "ddmt/graph.hpp"
#include "ddmt/schedule.hpp"
#include "ddmt/series.hpp"

namespace ddmt {

struct DenoiserHyper {
  int channels = 0;   // C
  int d_model = 64;   // d, divisible by heads
  int heads = 4;
  int layers = 2;
  int ffn = 128;
};

// Sinusoidal positional code for positions 0..W-1 plus the same code
// evaluated at the scalar step t, broadcast to every row. d must be even.
Tensor embed_conditioning(int window, int d_model, int t, int max_step);

// Fixed multiplier applied to the output projection at step t. Predicting
// the injected noise needs an output amplitude of 1/sqrt(1 - abar_t), which
// explodes as t -> 1; baking the schedule-known factor into the head keeps
// the learned part at unit scale across steps. Capped for stability.
double eps_output_gain(const NoiseSchedule& sched, int t);

// Transformer encoder graph over one window. Post-norm blocks: masked
// multi-head self-attention, add & norm, feed-forward, add & norm. The
// attention mask is a 0/1 input applied identically to every head.
struct DenoiserGraph {
  Graph g;
  int prediction = -1;  // W x C output node
  int loss = -1;        // mse(prediction, target), train mode only
  std::vector<int> attn_out;  // per-layer attention output (pre-residual)
};

// Canonically named, seeded parameter set; the output projection starts at
// zero so the prediction is identically zero before training.
NamedTensors init_denoiser_params(const DenoiserHyper& hyper, std::uint64_t seed);

// mode "train": inputs x, cond, mask, gain, target; output = W*C * mse (the
// squared-error norm the gradient step descends). mode "infer": output is
// the prediction itself. The "gain" input is the output-head multiplier.
DenoiserGraph build_denoiser_graph(const DenoiserHyper& hyper, int window,
                                   const NamedTensors& params, bool train_mode);

// Immutable trained network; thread-safe for concurrent forward passes.
// Constructed with the schedule it was trained under (nullptr for the plain
// reconstruction baseline, where the output gain is 1).
class Denoiser : public NoisePredictor {
 public:
  Denoiser(DenoiserHyper hyper, NamedTensors params, const NoiseSchedule* sched = nullptr);

  Tensor forward(const Tensor& x, int t, const MaskMatrix& mask) const;
  Tensor predict_noise(const Tensor& xt, int t, const MaskMatrix& mask) const override {
    return forward(xt, t, mask);
  }

  const DenoiserHyper& hyper() const { return hyper_; }
  const NamedTensors& params() const { return params_; }

 private:
  const DenoiserGraph& graph_for(int window) const;

  DenoiserHyper hyper_;
  NamedTensors params_;
  bool has_sched_ = false;
  NoiseSchedule sched_;
  mutable std::mutex mu_;
  mutable std::map<int, std::unique_ptr<DenoiserGraph>> cache_;
};

struct DenoiserTrainConfig {
  DenoiserHyper arch;
  double lr = 1e-4;
  int batch = 256;
  int max_epochs = 10;
  int patience = 3;
  // Fresh (t, eps) draws per window per epoch; the desk-scale knob that sets
  // how many gradient steps an epoch contains.
  int samples_per_window = 8;
};

struct DenoiserTrainResult {
  NamedTensors params;             // best-validation parameters
  double initial_loss = 0.0;       // pre-training loss on the training split
  std::vector<double> train_loss;  // per-epoch mean batch loss
  std::vector<double> val_loss;    // per-epoch validation loss
  int best_epoch = 0;              // 1-based
};

// Noise-prediction training per the diffusion objective: per batch window,
// t ~ Uniform{1..S} and eps ~ N(0, I); one SGD step on the mean loss. The
// last 10% of windows (at least one) are held out for early stopping.
// Losses are reported as mean squared error per entry.
DenoiserTrainResult train_denoiser(const WindowBatch& train_windows,
                                   const std::vector<MaskMatrix>& masks,
                                   const NoiseSchedule& sched, const DenoiserTrainConfig& cfg,
                                   std::uint64_t seed);

// Plain reconstruction baseline: same architecture, no masks, no diffusion;
// trained to map the clean window to itself.
DenoiserTrainResult train_reconstructor(const WindowBatch& train_windows,
                                        const DenoiserTrainConfig& cfg, std::uint64_t seed);

}  // namespace ddmt
