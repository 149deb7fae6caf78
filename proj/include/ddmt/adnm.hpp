#pragma once

#include <cstdint>
#include <vector>

#include "ddmt/series.hpp"
#include "ddmt/tensor.hpp"

namespace ddmt {

// Deliberately shallow per-timestamp autoencoder (C -> ceil(C/2) -> C).
// Its reconstruction errors seed the adaptive neighbor mask.
struct AEParams {
  int channels = 0;
  int hidden = 0;
  Tensor enc_w, enc_b;  // C x h, 1 x h
  Tensor dec_w, dec_b;  // h x C, 1 x C
};

// Per-window attention mask. Row i of `blocked` holds true for columns the
// timestamp i must not attend to; non-seed rows are all false.
struct MaskMatrix {
  int size = 0;
  BoolMat blocked;
  std::vector<int> scales;  // m_i per row, 0 outside seeds
  std::vector<int> seeds;   // ascending

  static MaskMatrix all_visible(int size);
};

struct AETrainOptions {
  int epochs = 5;
  double lr = 1e-3;
};

// Pointwise SGD over every timestamp of every window; deterministic per seed.
AEParams train_autoencoder(const WindowBatch& train_windows, const AETrainOptions& opt,
                           std::uint64_t seed);

Tensor ae_reconstruct(const AEParams& params, const Tensor& window);

// e_i = (1/C) * sum_c (x_ic - xhat_ic)^2
std::vector<double> reconstruction_error(const AEParams& params, const Tensor& window);

// Mean of reconstruction_error over all windows (training diagnostics).
double ae_dataset_mse(const AEParams& params, const WindowBatch& windows);

// Pearson correlation over the channel values of two timestamps; zero
// variance on either side yields 0.
double pearson(const double* u, const double* v, int n);

// Seeds are the ceil(ratio * W) largest errors (ties to the lower index).
// Each seed's scale m_i grows while the neighbor correlation exceeds rho, up
// to `cap`; the seed row then blocks [i - m_i, i + m_i] clipped to the
// window, keeping at least one visible column.
MaskMatrix build_mask(const std::vector<double>& errors, const Tensor& window, double ratio,
                      double rho, int cap);

}  // namespace ddmt
