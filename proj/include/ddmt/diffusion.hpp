#pragma once

#include <cstdint>

#include "ddmt/adnm.hpp"
#include "ddmt/schedule.hpp"
#include "ddmt/tensor.hpp"

namespace ddmt {

// Anything that can predict the injected noise for a noised window.
struct NoisePredictor {
  virtual ~NoisePredictor() = default;
  virtual Tensor predict_noise(const Tensor& xt, int t, const MaskMatrix& mask) const = 0;
};

// Mean over all W*C entries of (eps - eps_hat)^2, with
// eps_hat = predictor(q_sample(x0, t, eps), t, mask).
double diffusion_loss(const NoiseSchedule& sched, const NoisePredictor& predictor,
                      const Tensor& x0, const MaskMatrix& mask, int t, const Tensor& eps);

// One ancestral step:
// (xt - beta_t / sqrt(1 - abar_t) * eps_hat) / sqrt(alpha_t) + sigma_t * z.
// Callers pass z = 0 at t = 1 (sigma_1 = 0 makes the term vanish anyway).
Tensor p_sample_step(const NoiseSchedule& sched, const NoisePredictor& predictor,
                     const Tensor& xt, int t, const MaskMatrix& mask, const Tensor& z);

// Partial-noising reconstruction: noise x0 up to t_infer with a seeded draw,
// then run the reverse chain back to t = 1. t_infer = 0 returns x0 unchanged.
Tensor reconstruct(const NoiseSchedule& sched, const NoisePredictor& predictor, const Tensor& x0,
                   const MaskMatrix& mask, int t_infer, std::uint64_t seed);

}  // namespace ddmt
