#include "ddmt/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "ddmt/rng.hpp"

namespace ddmt {

double diffusion_loss(const NoiseSchedule& sched, const NoisePredictor& predictor,
                      const Tensor& x0, const MaskMatrix& mask, int t, const Tensor& eps) {
  const Tensor xt = q_sample(sched, x0, t, eps);
  const Tensor eps_hat = predictor.predict_noise(xt, t, mask);
  if (!eps_hat.same_shape(eps)) {
    throw std::invalid_argument("diffusion_loss: predictor returned " + eps_hat.shape_str() +
                                ", expected " + eps.shape_str());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < eps.data.size(); ++i) {
    const double d = eps.data[i] - eps_hat.data[i];
    s += d * d;
  }
  return s / static_cast<double>(eps.data.size());
}

Tensor p_sample_step(const NoiseSchedule& sched, const NoisePredictor& predictor,
                     const Tensor& xt, int t, const MaskMatrix& mask, const Tensor& z) {
  if (!xt.same_shape(z)) {
    throw std::invalid_argument("p_sample_step: xt is " + xt.shape_str() + " but z is " +
                                z.shape_str());
  }
  const double alpha = sched.alpha_at(t);
  const double beta = sched.beta_at(t);
  const double abar = sched.alpha_bar_at(t);
  const double sigma = sched.sigma_at(t);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
  const double noise_coef = beta / std::sqrt(1.0 - abar);

  const Tensor eps_hat = predictor.predict_noise(xt, t, mask);
  if (!eps_hat.same_shape(xt)) {
    throw std::invalid_argument("p_sample_step: predictor returned " + eps_hat.shape_str());
  }
  Tensor out(xt.rows, xt.cols);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = inv_sqrt_alpha * (xt.data[i] - noise_coef * eps_hat.data[i]) + sigma * z.data[i];
  }
  return out;
}

Tensor reconstruct(const NoiseSchedule& sched, const NoisePredictor& predictor, const Tensor& x0,
                   const MaskMatrix& mask, int t_infer, std::uint64_t seed) {
  if (t_infer < 0 || t_infer > sched.steps) {
    throw std::out_of_range("reconstruct: t_infer " + std::to_string(t_infer) + " outside [0, " +
                            std::to_string(sched.steps) + "]");
  }
  if (t_infer == 0) return x0;

  Rng rng(seed);
  Tensor eps(x0.rows, x0.cols);
  for (double& v : eps.data) v = rng.gaussian();
  Tensor xt = q_sample(sched, x0, t_infer, eps);

  Tensor z(x0.rows, x0.cols);
  for (int t = t_infer; t >= 1; --t) {
    if (t > 1) {
      for (double& v : z.data) v = rng.gaussian();
    } else {
      for (double& v : z.data) v = 0.0;
    }
    xt = p_sample_step(sched, predictor, xt, t, mask, z);
  }
  return xt;
}

}  // namespace ddmt
