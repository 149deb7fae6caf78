#include "ddmt/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ddmt {

std::size_t NoiseSchedule::check(int t) const {
  if (t < 1 || t > steps) {
    throw std::out_of_range("schedule: step " + std::to_string(t) + " outside [1, " +
                            std::to_string(steps) + "]");
  }
  return static_cast<std::size_t>(t - 1);
}

NoiseSchedule build_schedule(int steps, double beta1, double betaT, SigmaKind sigma_kind) {
  if (steps < 2) throw std::invalid_argument("schedule: need at least 2 steps");
  if (!(beta1 > 0.0 && beta1 < betaT && betaT < 1.0)) {
    throw std::invalid_argument("schedule: require 0 < beta1 < betaT < 1");
  }

  NoiseSchedule s;
  s.steps = steps;
  s.sigma_kind = sigma_kind;
  s.beta.resize(steps);
  s.alpha.resize(steps);
  s.alpha_bar.resize(steps);
  s.beta_tilde.resize(steps);
  s.sigma.resize(steps);

  double abar = 1.0;
  for (int t = 1; t <= steps; ++t) {
    const std::size_t i = static_cast<std::size_t>(t - 1);
    const double frac = static_cast<double>(t - 1) / static_cast<double>(steps - 1);
    s.beta[i] = beta1 * (1.0 - frac) + betaT * frac;
    s.alpha[i] = 1.0 - s.beta[i];
    const double abar_prev = abar;
    abar *= s.alpha[i];
    s.alpha_bar[i] = abar;
    s.beta_tilde[i] = t == 1 ? 0.0 : (1.0 - abar_prev) / (1.0 - abar) * s.beta[i];
    s.sigma[i] = sigma_kind == SigmaKind::kBetaTilde ? std::sqrt(s.beta_tilde[i])
                                                     : std::sqrt(s.beta[i]);
  }
  return s;
}

Tensor q_sample(const NoiseSchedule& sched, const Tensor& x0, int t, const Tensor& eps) {
  if (!x0.same_shape(eps)) {
    throw std::invalid_argument("q_sample: x0 is " + x0.shape_str() + " but eps is " +
                                eps.shape_str());
  }
  const double abar = sched.alpha_bar_at(t);
  const double a = std::sqrt(abar);
  const double b = std::sqrt(1.0 - abar);
  Tensor out(x0.rows, x0.cols);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = a * x0.data[i] + b * eps.data[i];
  }
  return out;
}

}  // namespace ddmt
