#pragma once

#include <vector>

#include "ddmt/tensor.hpp"

namespace ddmt {

enum class SigmaKind { kBetaTilde, kBeta };

// Linear-beta noise schedule and its derived tables, 1-indexed by step t.
struct NoiseSchedule {
  int steps = 0;
  SigmaKind sigma_kind = SigmaKind::kBetaTilde;
  std::vector<double> beta;        // beta_t
  std::vector<double> alpha;       // 1 - beta_t
  std::vector<double> alpha_bar;   // prod_{u<=t} alpha_u
  std::vector<double> beta_tilde;  // (1 - abar_{t-1}) / (1 - abar_t) * beta_t, abar_0 = 1
  std::vector<double> sigma;       // sqrt(beta_tilde_t) or sqrt(beta_t)

  double beta_at(int t) const { return beta[check(t)]; }
  double alpha_at(int t) const { return alpha[check(t)]; }
  double alpha_bar_at(int t) const { return alpha_bar[check(t)]; }
  double beta_tilde_at(int t) const { return beta_tilde[check(t)]; }
  double sigma_at(int t) const { return sigma[check(t)]; }

 private:
  std::size_t check(int t) const;
};

// beta_t interpolates linearly from beta1 (t = 1) to betaT (t = steps), exact
// at both endpoints. Requires steps >= 2 and 0 < beta1 < betaT < 1.
NoiseSchedule build_schedule(int steps, double beta1, double betaT,
                             SigmaKind sigma_kind = SigmaKind::kBetaTilde);

// Closed-form forward noising: sqrt(abar_t) * x0 + sqrt(1 - abar_t) * eps.
Tensor q_sample(const NoiseSchedule& sched, const Tensor& x0, int t, const Tensor& eps);

}  // namespace ddmt
