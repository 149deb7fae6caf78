#pragma once

#include <vector>

namespace ddmt {

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation, absolute error well under 1e-8.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p value of the Student-t distribution with `dof` degrees of
// freedom (dof may be fractional).
double student_t_two_sided_p(double t, double dof);

struct WelchResult {
  double t = 0.0;
  double p = 1.0;
  double dof = 0.0;
};

// Welch's independent-samples t-test with Welch-Satterthwaite degrees of
// freedom. Both samples need n >= 2. Two equal constant samples give
// (t = 0, p = 1); degenerate variance with unequal means gives t = +/-inf
// and p = 0.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ddmt
