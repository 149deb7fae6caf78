#pragma once

// Shared helpers for the test suites: independent oracles and small utilities.
// Everything here is deliberately implementation-agnostic (direct formulas,
// brute force, quadrature) so tests do not share code paths with the library.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ddmt/graph.hpp"

namespace testutil {

// Relative error with a floor so near-zero gradients compare absolutely.
inline double rel_err(double a, double b) {
  const double denom = std::max({std::fabs(a), std::fabs(b), 1e-4});
  return std::fabs(a - b) / denom;
}

// Central finite differences over every trainable parameter entry of a graph
// with scalar output. Returns the max relative error vs the analytic grads.
inline double finite_diff_max_rel_err(ddmt::Graph& g, const ddmt::NamedTensors& inputs,
                                      double h = 1e-5) {
  const ddmt::EvalResult res = ddmt::evaluate_and_backprop(g, inputs, true);
  double worst = 0.0;
  for (auto& [name, p] : g.params()) {
    const ddmt::Tensor& analytic = res.grads.at(name);
    for (std::size_t j = 0; j < p.data.size(); ++j) {
      const double orig = p.data[j];
      p.data[j] = orig + h;
      const double fp = ddmt::evaluate_and_backprop(g, inputs, false).value.data[0];
      p.data[j] = orig - h;
      const double fm = ddmt::evaluate_and_backprop(g, inputs, false).value.data[0];
      p.data[j] = orig;
      const double fd = (fp - fm) / (2.0 * h);
      worst = std::max(worst, rel_err(analytic.data[j], fd));
    }
  }
  return worst;
}

// Scratch directory for file-based tests.
inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("ddmt_test_" + tag);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path.string();
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Two-sided Student-t p value by quadrature: p = 2 * integral of the density
// from |t| to infinity, transformed to a finite interval via u = tan(theta).
// Independent of the library's incomplete-beta evaluation.
inline double student_t_two_sided_p_quadrature(double t, double dof) {
  const double at = std::fabs(t);
  auto density = [dof](double u) {
    const double logc = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
                        0.5 * std::log(dof * M_PI);
    return std::exp(logc - (dof + 1.0) / 2.0 * std::log1p(u * u / dof));
  };
  const double lo = std::atan(at);
  const double hi = M_PI / 2.0;
  const int n = 20000;  // Simpson panels (even count)
  const double step = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double theta = lo + i * step;
    double f;
    if (i == n) {
      f = 0.0;  // density * sec^2 -> 0 as u -> infinity
    } else {
      const double u = std::tan(theta);
      const double sec2 = 1.0 + u * u;
      f = density(u) * sec2;
    }
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * f;
  }
  return 2.0 * acc * step / 3.0;
}

}  // namespace testutil
