#include "ddmt/tensor.hpp"

#include <cmath>
#include <stdexcept>

#include "ddmt/rng.hpp"

namespace ddmt {

Tensor::Tensor(int r, int c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != static_cast<std::size_t>(r) * c) {
    throw std::invalid_argument("Tensor: data length does not match shape " + shape_str());
  }
}

Tensor Tensor::full(int r, int c, double v) {
  Tensor t(r, c);
  for (double& x : t.data) x = v;
  return t;
}

Tensor Tensor::scalar(double v) { return Tensor(1, 1, {v}); }

Tensor Tensor::row(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor(1, n, std::move(values));
}

Tensor Tensor::uniform(int r, int c, double bound, Rng& rng) {
  Tensor t(r, c);
  for (double& x : t.data) x = rng.uniform(-bound, bound);
  return t;
}

bool Tensor::all_finite() const {
  for (double x : data) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

bool BoolMat::any() const {
  for (auto c : cells) {
    if (c) return true;
  }
  return false;
}

Tensor BoolMat::to_tensor() const {
  Tensor t(rows, cols);
  for (std::size_t i = 0; i < cells.size(); ++i) t.data[i] = cells[i] ? 1.0 : 0.0;
  return t;
}

}  // namespace ddmt
