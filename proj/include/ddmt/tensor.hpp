#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ddmt {

class Rng;

// Dense row-major matrix of doubles. Vectors are 1 x n, scalars 1 x 1.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  Tensor(int r, int c, std::vector<double> values);

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double v);
  static Tensor scalar(double v);
  static Tensor row(std::vector<double> values);
  // Entries uniform in [-bound, bound].
  static Tensor uniform(int r, int c, double bound, Rng& rng);

  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const;
  std::string shape_str() const;
};

// Boolean matrix; used for attention masks (true = blocked).
struct BoolMat {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> cells;

  BoolMat() = default;
  BoolMat(int r, int c) : rows(r), cols(c), cells(static_cast<std::size_t>(r) * c, 0) {}

  bool at(int i, int j) const { return cells[static_cast<std::size_t>(i) * cols + j] != 0; }
  void set(int i, int j, bool v) { cells[static_cast<std::size_t>(i) * cols + j] = v ? 1 : 0; }
  bool any() const;

  // 0/1 tensor view (1 = blocked), e.g. for feeding masks into a graph.
  Tensor to_tensor() const;
};

}  // namespace ddmt
