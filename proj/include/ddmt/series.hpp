#pragma once

#include <string>
#include <vector>

#include "ddmt/tensor.hpp"

namespace ddmt {

// C-channel, T-timestamp real-valued series with optional binary labels.
struct MultivariateSeries {
  int channels = 0;
  int length = 0;
  std::vector<std::string> channel_names;
  std::vector<double> values;  // row-major, length x channels
  std::vector<int> labels;     // empty, or one 0/1 per timestamp

  double& value(int t, int c) { return values[static_cast<std::size_t>(t) * channels + c]; }
  double value(int t, int c) const { return values[static_cast<std::size_t>(t) * channels + c]; }
  bool has_labels() const { return !labels.empty(); }
};

// Per-channel z-score transform fitted on training data only.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> stddev;  // floored at kStdFloor

  static constexpr double kStdFloor = 1e-8;

  void apply(MultivariateSeries& s) const;
};

struct WindowBatch {
  int window = 0;    // W
  int channels = 0;  // C
  std::vector<Tensor> windows;  // each W x C
  std::vector<int> offsets;     // start timestamps, non-decreasing
};

enum class SliceMode { kTrain, kInfer };

// CSV ingestion. Line 1 holds channel names; every following line holds C
// numeric fields. An optional label file has one 0/1 per line, length T.
// Malformed input is rejected with the offending line number.
MultivariateSeries load_series(const std::string& path, const std::string& label_path = "");

void write_series_csv(const MultivariateSeries& s, const std::string& path,
                      const std::string& label_path = "");

Normalizer fit_normalizer(const MultivariateSeries& train);

// Fits on `train` and applies the same transform to train and all `others`.
Normalizer fit_and_normalize(MultivariateSeries& train, std::vector<MultivariateSeries*> others);

// Train mode: floor(T/W) disjoint windows, remainder dropped. Infer mode adds
// one tail window starting at T-W when T % W != 0 so every timestamp is
// covered.
WindowBatch slice_windows(const MultivariateSeries& s, int window, SliceMode mode);

}  // namespace ddmt
