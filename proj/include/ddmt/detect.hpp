#pragma once

#include <map>
#include <string>
#include <vector>

#include "ddmt/tensor.hpp"

namespace ddmt {

struct EvalCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
};

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct DetectionReport {
  double threshold = 0.0;
  std::vector<double> scores;
  std::vector<int> raw_pred;
  std::vector<int> adjusted_pred;
  std::vector<int> labels;
  EvalCounts counts;
  Prf1 metrics;
  // Wall-clock phase timings; reported separately from the deterministic
  // artifacts.
  std::map<std::string, double> timings_sec;
};

// Per-timestamp channel-mean squared error between a window and its
// reconstruction.
std::vector<double> anomaly_score(const Tensor& original, const Tensor& reconstructed);

// Stitch per-window scores into a length-T series; overlapped positions take
// the later window's values.
std::vector<double> assemble_scores(int length, int window, const std::vector<int>& offsets,
                                    const std::vector<std::vector<double>>& per_window);

// Nearest-rank quantile: the ceil((1 - ratio) * n)-th smallest score. Points
// are flagged only when strictly above the threshold.
double select_threshold(const std::vector<double>& validation_scores, double ratio);

// Point-adjustment protocol: a hit anywhere inside a maximal run of 1-labels
// marks the whole run as detected.
std::vector<int> point_adjust(const std::vector<int>& preds, const std::vector<int>& labels);

EvalCounts count_confusion(const std::vector<int>& preds, const std::vector<int>& labels);

// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R); zero denominators yield 0.
Prf1 prf1(const std::vector<int>& preds, const std::vector<int>& labels);
Prf1 prf1_from_counts(const EvalCounts& counts);

}  // namespace ddmt
