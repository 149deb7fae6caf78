#include "ddmt/detect.hpp"

#include <algorithm>
#include <stdexcept>

#include "ddmt/util.hpp"

namespace ddmt {

std::vector<double> anomaly_score(const Tensor& original, const Tensor& reconstructed) {
  if (!original.same_shape(reconstructed)) {
    throw std::invalid_argument("anomaly_score: shapes " + original.shape_str() + " vs " +
                                reconstructed.shape_str());
  }
  std::vector<double> scores(original.rows, 0.0);
  for (int i = 0; i < original.rows; ++i) {
    double s = 0.0;
    for (int c = 0; c < original.cols; ++c) {
      const double d = original.at(i, c) - reconstructed.at(i, c);
      s += d * d;
    }
    scores[static_cast<std::size_t>(i)] = s / original.cols;
  }
  return scores;
}

std::vector<double> assemble_scores(int length, int window, const std::vector<int>& offsets,
                                    const std::vector<std::vector<double>>& per_window) {
  if (offsets.size() != per_window.size()) {
    throw std::invalid_argument("assemble_scores: offsets and score lists differ in length");
  }
  std::vector<double> out(length, 0.0);
  std::vector<char> covered(length, 0);
  for (std::size_t w = 0; w < offsets.size(); ++w) {
    if (static_cast<int>(per_window[w].size()) != window) {
      throw std::invalid_argument("assemble_scores: window " + std::to_string(w) +
                                  " has wrong score count");
    }
    const int off = offsets[w];
    if (off < 0 || off + window > length) {
      throw std::invalid_argument("assemble_scores: offset " + std::to_string(off) +
                                  " out of range");
    }
    for (int i = 0; i < window; ++i) {
      out[static_cast<std::size_t>(off + i)] = per_window[w][static_cast<std::size_t>(i)];
      covered[static_cast<std::size_t>(off + i)] = 1;
    }
  }
  for (int t = 0; t < length; ++t) {
    if (!covered[static_cast<std::size_t>(t)]) {
      throw std::invalid_argument("assemble_scores: timestamp " + std::to_string(t) +
                                  " not covered");
    }
  }
  return out;
}

double select_threshold(const std::vector<double>& validation_scores, double ratio) {
  if (validation_scores.empty()) throw std::invalid_argument("select_threshold: empty scores");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("select_threshold: ratio must be in (0, 1)");
  }
  const int n = static_cast<int>(validation_scores.size());
  int rank = ceil_count((1.0 - ratio) * n);  // 1-based nearest rank
  rank = std::clamp(rank, 1, n);
  std::vector<double> sorted = validation_scores;
  std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
  return sorted[static_cast<std::size_t>(rank - 1)];
}

std::vector<int> point_adjust(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size()) {
    throw std::invalid_argument("point_adjust: preds length " + std::to_string(preds.size()) +
                                " vs labels " + std::to_string(labels.size()));
  }
  std::vector<int> adjusted = preds;
  const int n = static_cast<int>(labels.size());
  int t = 0;
  while (t < n) {
    if (labels[static_cast<std::size_t>(t)] != 1) {
      ++t;
      continue;
    }
    int end = t;
    while (end < n && labels[static_cast<std::size_t>(end)] == 1) ++end;
    bool hit = false;
    for (int i = t; i < end; ++i) {
      if (preds[static_cast<std::size_t>(i)] == 1) hit = true;
    }
    if (hit) {
      for (int i = t; i < end; ++i) adjusted[static_cast<std::size_t>(i)] = 1;
    }
    t = end;
  }
  return adjusted;
}

EvalCounts count_confusion(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size()) {
    throw std::invalid_argument("count_confusion: length mismatch");
  }
  EvalCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] == 1) {
      preds[i] == 1 ? ++c.tp : ++c.fn;
    } else {
      preds[i] == 1 ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

Prf1 prf1_from_counts(const EvalCounts& c) {
  Prf1 m;
  m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

Prf1 prf1(const std::vector<int>& preds, const std::vector<int>& labels) {
  return prf1_from_counts(count_confusion(preds, labels));
}

}  // namespace ddmt
