#include "ddmt/series.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ddmt/util.hpp"

namespace ddmt {

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& field, const std::string& path, int line_no, int col) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0')) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": field " +
                             std::to_string(col + 1) + " is not numeric: '" + field + "'");
  }
  if (!std::isfinite(v)) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": non-finite value");
  }
  return v;
}

}  // namespace

MultivariateSeries load_series(const std::string& path, const std::string& label_path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open series file: " + path);

  MultivariateSeries s;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ":1: missing header line");
  strip_cr(line);
  s.channel_names = split_csv(line);
  s.channels = static_cast<int>(s.channel_names.size());
  if (s.channels < 1) throw std::runtime_error(path + ":1: empty header");

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() && in.eof()) break;  // trailing newline
    const auto fields = split_csv(line);
    if (static_cast<int>(fields.size()) != s.channels) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(s.channels) + " fields, got " +
                               std::to_string(fields.size()));
    }
    for (int c = 0; c < s.channels; ++c) {
      s.values.push_back(parse_number(fields[c], path, line_no, c));
    }
    ++s.length;
  }
  if (s.length == 0) throw std::runtime_error(path + ": no data rows");

  if (!label_path.empty()) {
    std::ifstream lin(label_path);
    if (!lin) throw std::runtime_error("cannot open label file: " + label_path);
    int lno = 0;
    while (std::getline(lin, line)) {
      ++lno;
      strip_cr(line);
      if (line.empty() && lin.eof()) {
        --lno;
        break;
      }
      if (line != "0" && line != "1") {
        throw std::runtime_error(label_path + ":" + std::to_string(lno) +
                                 ": label must be 0 or 1, got '" + line + "'");
      }
      s.labels.push_back(line == "1" ? 1 : 0);
    }
    if (static_cast<int>(s.labels.size()) != s.length) {
      throw std::runtime_error(label_path + ": expected " + std::to_string(s.length) +
                               " labels, got " + std::to_string(s.labels.size()));
    }
  }
  return s;
}

void write_series_csv(const MultivariateSeries& s, const std::string& path,
                      const std::string& label_path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write series file: " + path);
  for (int c = 0; c < s.channels; ++c) {
    if (c) out << ',';
    out << (c < static_cast<int>(s.channel_names.size()) ? s.channel_names[c]
                                                         : "ch" + std::to_string(c));
  }
  out << '\n';
  for (int t = 0; t < s.length; ++t) {
    for (int c = 0; c < s.channels; ++c) {
      if (c) out << ',';
      out << fmt_double(s.value(t, c));
    }
    out << '\n';
  }
  if (!label_path.empty()) {
    if (!s.has_labels()) throw std::runtime_error("series has no labels to write");
    std::ofstream lout(label_path, std::ios::binary);
    if (!lout) throw std::runtime_error("cannot write label file: " + label_path);
    for (int v : s.labels) lout << v << '\n';
  }
}

void Normalizer::apply(MultivariateSeries& s) const {
  if (static_cast<int>(mean.size()) != s.channels) {
    throw std::invalid_argument("normalizer channel count " + std::to_string(mean.size()) +
                                " does not match series " + std::to_string(s.channels));
  }
  for (int t = 0; t < s.length; ++t) {
    for (int c = 0; c < s.channels; ++c) {
      s.value(t, c) = (s.value(t, c) - mean[c]) / stddev[c];
    }
  }
}

Normalizer fit_normalizer(const MultivariateSeries& train) {
  if (train.length < 2) throw std::invalid_argument("normalizer needs at least 2 timestamps");
  Normalizer n;
  n.mean.assign(train.channels, 0.0);
  n.stddev.assign(train.channels, 0.0);
  for (int t = 0; t < train.length; ++t) {
    for (int c = 0; c < train.channels; ++c) n.mean[c] += train.value(t, c);
  }
  for (int c = 0; c < train.channels; ++c) n.mean[c] /= train.length;
  for (int t = 0; t < train.length; ++t) {
    for (int c = 0; c < train.channels; ++c) {
      const double d = train.value(t, c) - n.mean[c];
      n.stddev[c] += d * d;
    }
  }
  for (int c = 0; c < train.channels; ++c) {
    n.stddev[c] = std::sqrt(n.stddev[c] / train.length);  // population
    if (n.stddev[c] < Normalizer::kStdFloor) n.stddev[c] = Normalizer::kStdFloor;
  }
  return n;
}

Normalizer fit_and_normalize(MultivariateSeries& train, std::vector<MultivariateSeries*> others) {
  const Normalizer n = fit_normalizer(train);
  n.apply(train);
  for (MultivariateSeries* s : others) n.apply(*s);
  return n;
}

WindowBatch slice_windows(const MultivariateSeries& s, int window, SliceMode mode) {
  if (window < 1) throw std::invalid_argument("window size must be positive");
  if (s.length < window) {
    throw std::invalid_argument("series length " + std::to_string(s.length) +
                                " is shorter than window " + std::to_string(window));
  }
  WindowBatch batch;
  batch.window = window;
  batch.channels = s.channels;
  const int full = s.length / window;
  for (int w = 0; w < full; ++w) batch.offsets.push_back(w * window);
  if (mode == SliceMode::kInfer && s.length % window != 0) {
    batch.offsets.push_back(s.length - window);  // overlapping tail
  }
  for (int off : batch.offsets) {
    Tensor win(window, s.channels);
    for (int i = 0; i < window; ++i) {
      for (int c = 0; c < s.channels; ++c) win.at(i, c) = s.value(off + i, c);
    }
    batch.windows.push_back(std::move(win));
  }
  return batch;
}

}  // namespace ddmt
