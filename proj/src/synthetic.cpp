#include "ddmt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ddmt/rng.hpp"
#include "ddmt/util.hpp"

namespace ddmt {

namespace {

constexpr double kNoiseSigma = 0.05;
constexpr double kBurstFactor = 10.0;
constexpr double kAmplitude = 2.0;
constexpr int kMinSegment = 5;
constexpr int kMaxSegment = 20;

// Segment lengths in [5, 20] summing exactly to `total` (the final segment
// absorbs any remainder, possibly falling below 5 when total demands it).
std::vector<int> draw_segment_lengths(int total, Rng& rng) {
  std::vector<int> lengths;
  int remaining = total;
  while (remaining > 0) {
    int len = kMinSegment + static_cast<int>(rng.uniform_int(kMaxSegment - kMinSegment + 1));
    if (len >= remaining) {
      len = remaining;  // final segment, possibly shorter than kMinSegment
    } else if (remaining - len < kMinSegment) {
      // Avoid leaving a sub-minimum remainder.
      len = remaining <= kMaxSegment ? remaining : remaining - kMinSegment;
    }
    lengths.push_back(len);
    remaining -= len;
  }
  return lengths;
}

// Non-overlapping placements with a one-timestamp gap so segments stay
// distinct label runs. Random probing first, then a deterministic scan.
std::vector<int> place_segments(const std::vector<int>& lengths, int series_len,
                                std::vector<char>& occupied, Rng& rng) {
  std::vector<int> starts;
  for (int len : lengths) {
    int start = -1;
    for (int attempt = 0; attempt < 2000; ++attempt) {
      const int cand = static_cast<int>(rng.uniform_int(series_len - len + 1));
      bool free = true;
      for (int t = std::max(0, cand - 1); t < std::min(series_len, cand + len + 1); ++t) {
        if (occupied[t]) {
          free = false;
          break;
        }
      }
      if (free) {
        start = cand;
        break;
      }
    }
    if (start < 0) {
      const int base = static_cast<int>(rng.uniform_int(series_len));
      for (int shift = 0; shift < series_len && start < 0; ++shift) {
        const int cand = (base + shift) % (series_len - len + 1);
        bool free = true;
        for (int t = std::max(0, cand - 1); t < std::min(series_len, cand + len + 1); ++t) {
          if (occupied[t]) {
            free = false;
            break;
          }
        }
        if (free) start = cand;
      }
    }
    if (start < 0) throw std::runtime_error("synthetic: cannot place anomaly segments (ratio too high)");
    for (int t = start; t < start + len; ++t) occupied[t] = 1;
    starts.push_back(start);
  }
  return starts;
}

}  // namespace

std::string to_string(AnomalyKind k) {
  switch (k) {
    case AnomalyKind::kSpike: return "spike";
    case AnomalyKind::kLevelShift: return "level_shift";
    case AnomalyKind::kNoiseBurst: return "noise_burst";
  }
  return "?";
}

AnomalyKind anomaly_kind_from_string(const std::string& name) {
  if (name == "spike") return AnomalyKind::kSpike;
  if (name == "level_shift") return AnomalyKind::kLevelShift;
  if (name == "noise_burst") return AnomalyKind::kNoiseBurst;
  throw std::invalid_argument("unknown anomaly kind: " + name);
}

MultivariateSeries generate_synthetic(int channels, int length, double anomaly_ratio,
                                      const std::vector<AnomalyKind>& kinds, std::uint64_t seed) {
  if (channels < 1) throw std::invalid_argument("synthetic: need at least one channel");
  if (length < 100) throw std::invalid_argument("synthetic: need length >= 100");
  if (anomaly_ratio < 0.0 || anomaly_ratio >= 1.0) {
    throw std::invalid_argument("synthetic: anomaly ratio must be in [0, 1)");
  }
  if (anomaly_ratio > 0.0 && anomaly_ratio * length < 1.0) {
    throw std::invalid_argument("synthetic: ratio * length < 1, no room for an anomaly segment");
  }
  if (anomaly_ratio > 0.0 && kinds.empty()) {
    throw std::invalid_argument("synthetic: no anomaly kinds given with ratio > 0");
  }

  Rng rng(seed);
  MultivariateSeries s;
  s.channels = channels;
  s.length = length;
  s.values.assign(static_cast<std::size_t>(length) * channels, 0.0);
  s.labels.assign(length, 0);
  for (int c = 0; c < channels; ++c) s.channel_names.push_back("ch" + std::to_string(c));

  // Clean base signal and its per-channel range (used to scale injections).
  std::vector<double> range(channels, 0.0);
  for (int c = 0; c < channels; ++c) {
    const double period = rng.uniform(40.0, 140.0);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    double lo = 0.0, hi = 0.0;
    for (int t = 0; t < length; ++t) {
      const double v = kAmplitude * std::sin(2.0 * M_PI * t / period + phase);
      s.value(t, c) = v;
      if (t == 0 || v < lo) lo = v;
      if (t == 0 || v > hi) hi = v;
    }
    range[c] = hi - lo;
  }
  for (int t = 0; t < length; ++t) {
    for (int c = 0; c < channels; ++c) s.value(t, c) += kNoiseSigma * rng.gaussian();
  }

  if (anomaly_ratio == 0.0) return s;

  const int target = ceil_count(anomaly_ratio * length);
  const auto lengths = draw_segment_lengths(target, rng);
  std::vector<char> occupied(length, 0);
  const auto starts = place_segments(lengths, length, occupied, rng);

  for (std::size_t seg = 0; seg < lengths.size(); ++seg) {
    const int start = starts[seg];
    const int len = lengths[seg];
    const AnomalyKind kind = kinds[rng.uniform_int(kinds.size())];
    switch (kind) {
      case AnomalyKind::kSpike:
        for (int t = start; t < start + len; ++t) {
          for (int c = 0; c < channels; ++c) {
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            s.value(t, c) += sign * rng.uniform(3.0, 6.0) * kNoiseSigma * range[c];
          }
        }
        break;
      case AnomalyKind::kLevelShift:
        for (int c = 0; c < channels; ++c) {
          const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
          const double offset = sign * rng.uniform(3.0, 6.0) * kNoiseSigma * range[c];
          for (int t = start; t < start + len; ++t) s.value(t, c) += offset;
        }
        break;
      case AnomalyKind::kNoiseBurst: {
        // Bring total noise sigma to kBurstFactor * kNoiseSigma.
        const double extra =
            kNoiseSigma * std::sqrt(kBurstFactor * kBurstFactor - 1.0);
        for (int t = start; t < start + len; ++t) {
          for (int c = 0; c < channels; ++c) s.value(t, c) += extra * rng.gaussian();
        }
        break;
      }
    }
    for (int t = start; t < start + len; ++t) s.labels[t] = 1;
  }
  return s;
}

}  // namespace ddmt
