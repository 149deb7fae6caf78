#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddmt/series.hpp"

namespace ddmt {

enum class AnomalyKind { kSpike, kLevelShift, kNoiseBurst };

std::string to_string(AnomalyKind k);
AnomalyKind anomaly_kind_from_string(const std::string& name);

// Seeded benchmark generator: per-channel sinusoids (random period and phase)
// plus Gaussian noise, with ceil(r * T) anomalous timestamps injected as
// contiguous segments of length 5..20. Labels mark exactly the perturbed
// timestamps. Identical arguments produce bit-identical output.
MultivariateSeries generate_synthetic(int channels, int length, double anomaly_ratio,
                                      const std::vector<AnomalyKind>& kinds, std::uint64_t seed);

}  // namespace ddmt
