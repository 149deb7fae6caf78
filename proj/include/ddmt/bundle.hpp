#pragma once

#include <string>

#include "ddmt/adnm.hpp"
#include "ddmt/config.hpp"
#include "ddmt/denoiser.hpp"
#include "ddmt/schedule.hpp"
#include "ddmt/series.hpp"

namespace ddmt {

// Versioned text bundle: config echo, normalizer, optional autoencoder and
// denoiser sections, schedule hyperparameters. Tensors are written with
// round-trip-exact decimals, so save/load is bit-faithful.
struct ModelBundle {
  RunConfig config;
  Normalizer normalizer;
  bool has_ae = false;
  AEParams ae;
  bool has_denoiser = false;
  NamedTensors denoiser_params;

  DenoiserHyper denoiser_hyper() const;
  NoiseSchedule schedule() const;
};

inline constexpr const char* kBundleMagic = "DDMT-BUNDLE v1";

void save_bundle(const ModelBundle& bundle, const std::string& path);

// Throws std::runtime_error on malformed content and BundleModeError on an
// unsupported version line.
ModelBundle load_bundle(const std::string& path);

}  // namespace ddmt
