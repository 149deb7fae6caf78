#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddmt/synthetic.hpp"

namespace ddmt {

// Exit-code-bearing error categories for the CLI surface.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BundleModeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunMode { kFull, kNoAdnm, kNoDdt, kTransformer };

std::string to_string(RunMode m);
RunMode run_mode_from_string(const std::string& s);

// Flat key = value configuration. Defaults follow the standard protocol
// settings; every field is overridable from a config file and from
// DDMT_<KEY> environment variables.
struct RunConfig {
  // Data: file paths, or the seeded synthetic benchmark when paths are empty.
  std::string train_path;
  std::string train_label_path;
  std::string test_path;
  std::string test_label_path;
  int synth_channels = 5;
  int synth_train_length = 5000;
  int synth_test_length = 5000;
  double synth_train_ratio = 0.0;
  std::string synth_kinds = "spike,level_shift";

  double anomaly_ratio = 0.05;
  int window_size = 100;

  // Diffusion.
  int diffusion_steps = 500;
  double beta1 = 1e-4;
  double betaT = 0.02;
  int t_infer = 50;
  std::string sigma = "beta_tilde";  // or "beta"

  // Denoiser architecture and training.
  int d_model = 64;
  int heads = 4;
  int layers = 2;
  int ffn = 128;
  double lr = 1e-4;
  int batch = 256;
  int max_epochs = 10;
  int patience = 3;
  int samples_per_window = 8;

  // Autoencoder.
  int ae_epochs = 5;
  double ae_lr = 1e-3;

  // Neighbor mask.
  int mask_cap = 5;
  double pearson_threshold = 0.6;

  RunMode mode = RunMode::kFull;
  std::uint64_t seed = 1;

  // Ablation / sweep orchestration.
  int ablation_seeds = 3;
  std::string sweeps;  // comma subset of {window, rho, steps}

  bool synthetic_data() const { return train_path.empty() && test_path.empty(); }
  std::vector<AnomalyKind> kinds() const;
  std::vector<std::string> sweep_list() const;
  void validate() const;  // throws ConfigError
};

// Parses `key = value` lines; '#' starts a comment; unknown keys are
// rejected. Environment overrides (DDMT_<KEY>) are applied afterwards when
// requested.
RunConfig parse_config_text(const std::string& text, bool apply_env);
RunConfig parse_config_file(const std::string& path, bool apply_env);

// Key = value echo covering every field, in a fixed order. `prefix` is
// prepended to each line (e.g. "# " for CSV headers).
void echo_config(const RunConfig& cfg, std::ostream& out, const std::string& prefix = "");

}  // namespace ddmt
