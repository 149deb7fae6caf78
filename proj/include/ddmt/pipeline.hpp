#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ddmt/bundle.hpp"
#include "ddmt/config.hpp"
#include "ddmt/detect.hpp"
#include "ddmt/series.hpp"

namespace ddmt {

struct Datasets {
  MultivariateSeries train;
  MultivariateSeries test;
};

// Resolves the configured data source: CSV files when paths are set, the
// seeded synthetic benchmark otherwise.
Datasets load_datasets(const RunConfig& cfg);

// Ingest -> normalize -> window -> train autoencoder -> build masks ->
// train denoiser, with the mode deciding which stages run. Per-epoch losses
// go to `log` when given.
ModelBundle pipeline_train(const RunConfig& cfg, std::ostream* log = nullptr);

// Scores the test series with the bundle's model per the configured mode,
// thresholds at the anomaly-ratio quantile, point-adjusts, and evaluates.
DetectionReport pipeline_detect(const RunConfig& cfg, const ModelBundle& bundle,
                                std::ostream* log = nullptr);

// report.csv + summary.txt are deterministic; wall-clock timings go to the
// separate timings.txt.
void write_detection_report(const DetectionReport& report, const RunConfig& cfg,
                            const std::string& out_dir);

struct AblationRow {
  std::string mode;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Prf1 metrics;
  double train_sec = 0.0;
  double detect_sec = 0.0;
};

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  Prf1 metrics;
  double detect_sec = 0.0;
};

struct AblationOutcome {
  std::vector<AblationRow> rows;
  // sweep name -> rows, only for sweeps requested in the config
  std::vector<std::pair<std::string, std::vector<SweepRow>>> sweeps;
};

// Runs the four modes over shared seeds, emits the F1 table, the pairwise
// t-test matrix over per-seed F1 samples, and any configured sensitivity
// sweeps. Per-row failures are recorded; returns 0 when at least one row
// succeeded.
int pipeline_ablate(const RunConfig& cfg, const std::string& out_dir, std::ostream* log = nullptr,
                    AblationOutcome* outcome = nullptr);

}  // namespace ddmt
