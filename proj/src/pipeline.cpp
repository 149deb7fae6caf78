#include "ddmt/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "ddmt/diffusion.hpp"
#include "ddmt/rng.hpp"
#include "ddmt/stats.hpp"
#include "ddmt/synthetic.hpp"
#include "ddmt/util.hpp"

namespace ddmt {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

MultivariateSeries load_series_or_data_error(const std::string& path,
                                             const std::string& label_path) {
  try {
    return load_series(path, label_path);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

DenoiserTrainConfig denoiser_config(const RunConfig& cfg, int channels) {
  DenoiserTrainConfig d;
  d.arch.channels = channels;
  d.arch.d_model = cfg.d_model;
  d.arch.heads = cfg.heads;
  d.arch.layers = cfg.layers;
  d.arch.ffn = cfg.ffn;
  d.lr = cfg.lr;
  d.batch = cfg.batch;
  d.max_epochs = cfg.max_epochs;
  d.patience = cfg.patience;
  d.samples_per_window = cfg.samples_per_window;
  return d;
}

std::vector<MaskMatrix> masks_for_windows(const WindowBatch& wins, const AEParams& ae,
                                          const RunConfig& cfg) {
  std::vector<MaskMatrix> masks;
  masks.reserve(wins.windows.size());
  for (const Tensor& win : wins.windows) {
    masks.push_back(build_mask(reconstruction_error(ae, win), win, cfg.anomaly_ratio,
                               cfg.pearson_threshold, cfg.mask_cap));
  }
  return masks;
}

void log_line(std::ostream* log, const std::string& line) {
  if (log) *log << line << "\n";
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

Datasets load_datasets(const RunConfig& cfg) {
  Datasets ds;
  if (cfg.synthetic_data()) {
    Rng rng(cfg.seed);
    const std::uint64_t train_seed = rng.fork();
    const std::uint64_t test_seed = rng.fork();
    try {
      ds.train = generate_synthetic(cfg.synth_channels, cfg.synth_train_length,
                                    cfg.synth_train_ratio, cfg.kinds(), train_seed);
      ds.test = generate_synthetic(cfg.synth_channels, cfg.synth_test_length, cfg.anomaly_ratio,
                                   cfg.kinds(), test_seed);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("synthetic data: ") + e.what());
    }
    return ds;
  }
  if (cfg.train_path.empty() || cfg.test_path.empty()) {
    throw DataError("both train_path and test_path are required with file-based data");
  }
  ds.train = load_series_or_data_error(cfg.train_path, cfg.train_label_path);
  ds.test = load_series_or_data_error(cfg.test_path, cfg.test_label_path);
  return ds;
}

ModelBundle pipeline_train(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  Datasets ds = load_datasets(cfg);

  ModelBundle bundle;
  bundle.config = cfg;
  bundle.normalizer = fit_normalizer(ds.train);
  bundle.normalizer.apply(ds.train);

  WindowBatch wins = slice_windows(ds.train, cfg.window_size, SliceMode::kTrain);
  log_line(log, "[train] mode " + to_string(cfg.mode) + ": " + std::to_string(wins.windows.size()) +
                    " training windows of " + std::to_string(cfg.window_size) + " x " +
                    std::to_string(wins.channels));

  // Sub-seeds are forked up front so every mode sees the same stream layout.
  Rng seeder(cfg.seed);
  const std::uint64_t ae_seed = seeder.fork();
  const std::uint64_t net_seed = seeder.fork();

  if (cfg.mode == RunMode::kFull || cfg.mode == RunMode::kNoDdt) {
    AETrainOptions aopt;
    aopt.epochs = cfg.ae_epochs;
    aopt.lr = cfg.ae_lr;
    bundle.ae = train_autoencoder(wins, aopt, ae_seed);
    bundle.has_ae = true;
    log_line(log, "[train] autoencoder mse " + fmt_double(ae_dataset_mse(bundle.ae, wins)));
  }

  if (cfg.mode == RunMode::kFull || cfg.mode == RunMode::kNoAdnm ||
      cfg.mode == RunMode::kTransformer) {
    const DenoiserTrainConfig dcfg = denoiser_config(cfg, wins.channels);
    DenoiserTrainResult res;
    if (cfg.mode == RunMode::kTransformer) {
      res = train_reconstructor(wins, dcfg, net_seed);
    } else {
      std::vector<MaskMatrix> masks =
          cfg.mode == RunMode::kFull
              ? masks_for_windows(wins, bundle.ae, cfg)
              : std::vector<MaskMatrix>(wins.windows.size(),
                                        MaskMatrix::all_visible(cfg.window_size));
      const NoiseSchedule sched = bundle.schedule();
      res = train_denoiser(wins, masks, sched, dcfg, net_seed);
    }
    bundle.denoiser_params = std::move(res.params);
    bundle.has_denoiser = true;
    log_line(log, "[train] initial loss " + fmt_double(res.initial_loss));
    for (std::size_t e = 0; e < res.train_loss.size(); ++e) {
      log_line(log, "[train] epoch " + std::to_string(e + 1) + ": train " +
                        fmt_double(res.train_loss[e]) + ", val " + fmt_double(res.val_loss[e]));
    }
    log_line(log, "[train] best epoch " + std::to_string(res.best_epoch));
  }
  return bundle;
}

DetectionReport pipeline_detect(const RunConfig& cfg, const ModelBundle& bundle,
                                std::ostream* log) {
  cfg.validate();
  if (cfg.mode != bundle.config.mode) {
    throw BundleModeError("bundle was trained with mode '" + to_string(bundle.config.mode) +
                          "' but mode '" + to_string(cfg.mode) + "' was requested");
  }
  if (!(cfg.anomaly_ratio > 0.0)) {
    throw ConfigError("key 'anomaly_ratio': must be positive for detection");
  }

  Datasets ds = load_datasets(cfg);
  if (!ds.test.has_labels()) {
    throw DataError("test labels are required for evaluation");
  }
  bundle.normalizer.apply(ds.test);
  const WindowBatch wins = slice_windows(ds.test, cfg.window_size, SliceMode::kInfer);
  const int n_windows = static_cast<int>(wins.windows.size());

  DetectionReport report;
  report.labels = ds.test.labels;

  // Per-window chain seeds, derived in index order.
  Rng seeder(bundle.config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::uint64_t> window_seeds;
  window_seeds.reserve(n_windows);
  for (int w = 0; w < n_windows; ++w) window_seeds.push_back(seeder.fork());

  std::vector<std::vector<double>> per_window(n_windows);
  auto t0 = Clock::now();

  switch (cfg.mode) {
    case RunMode::kFull:
    case RunMode::kNoAdnm: {
      if (!bundle.has_denoiser) throw std::runtime_error("bundle has no denoiser section");
      if (cfg.mode == RunMode::kFull && !bundle.has_ae) {
        throw std::runtime_error("bundle has no autoencoder section");
      }
      std::vector<MaskMatrix> masks;
      masks.reserve(n_windows);
      for (const Tensor& win : wins.windows) {
        masks.push_back(cfg.mode == RunMode::kFull
                            ? build_mask(reconstruction_error(bundle.ae, win), win,
                                         cfg.anomaly_ratio, cfg.pearson_threshold, cfg.mask_cap)
                            : MaskMatrix::all_visible(cfg.window_size));
      }
      report.timings_sec["mask_build"] = seconds_since(t0);

      const NoiseSchedule sched = bundle.schedule();
      const Denoiser net(bundle.denoiser_hyper(), bundle.denoiser_params, &sched);
      t0 = Clock::now();
      for (int w = 0; w < n_windows; ++w) {
        const Tensor rec =
            reconstruct(sched, net, wins.windows[w], masks[w], cfg.t_infer, window_seeds[w]);
        per_window[w] = anomaly_score(wins.windows[w], rec);
      }
      report.timings_sec["reconstruct"] = seconds_since(t0);
      break;
    }
    case RunMode::kNoDdt: {
      if (!bundle.has_ae) throw std::runtime_error("bundle has no autoencoder section");
      for (int w = 0; w < n_windows; ++w) {
        per_window[w] = reconstruction_error(bundle.ae, wins.windows[w]);
      }
      report.timings_sec["reconstruct"] = seconds_since(t0);
      break;
    }
    case RunMode::kTransformer: {
      if (!bundle.has_denoiser) throw std::runtime_error("bundle has no denoiser section");
      const Denoiser net(bundle.denoiser_hyper(), bundle.denoiser_params);
      const MaskMatrix none = MaskMatrix::all_visible(cfg.window_size);
      for (int w = 0; w < n_windows; ++w) {
        const Tensor rec = net.forward(wins.windows[w], 0, none);
        per_window[w] = anomaly_score(wins.windows[w], rec);
      }
      report.timings_sec["reconstruct"] = seconds_since(t0);
      break;
    }
  }

  t0 = Clock::now();
  report.scores = assemble_scores(ds.test.length, cfg.window_size, wins.offsets, per_window);
  report.threshold = select_threshold(report.scores, cfg.anomaly_ratio);
  report.raw_pred.resize(report.scores.size());
  for (std::size_t i = 0; i < report.scores.size(); ++i) {
    report.raw_pred[i] = report.scores[i] > report.threshold ? 1 : 0;
  }
  report.adjusted_pred = point_adjust(report.raw_pred, report.labels);
  report.counts = count_confusion(report.adjusted_pred, report.labels);
  report.metrics = prf1_from_counts(report.counts);
  report.timings_sec["score_eval"] = seconds_since(t0);

  log_line(log, "[detect] threshold " + fmt_double(report.threshold) + ", precision " +
                    fmt_double(report.metrics.precision) + ", recall " +
                    fmt_double(report.metrics.recall) + ", f1 " + fmt_double(report.metrics.f1));
  return report;
}

void write_detection_report(const DetectionReport& report, const RunConfig& cfg,
                            const std::string& out_dir) {
  fs::create_directories(out_dir);

  {
    auto out = open_out(fs::path(out_dir) / "report.csv");
    echo_config(cfg, out, "# ");
    out << "timestamp,score,raw_pred,adjusted_pred,label\n";
    for (std::size_t t = 0; t < report.scores.size(); ++t) {
      out << t << ',' << fmt_double(report.scores[t]) << ',' << report.raw_pred[t] << ','
          << report.adjusted_pred[t] << ',' << report.labels[t] << "\n";
    }
  }

  {
    auto out = open_out(fs::path(out_dir) / "summary.txt");
    out << "threshold = " << fmt_double(report.threshold) << "\n";
    out << "precision = " << fmt_double(report.metrics.precision) << "\n";
    out << "recall = " << fmt_double(report.metrics.recall) << "\n";
    out << "f1 = " << fmt_double(report.metrics.f1) << "\n";
    out << "tp = " << report.counts.tp << "\n";
    out << "fp = " << report.counts.fp << "\n";
    out << "fn = " << report.counts.fn << "\n";
    out << "tn = " << report.counts.tn << "\n";
    out << "[config]\n";
    echo_config(cfg, out);
  }

  {
    // Wall-clock timings are machine-dependent and live apart from the
    // byte-reproducible artifacts.
    auto out = open_out(fs::path(out_dir) / "timings.txt");
    for (const auto& [phase, sec] : report.timings_sec) {
      out << phase << " = " << fmt_double(sec) << "\n";
    }
  }
}

int pipeline_ablate(const RunConfig& cfg, const std::string& out_dir, std::ostream* log,
                    AblationOutcome* outcome) {
  cfg.validate();
  fs::create_directories(out_dir);
  AblationOutcome local;
  AblationOutcome& result = outcome ? *outcome : local;

  const RunMode modes[] = {RunMode::kFull, RunMode::kNoAdnm, RunMode::kNoDdt,
                           RunMode::kTransformer};

  for (RunMode mode : modes) {
    for (int s = 0; s < cfg.ablation_seeds; ++s) {
      AblationRow row;
      row.mode = to_string(mode);
      row.seed = cfg.seed + static_cast<std::uint64_t>(s);
      RunConfig variant = cfg;
      variant.mode = mode;
      variant.seed = row.seed;
      try {
        auto t0 = Clock::now();
        const ModelBundle bundle = pipeline_train(variant, nullptr);
        row.train_sec = seconds_since(t0);
        t0 = Clock::now();
        const DetectionReport rep = pipeline_detect(variant, bundle, nullptr);
        row.detect_sec = seconds_since(t0);
        row.metrics = rep.metrics;
        row.ok = true;
        log_line(log, "[ablate] " + row.mode + " seed " + std::to_string(row.seed) + ": f1 " +
                          fmt_double(row.metrics.f1));
      } catch (const std::exception& e) {
        row.error = e.what();
        log_line(log, "[ablate] " + row.mode + " seed " + std::to_string(row.seed) +
                          " failed: " + row.error);
      }
      result.rows.push_back(std::move(row));
    }
  }

  {
    auto out = open_out(fs::path(out_dir) / "ablation_f1.csv");
    echo_config(cfg, out, "# ");
    out << "mode,seed,precision,recall,f1,train_sec,detect_sec,status\n";
    for (const AblationRow& r : result.rows) {
      out << r.mode << ',' << r.seed << ',' << fmt_double(r.metrics.precision) << ','
          << fmt_double(r.metrics.recall) << ',' << fmt_double(r.metrics.f1) << ','
          << fmt_double(r.train_sec) << ',' << fmt_double(r.detect_sec) << ','
          << (r.ok ? "ok" : "error: " + r.error) << "\n";
    }
  }

  {
    // Pairwise Welch t-test matrix over the per-seed F1 samples.
    auto out = open_out(fs::path(out_dir) / "ttest_pvalues.csv");
    echo_config(cfg, out, "# ");
    out << "mode_a,mode_b,t_stat,p_value\n";
    auto f1_sample = [&](RunMode m) {
      std::vector<double> v;
      for (const AblationRow& r : result.rows) {
        if (r.ok && r.mode == to_string(m)) v.push_back(r.metrics.f1);
      }
      return v;
    };
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i + 1; j < 4; ++j) {
        const auto a = f1_sample(modes[i]);
        const auto b = f1_sample(modes[j]);
        out << to_string(modes[i]) << ',' << to_string(modes[j]) << ',';
        if (a.size() >= 2 && b.size() >= 2) {
          const WelchResult w = welch_t_test(a, b);
          out << fmt_double(w.t) << ',' << fmt_double(w.p) << "\n";
        } else {
          out << "n/a,n/a\n";
        }
      }
    }
  }

  for (const std::string& sweep : cfg.sweep_list()) {
    std::vector<double> values;
    if (sweep == "window") values = {25, 50, 100};
    if (sweep == "rho") values = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    if (sweep == "steps") values = {50, 100, 250, 500};

    std::vector<SweepRow> rows;
    for (double value : values) {
      SweepRow row;
      row.value = value;
      RunConfig variant = cfg;
      if (sweep == "window") variant.window_size = static_cast<int>(value);
      if (sweep == "rho") variant.pearson_threshold = value;
      if (sweep == "steps") {
        variant.diffusion_steps = static_cast<int>(value);
        // Scale the noising depth with the chain length.
        variant.t_infer = std::max(1, static_cast<int>(value) / 4);
      }
      try {
        const ModelBundle bundle = pipeline_train(variant, nullptr);
        auto t0 = Clock::now();
        const DetectionReport rep = pipeline_detect(variant, bundle, nullptr);
        row.detect_sec = seconds_since(t0);
        row.metrics = rep.metrics;
        row.ok = true;
        log_line(log, "[sweep " + sweep + "] " + fmt_double(value) + ": f1 " +
                          fmt_double(row.metrics.f1) + " (" + fmt_double(row.detect_sec) + " s)");
      } catch (const std::exception& e) {
        row.error = e.what();
        log_line(log, "[sweep " + sweep + "] " + fmt_double(value) + " failed: " + row.error);
      }
      rows.push_back(std::move(row));
    }

    auto out = open_out(fs::path(out_dir) / ("sweep_" + sweep + ".csv"));
    echo_config(cfg, out, "# ");
    out << "setting,value,precision,recall,f1,detect_sec,status\n";
    for (const SweepRow& r : rows) {
      out << sweep << ',' << fmt_double(r.value) << ',' << fmt_double(r.metrics.precision) << ','
          << fmt_double(r.metrics.recall) << ',' << fmt_double(r.metrics.f1) << ','
          << fmt_double(r.detect_sec) << ',' << (r.ok ? "ok" : "error: " + r.error) << "\n";
    }
    result.sweeps.emplace_back(sweep, std::move(rows));
  }

  int ok_rows = 0;
  for (const AblationRow& r : result.rows) ok_rows += r.ok ? 1 : 0;
  return ok_rows > 0 ? 0 : 1;
}

}  // namespace ddmt
