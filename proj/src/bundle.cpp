#include "ddmt/bundle.hpp"

#include <fstream>
#include <sstream>

#include "ddmt/util.hpp"

namespace ddmt {

DenoiserHyper ModelBundle::denoiser_hyper() const {
  DenoiserHyper h;
  h.channels = static_cast<int>(normalizer.mean.size());
  h.d_model = config.d_model;
  h.heads = config.heads;
  h.layers = config.layers;
  h.ffn = config.ffn;
  return h;
}

NoiseSchedule ModelBundle::schedule() const {
  return build_schedule(config.diffusion_steps, config.beta1, config.betaT,
                        config.sigma == "beta" ? SigmaKind::kBeta : SigmaKind::kBetaTilde);
}

namespace {

void write_tensor(std::ostream& out, const std::string& name, const Tensor& t) {
  out << "tensor " << name << " " << t.rows << " " << t.cols << "\n";
  for (int i = 0; i < t.rows; ++i) {
    for (int j = 0; j < t.cols; ++j) {
      if (j) out << ' ';
      out << fmt_double(t.at(i, j));
    }
    out << "\n";
  }
}

struct Reader {
  std::istream& in;
  std::string path;
  int line_no = 0;
  std::string line = {};
  bool pushed = false;

  bool next() {
    if (pushed) {
      pushed = false;
      return true;
    }
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  void push_back() { pushed = true; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("bundle " + path + ":" + std::to_string(line_no) + ": " + msg);
  }
};

Tensor read_tensor(Reader& r, std::string* name_out) {
  std::istringstream head(r.line);
  std::string tag, name;
  int rows = 0, cols = 0;
  head >> tag >> name >> rows >> cols;
  if (tag != "tensor" || head.fail() || rows < 1 || cols < 1) r.fail("expected tensor header");
  Tensor t(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!r.next()) r.fail("unexpected end of tensor " + name);
    std::istringstream row(r.line);
    for (int j = 0; j < cols; ++j) {
      if (!(row >> t.at(i, j))) r.fail("bad value in tensor " + name);
    }
  }
  *name_out = name;
  return t;
}

NamedTensors read_tensor_section(Reader& r) {
  NamedTensors out;
  while (r.next()) {
    if (!r.line.empty() && r.line[0] == '[') {
      r.push_back();
      break;
    }
    std::string name;
    Tensor t = read_tensor(r, &name);
    out.emplace(std::move(name), std::move(t));
  }
  return out;
}

std::vector<double> tensor_to_vec(const Tensor& t) {
  return t.data;
}

}  // namespace

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write bundle: " + path);
  out << kBundleMagic << "\n";

  out << "[config]\n";
  echo_config(bundle.config, out);

  out << "[schedule]\n";
  out << "steps = " << bundle.config.diffusion_steps << "\n";
  out << "beta1 = " << fmt_double(bundle.config.beta1) << "\n";
  out << "betaT = " << fmt_double(bundle.config.betaT) << "\n";
  out << "sigma = " << bundle.config.sigma << "\n";

  out << "[normalizer]\n";
  const int C = static_cast<int>(bundle.normalizer.mean.size());
  write_tensor(out, "mean", Tensor(1, C, bundle.normalizer.mean));
  write_tensor(out, "stddev", Tensor(1, C, bundle.normalizer.stddev));

  if (bundle.has_ae) {
    out << "[autoencoder]\n";
    write_tensor(out, "enc_w", bundle.ae.enc_w);
    write_tensor(out, "enc_b", bundle.ae.enc_b);
    write_tensor(out, "dec_w", bundle.ae.dec_w);
    write_tensor(out, "dec_b", bundle.ae.dec_b);
  }

  if (bundle.has_denoiser) {
    out << "[denoiser]\n";
    for (const auto& [name, t] : bundle.denoiser_params) write_tensor(out, name, t);
  }

  out << "[end]\n";
}

ModelBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open bundle: " + path);
  Reader r{in, path};

  if (!r.next()) r.fail("empty file");
  if (r.line != kBundleMagic) {
    throw BundleModeError("unsupported bundle version: '" + r.line + "'");
  }

  ModelBundle bundle;
  bool saw_config = false, saw_normalizer = false, saw_end = false;

  while (r.next()) {
    if (r.line == "[config]") {
      std::string text;
      while (r.next()) {
        if (!r.line.empty() && r.line[0] == '[') {
          r.push_back();
          break;
        }
        text += r.line;
        text += "\n";
      }
      bundle.config = parse_config_text(text, /*apply_env=*/false);
      saw_config = true;
    } else if (r.line == "[schedule]") {
      // Redundant with the config echo; validated for consistency.
      while (r.next()) {
        if (!r.line.empty() && r.line[0] == '[') {
          r.push_back();
          break;
        }
        std::istringstream kv(r.line);
        std::string key, eq, value;
        kv >> key >> eq >> value;
        if (eq != "=") r.fail("expected key = value in schedule section");
        if (key == "steps" && std::stoi(value) != bundle.config.diffusion_steps) {
          r.fail("schedule steps disagree with config echo");
        }
      }
    } else if (r.line == "[normalizer]") {
      NamedTensors t = read_tensor_section(r);
      if (!t.count("mean") || !t.count("stddev")) r.fail("normalizer needs mean and stddev");
      bundle.normalizer.mean = tensor_to_vec(t.at("mean"));
      bundle.normalizer.stddev = tensor_to_vec(t.at("stddev"));
      saw_normalizer = true;
    } else if (r.line == "[autoencoder]") {
      NamedTensors t = read_tensor_section(r);
      for (const char* name : {"enc_w", "enc_b", "dec_w", "dec_b"}) {
        if (!t.count(name)) r.fail(std::string("autoencoder section missing ") + name);
      }
      bundle.ae.enc_w = t.at("enc_w");
      bundle.ae.enc_b = t.at("enc_b");
      bundle.ae.dec_w = t.at("dec_w");
      bundle.ae.dec_b = t.at("dec_b");
      bundle.ae.channels = bundle.ae.enc_w.rows;
      bundle.ae.hidden = bundle.ae.enc_w.cols;
      bundle.has_ae = true;
    } else if (r.line == "[denoiser]") {
      bundle.denoiser_params = read_tensor_section(r);
      bundle.has_denoiser = true;
    } else if (r.line == "[end]") {
      saw_end = true;
      break;
    } else {
      r.fail("unexpected line: '" + r.line + "'");
    }
  }

  if (!saw_config || !saw_normalizer || !saw_end) {
    throw std::runtime_error("bundle " + path + ": missing required sections");
  }
  return bundle;
}

}  // namespace ddmt
