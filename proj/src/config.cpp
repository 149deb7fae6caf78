#include "ddmt/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "ddmt/util.hpp"

namespace ddmt {

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::kFull: return "full";
    case RunMode::kNoAdnm: return "no_adnm";
    case RunMode::kNoDdt: return "no_ddt";
    case RunMode::kTransformer: return "transformer";
  }
  return "?";
}

RunMode run_mode_from_string(const std::string& s) {
  if (s == "full") return RunMode::kFull;
  if (s == "no_adnm") return RunMode::kNoAdnm;
  if (s == "no_ddt") return RunMode::kNoDdt;
  if (s == "transformer") return RunMode::kTransformer;
  throw ConfigError("unknown mode: " + s);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  }
}

double parse_real(const std::string& key, const std::string& v) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(x)) {
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  }
  return x;
}

std::uint64_t parse_seed(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<std::uint64_t>(x);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a valid seed: '" + v + "'");
  }
}

#define STR_KEY(field)                                                  \
  {#field, [](RunConfig& c, const std::string& v) { c.field = v; },     \
   [](const RunConfig& c) { return c.field; }}
#define INT_KEY(field)                                                               \
  {#field, [](RunConfig& c, const std::string& v) { c.field = parse_int(#field, v); }, \
   [](const RunConfig& c) { return std::to_string(c.field); }}
#define REAL_KEY(field)                                                               \
  {#field, [](RunConfig& c, const std::string& v) { c.field = parse_real(#field, v); }, \
   [](const RunConfig& c) { return fmt_double(c.field); }}

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      STR_KEY(train_path),
      STR_KEY(train_label_path),
      STR_KEY(test_path),
      STR_KEY(test_label_path),
      INT_KEY(synth_channels),
      INT_KEY(synth_train_length),
      INT_KEY(synth_test_length),
      REAL_KEY(synth_train_ratio),
      STR_KEY(synth_kinds),
      REAL_KEY(anomaly_ratio),
      INT_KEY(window_size),
      INT_KEY(diffusion_steps),
      REAL_KEY(beta1),
      REAL_KEY(betaT),
      INT_KEY(t_infer),
      STR_KEY(sigma),
      INT_KEY(d_model),
      INT_KEY(heads),
      INT_KEY(layers),
      INT_KEY(ffn),
      REAL_KEY(lr),
      INT_KEY(batch),
      INT_KEY(max_epochs),
      INT_KEY(patience),
      INT_KEY(samples_per_window),
      INT_KEY(ae_epochs),
      REAL_KEY(ae_lr),
      INT_KEY(mask_cap),
      REAL_KEY(pearson_threshold),
      {"mode",
       [](RunConfig& c, const std::string& v) { c.mode = run_mode_from_string(v); },
       [](const RunConfig& c) { return to_string(c.mode); }},
      {"seed",
       [](RunConfig& c, const std::string& v) { c.seed = parse_seed("seed", v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      INT_KEY(ablation_seeds),
      STR_KEY(sweeps),
  };
  return keys;
}

#undef STR_KEY
#undef INT_KEY
#undef REAL_KEY

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const Key& k : key_table()) {
    if (key == k.name) {
      k.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key: " + key);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      const std::string t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  const std::string t = trim(cur);
  if (!t.empty()) out.push_back(t);
  return out;
}

void apply_env_overrides(RunConfig& cfg) {
  for (const Key& k : key_table()) {
    std::string env_name = "DDMT_";
    for (const char* p = k.name; *p; ++p) {
      env_name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(*p))));
    }
    if (const char* v = std::getenv(env_name.c_str())) {
      k.set(cfg, v);
    }
  }
}

}  // namespace

std::vector<AnomalyKind> RunConfig::kinds() const {
  std::vector<AnomalyKind> out;
  for (const std::string& name : split_list(synth_kinds)) {
    try {
      out.push_back(anomaly_kind_from_string(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("key 'synth_kinds': ") + e.what());
    }
  }
  return out;
}

std::vector<std::string> RunConfig::sweep_list() const {
  auto list = split_list(sweeps);
  for (const std::string& s : list) {
    if (s != "window" && s != "rho" && s != "steps") {
      throw ConfigError("key 'sweeps': unknown sweep '" + s + "'");
    }
  }
  return list;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(anomaly_ratio >= 0.0 && anomaly_ratio < 1.0)) fail("key 'anomaly_ratio': must be in [0, 1)");
  if (!(synth_train_ratio >= 0.0 && synth_train_ratio < 1.0)) {
    fail("key 'synth_train_ratio': must be in [0, 1)");
  }
  if (synth_channels < 1) fail("key 'synth_channels': must be positive");
  if (window_size < 2) fail("key 'window_size': must be at least 2");
  if (diffusion_steps < 2) fail("key 'diffusion_steps': must be at least 2");
  if (!(beta1 > 0.0 && beta1 < betaT && betaT < 1.0)) {
    fail("keys 'beta1'/'betaT': require 0 < beta1 < betaT < 1");
  }
  if (t_infer < 0 || t_infer > diffusion_steps) {
    fail("key 't_infer': must be in [0, diffusion_steps]");
  }
  if (sigma != "beta_tilde" && sigma != "beta") fail("key 'sigma': must be beta_tilde or beta");
  if (d_model < 2 || d_model % 2 != 0) fail("key 'd_model': must be even and >= 2");
  if (heads < 1 || d_model % heads != 0) fail("key 'heads': must divide d_model");
  if (layers < 1) fail("key 'layers': must be positive");
  if (ffn < 1) fail("key 'ffn': must be positive");
  if (!(lr > 0.0)) fail("key 'lr': must be positive");
  if (batch < 1) fail("key 'batch': must be positive");
  if (max_epochs < 1) fail("key 'max_epochs': must be positive");
  if (patience < 1) fail("key 'patience': must be positive");
  if (samples_per_window < 1) fail("key 'samples_per_window': must be positive");
  if (ae_epochs < 0) fail("key 'ae_epochs': must be non-negative");
  if (!(ae_lr > 0.0)) fail("key 'ae_lr': must be positive");
  if (mask_cap < 0) fail("key 'mask_cap': must be non-negative");
  if (!(pearson_threshold > 0.0 && pearson_threshold < 1.0)) {
    fail("key 'pearson_threshold': must be in (0, 1)");
  }
  if (ablation_seeds < 1) fail("key 'ablation_seeds': must be positive");
  kinds();
  sweep_list();
}

RunConfig parse_config_text(const std::string& text, bool apply_env) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (apply_env) apply_env_overrides(cfg);
  cfg.validate();
  return cfg;
}

RunConfig parse_config_file(const std::string& path, bool apply_env) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), apply_env);
}

void echo_config(const RunConfig& cfg, std::ostream& out, const std::string& prefix) {
  for (const Key& k : key_table()) {
    out << prefix << k.name << " = " << k.get(cfg) << "\n";
  }
}

}  // namespace ddmt
