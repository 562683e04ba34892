#include "nem/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace nem {

namespace {

namespace pt = boost::property_tree;

struct KeySpec {
  const char* section;
  const char* key;
};

constexpr std::array kKnownKeys = {
    KeySpec{"model", "weights"},         KeySpec{"model", "means"},
    KeySpec{"model", "variances"},       KeySpec{"noise", "mode"},
    KeySpec{"noise", "policy"},          KeySpec{"noise", "sigma_n"},
    KeySpec{"noise", "tau"},             KeySpec{"run", "tol_exponent"},
    KeySpec{"run", "max_iterations"},    KeySpec{"run", "init"},
    KeySpec{"run", "seed"},              KeySpec{"sweep", "sample_size"},
    KeySpec{"sweep", "trials_per_point"}, KeySpec{"sweep", "sigma_grid"},
    KeySpec{"sweep", "base_seed"},       KeySpec{"sweep", "fixed_dataset"},
    KeySpec{"compare", "mode"},          KeySpec{"compare", "policy"},
    KeySpec{"compare", "tau"},           KeySpec{"compare", "sigma_grid"},
    KeySpec{"compare", "num_resamples"}, KeySpec{"compare", "level"},
    KeySpec{"compare", "bootstrap_seed"}, KeySpec{"diag", "weights"},
    KeySpec{"diag", "means"},            KeySpec{"diag", "variances"},
    KeySpec{"diag", "iteration"},        KeySpec{"diag", "num_draws"},
    KeySpec{"diag", "q_draws"},          KeySpec{"diag", "conditioning"},
    KeySpec{"diag", "seed"},
};

constexpr const char* kFig1 = R"(; Two-Gaussian benchmark with multiplicative NEM noise.
[model]
weights = 0.5, 0.5
means = -2, 2
variances = 4, 4

[noise]
mode = multiplicative
policy = nem
sigma_n = 0.44
tau = 2

[run]
tol_exponent = 2
max_iterations = 500
init = fixed
seed = 1

[sweep]
sample_size = 200
trials_per_point = 500
sigma_grid = 0:1.05:0.05
base_seed = 1
fixed_dataset = false

[compare]
mode = additive
policy = nem
tau = 2
sigma_grid = 0:2.1:0.1
num_resamples = 10000
level = 0.95
bootstrap_seed = 1

[diag]
means = -1.2, 1.2
variances = 8, 8
iteration = 1
num_draws = 100000
q_draws = 10000
conditioning = optimal
seed = 1
)";

constexpr const char* kFig2 = R"(; Two-Gaussian benchmark with additive NEM noise.
[model]
weights = 0.5, 0.5
means = -2, 2
variances = 4, 4

[noise]
mode = additive
policy = nem
sigma_n = 1.9
tau = 2

[run]
tol_exponent = 2
max_iterations = 500
init = fixed
seed = 1

[sweep]
sample_size = 200
trials_per_point = 500
sigma_grid = 0:2.1:0.1
base_seed = 1
fixed_dataset = false

[compare]
mode = multiplicative
policy = nem
tau = 2
sigma_grid = 0:1.05:0.05
num_resamples = 10000
level = 0.95
bootstrap_seed = 1

[diag]
means = -1.2, 1.2
variances = 8, 8
iteration = 1
num_draws = 100000
q_draws = 10000
conditioning = optimal
seed = 1
)";

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string env_name(const std::string& section, const std::string& key) {
  std::string name = std::string(kEnvPrefix) + section + "_" + key;
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return name;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

template <class Int>
Int to_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list");
  return out;
}

template <class Fn>
auto wrap(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

// Resolved key/value view: file contents overlaid with environment values.
class Settings {
 public:
  Settings(const std::string& text, const EnvLookup& env) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError("", "malformed config at line " + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty())
        throw ConfigError(section, "key outside of any section");
      for (const auto& [key, value] : body) {
        const bool known = std::any_of(kKnownKeys.begin(), kKnownKeys.end(), [&](const KeySpec& k) {
          return section == k.section && key == k.key;
        });
        if (!known) throw ConfigError(section + "." + key, "unknown key");
        // The INI reader keeps trailing comments in the value.
        std::string v = value.data();
        if (const auto semi = v.find(';'); semi != std::string::npos) v = trim(v.substr(0, semi));
        values_[section + "." + key] = v;
      }
    }
    if (env) {
      for (const auto& k : kKnownKeys)
        if (auto v = env(env_name(k.section, k.key))) values_[std::string(k.section) + "." + k.key] = *v;
    }
  }

  std::optional<std::string> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return buf.data();
}

std::vector<double> parse_grid(const std::string& text) {
  const std::string t = trim(text);
  if (std::count(t.begin(), t.end(), ':') == 2) {
    const auto a = t.find(':');
    const auto b = t.find(':', a + 1);
    const double start = to_double("sigma_grid", t.substr(0, a));
    const double stop = to_double("sigma_grid", t.substr(a + 1, b - a - 1));
    const double step = to_double("sigma_grid", t.substr(b + 1));
    if (!(step > 0.0) || stop < start) throw ConfigError("sigma_grid", "range needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
      out[i] = std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9;
    return out;
  }
  return to_list("sigma_grid", t);
}

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

std::vector<std::string> preset_names() { return {"fig1", "fig2"}; }

std::optional<std::string> preset_text(const std::string& name) {
  if (name == "fig1") return std::string(kFig1);
  if (name == "fig2") return std::string(kFig2);
  return std::nullopt;
}

ExperimentConfig parse_config(const std::string& text, const EnvLookup& env) {
  const Settings s(text, env);
  ExperimentConfig c;

  auto num = [&](const char* key, double& out) {
    if (auto v = s.get(key)) out = to_double(key, *v);
  };
  auto list = [&](const char* key, std::vector<double>& out) {
    if (auto v = s.get(key)) out = to_list(key, *v);
  };
  auto grid = [&](const char* key, std::vector<double>& out) {
    if (auto v = s.get(key)) out = wrap(key, [&] { return parse_grid(*v); });
  };
  auto count = [&](const char* key, std::size_t& out) {
    if (auto v = s.get(key)) out = to_int<std::size_t>(key, *v);
  };
  auto integer = [&](const char* key, int& out) {
    if (auto v = s.get(key)) out = to_int<int>(key, *v);
  };
  auto seed = [&](const char* key, std::uint64_t& out) {
    if (auto v = s.get(key)) out = to_int<std::uint64_t>(key, *v);
  };
  auto text_of = [&](const char* key, auto parser, auto& out) {
    if (auto v = s.get(key)) out = wrap(key, [&] { return parser(trim(*v)); });
  };

  list("model.weights", c.model.weights);
  list("model.means", c.model.means);
  list("model.variances", c.model.variances);

  text_of("noise.mode", parse_injection_mode, c.noise.mode);
  text_of("noise.policy", parse_noise_policy, c.noise.policy);
  num("noise.sigma_n", c.noise.sigma_n);
  num("noise.tau", c.noise.tau);

  integer("run.tol_exponent", c.run.tol_exponent);
  integer("run.max_iterations", c.run.max_iterations);
  text_of("run.init", parse_init_strategy, c.run.init);
  seed("run.seed", c.run.seed);

  count("sweep.sample_size", c.sample_size);
  count("sweep.trials_per_point", c.trials_per_point);
  grid("sweep.sigma_grid", c.sigma_grid);
  seed("sweep.base_seed", c.base_seed);
  if (auto v = s.get("sweep.fixed_dataset")) c.fixed_dataset = to_bool("sweep.fixed_dataset", *v);

  c.compare.noise.tau = c.noise.tau;
  text_of("compare.mode", parse_injection_mode, c.compare.noise.mode);
  text_of("compare.policy", parse_noise_policy, c.compare.noise.policy);
  num("compare.tau", c.compare.noise.tau);
  grid("compare.sigma_grid", c.compare.sigma_grid);
  count("compare.num_resamples", c.compare.num_resamples);
  num("compare.level", c.compare.level);
  seed("compare.bootstrap_seed", c.compare.bootstrap_seed);

  c.diag.current = c.model;
  list("diag.weights", c.diag.current.weights);
  list("diag.means", c.diag.current.means);
  list("diag.variances", c.diag.current.variances);
  // A diag iterate that lists means only keeps uniform weights.
  if (c.diag.current.weights.size() != c.diag.current.means.size() && !s.get("diag.weights"))
    c.diag.current.weights.assign(c.diag.current.means.size(), 1.0 / static_cast<double>(c.diag.current.means.size()));
  integer("diag.iteration", c.diag.iteration);
  count("diag.num_draws", c.diag.num_draws);
  count("diag.q_draws", c.diag.q_draws);
  text_of("diag.conditioning", parse_conditioning, c.diag.conditioning);
  seed("diag.seed", c.diag.seed);

  auto default_grid = [](InjectionMode m) {
    return m == InjectionMode::Additive ? default_additive_grid() : default_multiplicative_grid();
  };
  if (c.sigma_grid.empty()) c.sigma_grid = default_grid(c.noise.mode);
  if (c.compare.sigma_grid.empty()) c.compare.sigma_grid = default_grid(c.compare.noise.mode);

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path_or_preset, const EnvLookup& env) {
  std::ifstream in(path_or_preset);
  if (in) {
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), env);
  }
  if (auto text = preset_text(path_or_preset)) return parse_config(*text, env);
  throw ConfigError("", "cannot read config '" + path_or_preset + "'");
}

void ExperimentConfig::validate() const {
  wrap("model", [&] { model.validate(); });
  wrap("noise", [&] { noise.validate(); });
  wrap("run", [&] { run.validate(); });
  wrap("sweep", [&] { sweep_config().validate(); });
  wrap("compare", [&] {
    compare.noise.validate();
    compare_config().validate();
  });
  if (compare.num_resamples < 1) throw ConfigError("compare.num_resamples", "must be >= 1");
  if (!(compare.level > 0.0 && compare.level < 1.0)) throw ConfigError("compare.level", "must lie in (0, 1)");
  wrap("diag", [&] { diag.current.validate(); });
  if (diag.current.size() != model.size()) throw ConfigError("diag.means", "K differs from the model");
  if (diag.iteration < 1) throw ConfigError("diag.iteration", "must be >= 1");
  if (diag.num_draws < kMinDiagnosticDraws) throw ConfigError("diag.num_draws", "must be >= 100");
  if (diag.q_draws < 1) throw ConfigError("diag.q_draws", "must be >= 1");
}

SweepConfig ExperimentConfig::sweep_config() const {
  SweepConfig s;
  s.model = model;
  s.sample_size = sample_size;
  s.trials_per_point = trials_per_point;
  s.sigma_grid = sigma_grid;
  s.noise = noise;
  s.run = run;
  s.base_seed = base_seed;
  s.fixed_dataset = fixed_dataset;
  return s;
}

SweepConfig ExperimentConfig::compare_config() const {
  SweepConfig s = sweep_config();
  s.noise = compare.noise;
  s.sigma_grid = compare.sigma_grid;
  return s;
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[model]\n"
      << "weights = " << join(c.model.weights) << "\n"
      << "means = " << join(c.model.means) << "\n"
      << "variances = " << join(c.model.variances) << "\n\n"
      << "[noise]\n"
      << "mode = " << to_string(c.noise.mode) << "\n"
      << "policy = " << to_string(c.noise.policy) << "\n"
      << "sigma_n = " << format_double(c.noise.sigma_n) << "\n"
      << "tau = " << format_double(c.noise.tau) << "\n\n"
      << "[run]\n"
      << "tol_exponent = " << c.run.tol_exponent << "\n"
      << "max_iterations = " << c.run.max_iterations << "\n"
      << "init = " << to_string(c.run.init) << "\n"
      << "seed = " << c.run.seed << "\n\n"
      << "[sweep]\n"
      << "sample_size = " << c.sample_size << "\n"
      << "trials_per_point = " << c.trials_per_point << "\n"
      << "sigma_grid = " << join(c.sigma_grid) << "\n"
      << "base_seed = " << c.base_seed << "\n"
      << "fixed_dataset = " << (c.fixed_dataset ? "true" : "false") << "\n\n"
      << "[compare]\n"
      << "mode = " << to_string(c.compare.noise.mode) << "\n"
      << "policy = " << to_string(c.compare.noise.policy) << "\n"
      << "tau = " << format_double(c.compare.noise.tau) << "\n"
      << "sigma_grid = " << join(c.compare.sigma_grid) << "\n"
      << "num_resamples = " << c.compare.num_resamples << "\n"
      << "level = " << format_double(c.compare.level) << "\n"
      << "bootstrap_seed = " << c.compare.bootstrap_seed << "\n\n"
      << "[diag]\n"
      << "weights = " << join(c.diag.current.weights) << "\n"
      << "means = " << join(c.diag.current.means) << "\n"
      << "variances = " << join(c.diag.current.variances) << "\n"
      << "iteration = " << c.diag.iteration << "\n"
      << "num_draws = " << c.diag.num_draws << "\n"
      << "q_draws = " << c.diag.q_draws << "\n"
      << "conditioning = " << to_string(c.diag.conditioning) << "\n"
      << "seed = " << c.diag.seed << "\n";
  return out.str();
}

}  // namespace nem
