#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nem/bench.hpp"
#include "nem/diagnostics.hpp"

namespace nem {

/// Raised for any problem with configuration input. `key` names the
/// offending `section.key` when there is one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct CompareSettings {
  /// Second arm of the comparison; the first arm is the main noise section.
  NoiseSpec noise{InjectionMode::Additive, NoisePolicy::NemConstrained, 0.0, 2.0};
  std::vector<double> sigma_grid;
  std::size_t num_resamples = 10000;
  double level = 0.95;
  std::uint64_t bootstrap_seed = 0;

  bool operator==(const CompareSettings&) const = default;
};

struct DiagSettings {
  /// Iterate theta_k at which the diagnostics are evaluated. Empty fields
  /// fall back to the model.
  GmmParams current;
  int iteration = 1;
  std::size_t num_draws = 100000;
  std::size_t q_draws = 10000;
  Conditioning conditioning = Conditioning::Optimal;
  std::uint64_t seed = 0;

  bool operator==(const DiagSettings&) const = default;
};

/// Everything a CLI invocation needs, fully resolved.
struct ExperimentConfig {
  GmmParams model = two_gaussian_benchmark_model();
  NoiseSpec noise{InjectionMode::Additive, NoisePolicy::NemConstrained, 0.0, 2.0};
  RunConfig run;
  std::size_t sample_size = 200;
  std::size_t trials_per_point = 500;
  std::vector<double> sigma_grid;
  std::uint64_t base_seed = 0;
  bool fixed_dataset = false;
  CompareSettings compare;
  DiagSettings diag;

  /// Throws ConfigError naming the first invalid key.
  void validate() const;

  SweepConfig sweep_config() const;
  SweepConfig compare_config() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Source of environment overrides; defaults to std::getenv.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup process_environment();

/// Prefix of environment overrides: NEM_<SECTION>_<KEY>, e.g. NEM_NOISE_SIGMA_N.
inline constexpr const char* kEnvPrefix = "NEM_";

/// Names of the bundled presets.
std::vector<std::string> preset_names();

/// Text of a bundled preset, or nullopt for an unknown name.
std::optional<std::string> preset_text(const std::string& name);

/// Parses INI text. Unknown sections or keys are errors.
ExperimentConfig parse_config(const std::string& text, const EnvLookup& env = {});

/// Reads `path_or_preset`: an existing file, else a bundled preset name.
ExperimentConfig load_config(const std::string& path_or_preset, const EnvLookup& env = {});

/// Canonical INI rendering. parse_config(render_config(c)) == c.
std::string render_config(const ExperimentConfig& config);

/// "a:b:s" inclusive range or comma-separated list.
std::vector<double> parse_grid(const std::string& text);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// FNV-1a 64-bit hash as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace nem
