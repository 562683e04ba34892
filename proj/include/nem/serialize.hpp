#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "nem/bench.hpp"
#include "nem/diagnostics.hpp"
#include "nem/runner.hpp"

namespace nem {

/// Provenance written at the top of every output file.
struct OutputMetadata {
  std::string tool = "nem_bench";
  std::string version;
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  /// Fully resolved configuration in INI form.
  std::string config;
};

nlohmann::json to_json(const GmmParams& p);
nlohmann::json to_json(const NoiseSpec& s);
nlohmann::json to_json(const TrialRecord& r);
nlohmann::json to_json(const BootstrapResult& b);
nlohmann::json to_json(const MonteCarloEstimate& e);
nlohmann::json to_json(const OutputMetadata& m);

GmmParams gmm_params_from_json(const nlohmann::json& j);
NoiseSpec noise_spec_from_json(const nlohmann::json& j);
TrialRecord trial_record_from_json(const nlohmann::json& j);

/// One compact JSON object on a single line, no trailing newline.
std::string trial_record_line(const TrialRecord& r);

/// Metadata as comment lines ("# ...") followed by the header
/// `sigma_n,mean_iterations,std_error,convergence_rate,speedup_percent`
/// and one row per grid point. Absent means print as empty fields.
std::string sweep_csv(const SweepSummary& summary, const OutputMetadata& meta);

/// Metadata line, then one trial record per line.
std::string trials_jsonl(const SweepSummary& summary, const OutputMetadata& meta);

/// Recovers the embedded INI configuration from any output file.
std::string embedded_config(const std::string& file_text);

}  // namespace nem
