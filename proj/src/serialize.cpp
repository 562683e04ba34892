#include "nem/serialize.hpp"

#include <sstream>
#include <stdexcept>

#include "nem/config.hpp"

namespace nem {

using nlohmann::json;

json to_json(const GmmParams& p) {
  return json{{"weights", p.weights}, {"means", p.means}, {"variances", p.variances}};
}

json to_json(const NoiseSpec& s) {
  return json{{"mode", to_string(s.mode)},
              {"policy", to_string(s.policy)},
              {"sigma_n", s.sigma_n},
              {"tau", s.tau}};
}

json to_json(const TrialRecord& r) {
  json trace = json::array();
  for (const auto& p : r.param_trace) trace.push_back(to_json(p));
  return json{{"iterations", r.iterations},
              {"converged", r.converged},
              {"stop_reason", to_string(r.stop_reason)},
              {"seed", r.seed},
              {"noise_spec", to_json(r.noise_spec)},
              {"final_params", to_json(r.final_params)},
              {"degenerate_steps", r.degenerate_steps},
              {"loglik_trace", r.loglik_trace},
              {"noise_scale_trace", r.noise_scale_trace},
              {"param_trace", std::move(trace)}};
}

json to_json(const BootstrapResult& b) {
  return json{{"point_estimate", b.point_estimate},
              {"ci_low", b.ci_low},
              {"ci_high", b.ci_high},
              {"level", b.level},
              {"p_value", b.p_value},
              {"num_resamples", b.num_resamples},
              {"method", "percentile"},
              {"null", "shifted_resample_two_sided"}};
}

json to_json(const MonteCarloEstimate& e) {
  return json{{"mean", e.mean}, {"std_error", e.std_error}, {"num_draws", e.num_draws}};
}

json to_json(const OutputMetadata& m) {
  return json{{"tool", m.tool},       {"version", m.version}, {"command", m.command},
              {"config_hash", m.config_hash}, {"seed", m.seed}, {"config", m.config}};
}

GmmParams gmm_params_from_json(const json& j) {
  GmmParams p;
  j.at("weights").get_to(p.weights);
  j.at("means").get_to(p.means);
  j.at("variances").get_to(p.variances);
  return p;
}

NoiseSpec noise_spec_from_json(const json& j) {
  NoiseSpec s;
  s.mode = parse_injection_mode(j.at("mode").get<std::string>());
  s.policy = parse_noise_policy(j.at("policy").get<std::string>());
  s.sigma_n = j.at("sigma_n").get<double>();
  s.tau = j.at("tau").get<double>();
  return s;
}

TrialRecord trial_record_from_json(const json& j) {
  TrialRecord r;
  r.iterations = j.at("iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  const auto reason = j.at("stop_reason").get<std::string>();
  r.stop_reason = reason == "converged"           ? StopReason::Converged
                  : reason == "non_finite_update" ? StopReason::NonFiniteUpdate
                                                  : StopReason::IterationCap;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.noise_spec = noise_spec_from_json(j.at("noise_spec"));
  r.final_params = gmm_params_from_json(j.at("final_params"));
  r.degenerate_steps = j.at("degenerate_steps").get<int>();
  j.at("loglik_trace").get_to(r.loglik_trace);
  j.at("noise_scale_trace").get_to(r.noise_scale_trace);
  for (const auto& p : j.at("param_trace")) r.param_trace.push_back(gmm_params_from_json(p));
  return r;
}

std::string trial_record_line(const TrialRecord& r) { return to_json(r).dump(); }

std::string sweep_csv(const SweepSummary& summary, const OutputMetadata& meta) {
  std::ostringstream out;
  out << "# tool: " << meta.tool << "\n"
      << "# version: " << meta.version << "\n"
      << "# command: " << meta.command << "\n"
      << "# config_hash: " << meta.config_hash << "\n"
      << "# seed: " << meta.seed << "\n"
      << "# config:\n";
  std::istringstream cfg(meta.config);
  for (std::string line; std::getline(cfg, line);) out << "#   " << line << "\n";
  out << "sigma_n,mean_iterations,std_error,convergence_rate,speedup_percent\n";
  for (const auto& row : summary.rows) {
    out << format_double(row.sigma_n) << ','
        << (row.mean_iterations ? format_double(*row.mean_iterations) : "") << ','
        << format_double(row.std_error) << ',' << format_double(row.convergence_rate) << ','
        << (row.speedup_percent ? format_double(*row.speedup_percent) : "") << '\n';
  }
  return out.str();
}

std::string trials_jsonl(const SweepSummary& summary, const OutputMetadata& meta) {
  std::ostringstream out;
  out << json{{"meta", to_json(meta)}}.dump() << '\n';
  for (const auto& rec : summary.trials) out << trial_record_line(rec) << '\n';
  return out.str();
}

std::string embedded_config(const std::string& file_text) {
  if (!file_text.empty() && file_text.front() == '{') {
    std::istringstream in(file_text);
    std::string first;
    std::getline(in, first);
    const json j = json::parse(first);
    return j.at("meta").at("config").get<std::string>();
  }
  std::istringstream in(file_text);
  std::string out;
  bool inside = false;
  for (std::string line; std::getline(in, line);) {
    if (line == "# config:") {
      inside = true;
      continue;
    }
    if (!inside) continue;
    if (line.rfind("#   ", 0) != 0) break;
    out += line.substr(4) + "\n";
  }
  if (!inside) throw std::invalid_argument("embedded_config: no configuration block found");
  return out;
}

}  // namespace nem
