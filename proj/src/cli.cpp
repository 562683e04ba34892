#include "nem/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nem/bench.hpp"
#include "nem/diagnostics.hpp"
#include "nem/serialize.hpp"
#include "nem/version.hpp"

namespace nem {

namespace {

constexpr std::uint64_t kRunDataStream = 3;
constexpr std::uint64_t kDiagDataStream = 4;

struct Overrides {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<double> sigma;
  std::optional<std::string> policy;
  std::optional<std::string> mode;
  std::optional<double> tau;
  int verbosity = 0;
  bool dump_config = false;
};

void apply(const Overrides& o, ExperimentConfig& c) {
  if (o.seed) {
    c.run.seed = *o.seed;
    c.base_seed = *o.seed;
    c.compare.bootstrap_seed = *o.seed;
    c.diag.seed = *o.seed;
  }
  if (o.sigma) c.noise.sigma_n = *o.sigma;
  if (o.tau) c.noise.tau = *o.tau;
  try {
    if (o.policy) c.noise.policy = parse_noise_policy(*o.policy);
  } catch (const std::exception& e) {
    throw ConfigError("--policy", e.what());
  }
  try {
    if (o.mode) c.noise.mode = parse_injection_mode(*o.mode);
  } catch (const std::exception& e) {
    throw ConfigError("--mode", e.what());
  }
}

OutputMetadata metadata(const std::string& command, const ExperimentConfig& c, std::uint64_t seed) {
  OutputMetadata m;
  m.version = kVersion;
  m.command = command;
  m.config = render_config(c);
  m.config_hash = fnv1a_hex(m.config);
  m.seed = seed;
  return m;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::string with_meta(const OutputMetadata& meta, const nlohmann::json& body) {
  nlohmann::json j = body;
  j["meta"] = to_json(meta);
  return j.dump(2) + "\n";
}

void print_summary(const SweepSummary& s, std::ostream& out) {
  out << "sigma_n  mean_iter  std_err  conv_rate  speedup%\n";
  for (const auto& r : s.rows) {
    out << std::fixed << std::setprecision(3) << std::setw(7) << r.sigma_n << "  ";
    if (r.mean_iterations)
      out << std::setw(9) << *r.mean_iterations;
    else
      out << std::setw(9) << "-";
    out << "  " << std::setw(7) << r.std_error << "  " << std::setw(9) << r.convergence_rate << "  ";
    if (r.speedup_percent)
      out << std::setw(8) << *r.speedup_percent;
    else
      out << std::setw(8) << "-";
    out << "\n";
  }
  if (auto best = s.best_sigma()) out << "empirical sigma* = " << *best << "\n";
  out.unsetf(std::ios::floatfield);
}

int cmd_run(const ExperimentConfig& c, const Overrides& o, std::ostream& out) {
  const Dataset data = generate_data(c.model, c.sample_size, derive_seed(c.run.seed, kRunDataStream));
  const GmmParams init = initial_params(data, c.model.size(), c.run.init, c.run.seed);
  const TrialRecord rec = run_nem(data, init, c.noise, c.run);
  out << trial_record_line(rec) << "\n";
  if (!o.out_dir.empty()) {
    const auto meta = metadata("run", c, c.run.seed);
    write_file(std::filesystem::path(o.out_dir) / "trial.jsonl",
               nlohmann::json{{"meta", to_json(meta)}}.dump() + "\n" + trial_record_line(rec) + "\n");
  }
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& c, const Overrides& o, std::ostream& out, std::ostream& err) {
  SweepConfig sc = c.sweep_config();
  sc.threads = o.threads;
  if (o.verbosity > 0)
    err << "sweep: " << sc.sigma_grid.size() << " grid points x " << sc.trials_per_point << " trials\n";
  const SweepSummary s = run_sweep(sc);
  const auto meta = metadata("sweep", c, c.base_seed);
  const std::filesystem::path dir = o.out_dir.empty() ? "." : o.out_dir;
  write_file(dir / "sweep.csv", sweep_csv(s, meta));
  write_file(dir / "trials.jsonl", trials_jsonl(s, meta));
  print_summary(s, out);
  return kExitOk;
}

int cmd_compare(const ExperimentConfig& c, const Overrides& o, std::ostream& out, std::ostream& err) {
  SweepConfig a = c.sweep_config();
  SweepConfig b = c.compare_config();
  a.threads = b.threads = o.threads;
  if (o.verbosity > 0) err << "compare: " << to_string(a.noise.mode) << " vs " << to_string(b.noise.mode) << "\n";
  const ModeComparison cmp = compare_modes(a, b, c.compare.num_resamples, c.compare.level, c.compare.bootstrap_seed);
  const auto meta = metadata("compare", c, c.base_seed);
  const std::filesystem::path dir = o.out_dir.empty() ? "." : o.out_dir;
  write_file(dir / "sweep_a.csv", sweep_csv(cmp.summary_a, meta));
  write_file(dir / "sweep_b.csv", sweep_csv(cmp.summary_b, meta));
  nlohmann::json body{{"mode_a", to_string(a.noise.mode)},
                      {"mode_b", to_string(b.noise.mode)},
                      {"sigma_star_a", cmp.sigma_star_a},
                      {"sigma_star_b", cmp.sigma_star_b},
                      {"bootstrap", to_json(cmp.bootstrap)}};
  write_file(dir / "bootstrap.json", with_meta(meta, body));
  out << body.dump(2) << "\n";
  return kExitOk;
}

int cmd_diag(const ExperimentConfig& c, const Overrides& o, std::ostream& out) {
  const auto& d = c.diag;
  const auto positivity = estimate_positivity(c.model, d.current, c.noise, d.iteration, d.num_draws, d.seed, d.conditioning);
  const double gap = relative_entropy_gap(c.model, d.current, c.noise, d.iteration, d.num_draws, d.seed, d.conditioning);
  const Dataset data = generate_data(c.model, c.sample_size, derive_seed(d.seed, kDiagDataStream));
  const auto q = q_noise_benefit(c.model, d.current, c.noise, data, d.iteration, d.seed, d.q_draws);
  nlohmann::json body{{"noise_spec", to_json(c.noise)},
                      {"iteration", d.iteration},
                      {"conditioning", to_string(d.conditioning)},
                      {"positivity", to_json(positivity)},
                      {"relative_entropy_gap", gap},
                      {"q_noise_benefit", to_json(q)}};
  if (!o.out_dir.empty()) write_file(std::filesystem::path(o.out_dir) / "diag.json", with_meta(metadata("diag", c, d.seed), body));
  out << body.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
                       const EnvLookup& env) {
  CLI::App app{"Noise-boosted EM benchmark for one-dimensional Gaussian mixtures", "nem_bench"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "Config file or preset name (" + [] {
      std::string names;
      for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
      return names;
    }() + ")")->required();
    sub->add_option("-o,--out", o.out_dir, "Output directory");
    sub->add_option("--seed", o.seed, "Override every seed in the config");
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    sub->add_option("--sigma", o.sigma, "Override noise.sigma_n")->check(CLI::NonNegativeNumber);
    sub->add_option("--policy", o.policy, "Override noise.policy (nem, blind, off)");
    sub->add_option("--mode", o.mode, "Override noise.mode (additive, multiplicative)");
    sub->add_option("--tau", o.tau, "Override noise.tau")->check(CLI::NonNegativeNumber);
    sub->add_flag("-v,--verbose", o.verbosity, "Progress on stderr");
    sub->add_flag("--dump-config", o.dump_config, "Print the resolved config and exit");
  };
  auto* run = app.add_subcommand("run", "Run one EM/NEM trial and print its record");
  auto* sweep = app.add_subcommand("sweep", "Sweep noise intensity; write sweep.csv and trials.jsonl");
  auto* compare = app.add_subcommand("compare", "Compare two noise modes at their optima with a bootstrap");
  auto* diag = app.add_subcommand("diag", "Monte-Carlo positivity and noise-benefit diagnostics");
  for (auto* sub : {run, sweep, compare, diag}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    if (e.get_exit_code() != 0) err << app.help();
    return kExitConfigError;
  }

  ExperimentConfig config;
  try {
    config = load_config(o.config, env);
    apply(o, config);
    config.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  if (o.dump_config) {
    out << render_config(config);
    return kExitOk;
  }

  try {
    if (run->parsed()) return cmd_run(config, o, out);
    if (sweep->parsed()) return cmd_sweep(config, o, out, err);
    if (compare->parsed()) return cmd_compare(config, o, out, err);
    if (diag->parsed()) return cmd_diag(config, o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitRuntimeError;
}

}  // namespace nem
