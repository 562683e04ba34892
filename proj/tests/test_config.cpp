#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "nem/config.hpp"

using namespace nem;

namespace {

EnvLookup fake_env(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
    const auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

std::string config_error_key(const std::string& text, const EnvLookup& env = {}) {
  try {
    parse_config(text, env);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("presets") {
  CHECK(preset_names() == std::vector<std::string>{"fig1", "fig2"});
  CHECK_FALSE(preset_text("fig3"));

  const auto fig1 = load_config("fig1");
  CHECK(fig1.noise.mode == InjectionMode::Multiplicative);
  CHECK(fig1.noise.policy == NoisePolicy::NemConstrained);
  CHECK(fig1.noise.sigma_n == 0.44);
  CHECK(fig1.noise.tau == 2.0);
  CHECK(fig1.model == two_gaussian_benchmark_model());
  CHECK(fig1.sigma_grid == default_multiplicative_grid());
  CHECK(fig1.run.tol_exponent == 2);
  CHECK(fig1.sample_size == 200);
  CHECK(fig1.trials_per_point == 500);

  const auto fig2 = load_config("fig2");
  CHECK(fig2.noise.mode == InjectionMode::Additive);
  CHECK(fig2.noise.sigma_n == 1.9);
  CHECK(fig2.sigma_grid == default_additive_grid());
  CHECK(fig2.compare.noise.mode == InjectionMode::Multiplicative);

  CHECK_THROWS_AS(load_config("no-such-file.ini"), ConfigError);
}

TEST_CASE("render and parse round trip") {
  for (const auto& name : preset_names()) {
    const auto c = load_config(name);
    const auto text = render_config(c);
    CHECK(parse_config(text) == c);
    CHECK(render_config(parse_config(text)) == text);
  }
  ExperimentConfig odd = load_config("fig2");
  odd.noise.sigma_n = 0.1 + 0.2;
  odd.sigma_grid = {0.0, 1.0 / 3.0, 2.5};
  odd.run.seed = 0xffffffffffffffffULL;
  odd.fixed_dataset = true;
  odd.diag.conditioning = Conditioning::Current;
  CHECK(parse_config(render_config(odd)) == odd);
}

TEST_CASE("file loading") {
  const auto path = std::filesystem::temp_directory_path() / "nem_test_config.ini";
  {
    std::ofstream f(path);
    f << render_config(load_config("fig1"));
  }
  CHECK(load_config(path.string()) == load_config("fig1"));
  std::filesystem::remove(path);
}

TEST_CASE("environment overrides") {
  const auto text = *preset_text("fig2");
  const auto c = parse_config(text, fake_env({{"NEM_NOISE_SIGMA_N", "0.7"}, {"NEM_RUN_TOL_EXPONENT", "3"}}));
  CHECK(c.noise.sigma_n == 0.7);
  CHECK(c.run.tol_exponent == 3);
  CHECK(parse_config(text, fake_env({})) == parse_config(text));
  CHECK(config_error_key(text, fake_env({{"NEM_NOISE_SIGMA_N", "lots"}})) == "noise.sigma_n");
}

TEST_CASE("errors name the key") {
  CHECK(config_error_key("[noise]\nsigma = 1\n") == "noise.sigma");
  CHECK(config_error_key("[bogus]\nx = 1\n") == "bogus.x");
  CHECK(config_error_key("[noise]\nmode = sideways\n") == "noise.mode");
  CHECK(config_error_key("[noise]\nsigma_n = -1\n").starts_with("noise"));
  CHECK(config_error_key("[run]\nmax_iterations = ten\n") == "run.max_iterations");
  CHECK(config_error_key("[sweep]\nsigma_grid = 0.5, 1.0\n").starts_with("sweep"));
  CHECK(config_error_key("[model]\nweights = 0.5, 0.6\n").starts_with("model"));
  CHECK(config_error_key("[sweep]\nfixed_dataset = maybe\n") == "sweep.fixed_dataset");
}

TEST_CASE("comments and defaults") {
  const auto c = parse_config("; a comment\n[noise]\nmode = additive ; trailing\nsigma_n = 1.5\n");
  CHECK(c.noise.sigma_n == 1.5);
  CHECK(c.noise.mode == InjectionMode::Additive);
  CHECK(c.run.tol_exponent == 2);
  CHECK(c.run.max_iterations == 500);
  CHECK(c.sample_size == 200);
  CHECK(c.trials_per_point == 500);
  CHECK(c.sigma_grid == default_additive_grid());
}

TEST_CASE("grid parsing") {
  CHECK(parse_grid("0:1:0.25") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(parse_grid("0:2.1:0.1") == default_additive_grid());
  CHECK(parse_grid("0, 0.5,1.9") == std::vector<double>{0.0, 0.5, 1.9});
  CHECK(parse_grid("0:0:1") == std::vector<double>{0.0});
  CHECK_THROWS_AS(parse_grid("0:1:0"), ConfigError);
  CHECK_THROWS_AS(parse_grid("1:0:0.1"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0,x"), ConfigError);
}

TEST_CASE("number formatting and hashing") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 2.5, -7.0, 0.44})
    CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(1.9) == "1.9");
  // FNV-1a reference vectors.
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("derived sweep configs") {
  const auto c = load_config("fig2");
  const auto a = c.sweep_config();
  const auto b = c.compare_config();
  CHECK(a.noise.mode == InjectionMode::Additive);
  CHECK(b.noise.mode == InjectionMode::Multiplicative);
  CHECK(a.model == b.model);
  CHECK(a.sample_size == b.sample_size);
  CHECK(a.run.tol_exponent == b.run.tol_exponent);
  CHECK(a.base_seed == c.base_seed);
  CHECK(b.sigma_grid == default_multiplicative_grid());
}
