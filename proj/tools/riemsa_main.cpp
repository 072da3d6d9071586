#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "riemsa/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Riemannian stochastic approximation experiments"};
  std::string experiment;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("experiment", experiment, "geom-test, run, sweep, karcher, clt, bias or bounds")->required();
  app.add_option("--config", config_path, "JSON experiment config")->required();
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read config " << config_path << "\n";
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();

  riemsa::ExperimentConfig config;
  try {
    config = riemsa::parse_config(text.str());
  } catch (const riemsa::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (config.experiment != experiment) {
    std::cerr << "experiment '" << experiment << "' does not match the config's '" << config.experiment << "'\n";
    return 2;
  }
  if (*seed_opt) config.seed = seed;

  riemsa::RunOptions options;
  if (*out_opt) options.out_dir = out_dir;
  options.threads = threads;
  const riemsa::ExperimentResult result = riemsa::run_experiment(config, options);
  std::cout << result.report;
  return result.exit_code;
}
