// Command-line front end: `singhom run --config X` and `singhom suite --config manifest`.
#include <iostream>

#include "CLI11.hpp"
#include "singhom/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Singular semilinear elliptic experiments"};
  app.require_subcommand(1);

  std::string config;
  std::string out = "results";
  int threads = 1;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("--config", config, what)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory")->capture_default_str();
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--seed", seed, "Overrides the seed of every config");
  };
  auto* run = app.add_subcommand("run", "Run one experiment config");
  add_common(run, "Experiment config (INI)");
  auto* suite = app.add_subcommand("suite", "Run every config listed in a manifest");
  add_common(suite, "Manifest: one config path per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : singhom::kExitConfig;
  }

  singhom::RunOptions opts;
  opts.out_dir = out;
  opts.threads = threads;
  if (app.get_subcommand("run")->count("--seed") || app.get_subcommand("suite")->count("--seed")) opts.seed = seed;

  try {
    if (run->parsed()) return singhom::run(config, opts, std::cout, std::cerr);
    return singhom::suite(config, opts, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return singhom::kExitFail;
  }
}
