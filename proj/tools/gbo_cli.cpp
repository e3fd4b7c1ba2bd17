// gbo: run graph Bayesian optimization experiments and summarize their output.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

#include "gbo/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Graph Bayesian optimization experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::size_t jobs = 1;
  std::uint64_t seed_base = 0;
  auto* run = app.add_subcommand("run", "run every strategy and seed of an experiment config");
  run->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory (default: results/<config stem>)");
  run->add_option("--seed-base", seed_base, "offset added to every seed");

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "write curve, hyperparameter and gamma tables");
  rep->add_option("dir", report_dir, "experiment output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto config = gbo::ExperimentConfig::load(config_path);
      gbo::RunOptions ro;
      ro.jobs = jobs;
      ro.seed_base = seed_base;
      ro.out_dir = out_dir.empty() ? std::filesystem::path("results") / std::filesystem::path(config_path).stem()
                                   : std::filesystem::path(out_dir);
      const auto result = gbo::run_experiment(config, ro);
      for (const auto& r : result.runs) {
        std::cout << gbo::to_string(r.strategy) << " seed " << r.seed << ": best " << r.best();
        if (r.evaluations_to_optimum) std::cout << ", optimum at evaluation " << *r.evaluations_to_optimum;
        if (r.aborted) std::cout << ", ABORTED: " << r.error;
        std::cout << '\n';
      }
      std::cout << "wrote " << ro.out_dir->string() << '\n';
      return result.any_failed ? 1 : 0;
    }
    const auto out = gbo::report(report_dir);
    std::cout << "wrote " << out.string() << '\n';
    return 0;
  } catch (const gbo::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
