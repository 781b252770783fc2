// aoi_sched: command-line front end for the AoI scheduling toolkit.
//
//   aoi_sched simulate --config exp.json [--seed N] [--runs N] [--threads N] [--out F]
//   aoi_sched bounds   --config exp.json [--ewsaoi]
//   aoi_sched dp       --config exp.json
//   aoi_sched figure   fig5|fig6|fig7|fig8 [--scale desk|full] [--seed N]
//
// Exit codes: 0 success, 1 internal error, 2 validation error, 3 infeasible DP.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "aoi/cli.hpp"

namespace {

aoi::cli::ExperimentFile load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw aoi::config_error("--config", "cannot open '" + path + "'");
  return aoi::cli::parse_experiment(in);
}

int emit(const aoi::cli::CommandOutput& out, const std::string& path) {
  if (!out.diagnostics.empty()) std::cerr << out.diagnostics << (out.diagnostics.back() == '\n' ? "" : "\n");
  if (path.empty() || path == "-") {
    std::cout << out.csv;
  } else {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot write '" << path << "'\n";
      return aoi::cli::kInternal;
    }
    f << out.csv;
  }
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-Information scheduling simulator and analytics"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::size_t threads = 0;
  bool ewsaoi_scale = false;
  std::string figure_name, scale = "desk";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_path, "Output CSV path (default: standard output)");
    sub->add_option("--threads", threads, "Worker threads (default: AOI_SCHED_THREADS or all cores)");
  };

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo runs of the configured policies");
  simulate->add_option("--config", config_path, "Experiment file (JSON)")->required();
  simulate->add_option("--seed", seed, "Override master_seed");
  simulate->add_option("--runs", runs, "Override runs");
  add_common(simulate);

  auto* bounds = app.add_subcommand("bounds", "Lower bound, upper bounds and guarantees");
  bounds->add_option("--config", config_path, "Experiment file (JSON)")->required();
  bounds->add_flag("--ewsaoi", ewsaoi_scale, "Report bounds on the EWSAoI scale instead of J");
  add_common(bounds);

  auto* dp = app.add_subcommand("dp", "Exact finite-horizon optimum by backward induction");
  dp->add_option("--config", config_path, "Experiment file (JSON)")->required();
  add_common(dp);

  auto* figure = app.add_subcommand("figure", "Preset simulation campaigns");
  figure->add_option("name", figure_name, "fig5|fig6|fig7|fig8")->required();
  figure->add_option("--scale", scale, "desk|full")->check(CLI::IsMember({"desk", "full"}));
  figure->add_option("--seed", seed, "Campaign master seed");
  add_common(figure);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : aoi::cli::kValidation;
  }

  try {
    aoi::cli::Overrides ov{seed, runs, threads};
    if (simulate->parsed()) return emit(aoi::cli::cmd_simulate(load(config_path), ov), out_path);
    if (bounds->parsed()) return emit(aoi::cli::cmd_bounds(load(config_path), ewsaoi_scale), out_path);
    if (dp->parsed()) return emit(aoi::cli::cmd_dp(load(config_path)), out_path);
    if (figure->parsed()) {
      const auto s = scale == "full" ? aoi::cli::Scale::Full : aoi::cli::Scale::Desk;
      return emit(aoi::cli::cmd_figure(figure_name, s, seed.value_or(1), threads), out_path);
    }
  } catch (const aoi::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return aoi::cli::kValidation;
  } catch (const aoi::dp_infeasible& e) {
    std::cerr << "error: " << e.what() << "\n";
    return aoi::cli::kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return aoi::cli::kInternal;
  }
  return aoi::cli::kInternal;
}
