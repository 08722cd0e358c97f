#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "app/commands.hpp"

namespace {

void add_common(CLI::App* cmd, qmem::app::CommonOptions& opts, std::string& shots, std::string& format,
                bool needs_config) {
  auto* config = cmd->add_option("--config", opts.config, "Configuration file (JSON)");
  if (needs_config) config->required();
  cmd->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--seed", opts.seed, "RNG seed for shot sampling");
  cmd->add_option("--shots", shots, "Shots per point, or 'none'");
  cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qmem::app;
  CLI::App app{"Simulate, fit and budget a cavity quantum memory"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string shots;
  std::string format = "csv";
  std::string dataset;
  std::string model;

  auto* budget = app.add_subcommand("budget", "Per-channel and total internal Q from a loss budget");
  auto* simulate = app.add_subcommand("simulate", "Run one measurement protocol and write its dataset");
  auto* fit = app.add_subcommand("fit", "Fit a decay model to a dataset");
  auto* wigner = app.add_subcommand("wigner", "Wigner map of a prepared state");
  auto* pipeline = app.add_subcommand("pipeline", "T1 (Fock), T1 (coherent), T2 and nbar for each device");
  for (auto* cmd : {budget, simulate, wigner, pipeline}) add_common(cmd, opts, shots, format, true);
  add_common(fit, opts, shots, format, false);
  fit->add_option("--dataset", dataset, "Dataset file (.csv or .json)")->required();
  fit->add_option("--model", model, "single_exp, coherent_vacuum or ramsey_fringe")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  opts.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  if (!shots.empty()) {
    if (shots == "none") {
      opts.shots = std::optional<int>{};
    } else {
      try {
        std::size_t used = 0;
        const int n = std::stoi(shots, &used);
        if (used != shots.size() || n < 1) throw std::invalid_argument(shots);
        opts.shots = std::optional<int>{n};
      } catch (const std::exception&) {
        std::cerr << "--shots: expected a positive integer or 'none', got '" << shots << "'\n";
        return kExitConfig;
      }
    }
  }

  if (*budget) return cmd_budget(opts, std::cout, std::cerr);
  if (*simulate) return cmd_simulate(opts, std::cout, std::cerr);
  if (*fit) return cmd_fit(opts, dataset, model, std::cout, std::cerr);
  if (*wigner) return cmd_wigner(opts, std::cout, std::cerr);
  return cmd_pipeline(opts, std::cout, std::cerr);
}
