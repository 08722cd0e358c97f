#pragma once

// Subcommand implementations. Each returns the process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "app/dataset_io.hpp"

namespace qmem::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSimulation = 3,
  kExitFit = 4,
};

struct CommonOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  /// Set when --shots was given; an empty inner value means "none".
  std::optional<std::optional<int>> shots;
  OutputFormat format = OutputFormat::Csv;
};

int cmd_budget(const CommonOptions& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const CommonOptions& opts, std::ostream& out, std::ostream& err);
int cmd_fit(const CommonOptions& opts, const std::filesystem::path& dataset, const std::string& model,
            std::ostream& out, std::ostream& err);
int cmd_wigner(const CommonOptions& opts, std::ostream& out, std::ostream& err);
int cmd_pipeline(const CommonOptions& opts, std::ostream& out, std::ostream& err);

/// "8e7", "1.6e7": value rounded to `digits` significant figures.
std::string format_sig(double x, int digits);

}  // namespace qmem::app
