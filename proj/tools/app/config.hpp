#pragma once

// JSON configuration documents for the command-line tool.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmem/dynamics.hpp"
#include "qmem/lossbudget.hpp"
#include "qmem/measurement.hpp"
#include "qmem/protocols.hpp"

namespace qmem::app {

/// Malformed or invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class IntegratorChoice { Auto, Adaptive, Exponential };

struct WignerState {
  enum class Kind { Fock, Coherent, Superposition, Fock1Snap } kind = Kind::Fock;
  int n = 0;
  Complex alpha{0.0, 0.0};
};

struct ExperimentConfig {
  DeviceModel device;
  HilbertDims dims;
  ReadoutModel readout;
  /// t1_fock, t1_coherent, t2_ramsey, wigner or nbar.
  std::string kind;
  ProtocolParams protocol;
  WignerState wigner_state;
  WignerGridSpec wigner_grid;
  IntegratorChoice integrator = IntegratorChoice::Auto;
  /// File stem for outputs; defaults to the experiment kind.
  std::string output_stem;
};

struct PipelineDevice {
  std::string name;
  DeviceModel device;
};

struct PipelineConfig {
  std::vector<PipelineDevice> devices;
  HilbertDims dims;
  ReadoutModel readout;
  ProtocolParams protocol;
  IntegratorChoice integrator = IntegratorChoice::Auto;
};

/// Reads and parses a JSON file; syntax errors report line and column.
nlohmann::json load_json(const std::filesystem::path& path);

DeviceModel parse_device(const nlohmann::json& j, const std::string& where);
ExperimentConfig parse_experiment(const nlohmann::json& j);
PipelineConfig parse_pipeline(const nlohmann::json& j);
std::vector<LossChannel> parse_budget(const nlohmann::json& j);

}  // namespace qmem::app
