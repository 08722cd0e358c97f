#pragma once

// The three storage-mode measurement programs and their default sweep grids.

#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "qmem/dynamics.hpp"
#include "qmem/fitting.hpp"

namespace qmem {

enum class ProtocolKind { T1Fock, T1Coherent, T2Ramsey };

std::string_view to_string(ProtocolKind kind);
/// Accepts "t1_fock", "t1_coherent", "t2_ramsey".
ProtocolKind parse_protocol(std::string_view name);

struct ProtocolParams {
  int points = 41;
  /// Sweep window; defaults to 5 T1 (T1 protocols) or 3 T2 (Ramsey).
  std::optional<double> span;
  /// Coherent-state amplitude for T1Coherent.
  Complex alpha{std::sqrt(2.0), 0.0};
  /// Artificial detuning for T2Ramsey; defaults to 5 / span.
  std::optional<double> detuning;
  /// Readout displacement magnitude for T2Ramsey.
  double readout_displacement = 1.0;
};

/// points values evenly spaced on [0, span].
std::vector<double> linear_grid(double span, int points);

double default_span(ProtocolKind kind, const DeviceModel& model);

PulseSequence build_protocol(ProtocolKind kind, const DeviceModel& model, const HilbertDims& dims,
                             const ProtocolParams& params = {});

FitModelKind fit_model_for(ProtocolKind kind);

}  // namespace qmem
