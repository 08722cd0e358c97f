#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>

#include "qmem/dynamics.hpp"
#include "qmem/measurement.hpp"

namespace qmem {

/// Integration failure at one sweep point.
class SequenceError : public IntegrationError {
 public:
  SequenceError(const std::string& what, double time_reached, std::size_t sweep_index)
      : IntegrationError(what, time_reached), sweep_index_(sweep_index) {}
  [[nodiscard]] std::size_t sweep_index() const { return sweep_index_; }

 private:
  std::size_t sweep_index_;
};

struct RunOptions {
  EvolveOptions evolve{};
  /// Worker threads for sweep points; 0 reads QMEM_THREADS, falling back to 1.
  int threads = 0;
  /// Defaults to vacuum (x) |g>.
  std::optional<QuantumState> initial;
  /// Switch Wait steps to the exponential method when excited-transmon
  /// coherences would wind at chi n (see needs_exponential).
  bool auto_method = true;
};

/// True when the adaptive integrator would crawl: the transmon can be excited
/// (thermally or by a rotation) while chi is nonzero, so coherences wind at chi
/// times the photon number, or cavity dephasing is finite and stiff.
bool needs_exponential(const PulseSequence& seq, const DeviceModel& model);

/// Executes the program once per sweep value. Gates act instantaneously, Wait
/// steps integrate the master equation, and the readout is recorded at the
/// end (or at MeasureSelective). Sweep points are independent of each other.
Dataset run_sequence(const PulseSequence& seq, const DeviceModel& model, const HilbertDims& dims,
                     const ReadoutModel& readout, const RunOptions& options = {});

/// Final state of the program for one sweep value.
QuantumState run_program(const PulseSequence& seq, const Liouvillian& generator, const HilbertDims& dims,
                         double sweep_value, const QuantumState& initial, const EvolveOptions& options);

/// Thread count from QMEM_THREADS (>= 1).
int configured_threads();

}  // namespace qmem
