#include "qmem/sequence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace qmem {

int configured_threads() {
  if (const char* env = std::getenv("QMEM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

QuantumState run_program(const PulseSequence& seq, const Liouvillian& generator, const HilbertDims& dims,
                         double sweep_value, const QuantumState& initial, const EvolveOptions& options) {
  QuantumState state = initial;
  for (const GateStep& step : seq.steps) {
    if (const auto* w = std::get_if<Wait>(&step)) {
      const double duration = w->swept ? sweep_value : w->duration;
      state = evolve(state, generator, duration, options);
    } else if (std::holds_alternative<MeasureSelective>(step)) {
      break;
    } else {
      state = apply_gate(state, step, dims, sweep_value);
    }
  }
  return state;
}

bool needs_exponential(const PulseSequence& seq, const DeviceModel& model) {
  const bool dispersive = model.chi_over_2pi != 0.0 || model.chi_prime_over_2pi != 0.0;
  const bool rotates = std::any_of(seq.steps.begin(), seq.steps.end(), [](const GateStep& s) {
    return std::holds_alternative<TransmonRotation>(s);
  });
  // Pure dephasing damps the n-m coherence at (n-m)^2 * 2/Tphi: stiff for explicit steps.
  const bool stiff = std::isfinite(model.cavity_Tphi);
  return stiff || (dispersive && (model.transmon_Pe_th > 0.0 || rotates));
}

Dataset run_sequence(const PulseSequence& seq, const DeviceModel& model, const HilbertDims& dims,
                     const ReadoutModel& readout, const RunOptions& options) {
  seq.validate(dims);
  model.validate();
  readout.validate();

  int selective = readout.selective_photon;
  if (!seq.steps.empty()) {
    if (const auto* m = std::get_if<MeasureSelective>(&seq.steps.back())) selective = m->photon;
  }
  if (selective >= dims.n_cav) throw DomainError("run_sequence: selective photon outside truncation");

  const Liouvillian generator(model, dims);
  const QuantumState initial = options.initial ? *options.initial : fock_state(0, dims);
  if (!(initial.dims() == dims)) throw DomainError("run_sequence: initial state dimensions differ");

  const std::size_t n = seq.sweep.values.size();
  Dataset out;
  out.sweep_name = seq.sweep.name;
  out.sweep_values = seq.sweep.values;
  out.probability.assign(n, 0.0);

  EvolveOptions evolve_opts = options.evolve;
  if (options.auto_method && needs_exponential(seq, model)) evolve_opts.method = EvolveMethod::Exponential;

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failed_index = n;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const QuantumState final_state =
            run_program(seq, generator, dims, seq.sweep.values[i], initial, evolve_opts);
        out.probability[i] = std::clamp(readout_probability(final_state, readout, selective), 0.0, 1.0);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        // Report the lowest failing index so the error is schedule-independent.
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  const int threads = std::max(1, std::min<int>(options.threads > 0 ? options.threads : configured_threads(),
                                                 static_cast<int>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const IntegrationError& e) {
      throw SequenceError(std::string(e.what()) + " (sweep index " + std::to_string(failed_index) + ")",
                          e.time_reached(), failed_index);
    }
  }

  if (readout.shots) {
    out.shots_per_point = readout.shots;
    out.shot_fraction.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.shot_fraction[i] = sample_shots(out.probability[i], readout, i);
  }
  return out;
}

}  // namespace qmem
