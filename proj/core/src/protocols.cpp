#include "qmem/protocols.hpp"

#include <cmath>
#include <numbers>

namespace qmem {

std::string_view to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::T1Fock:
      return "t1_fock";
    case ProtocolKind::T1Coherent:
      return "t1_coherent";
    case ProtocolKind::T2Ramsey:
      return "t2_ramsey";
  }
  return "unknown";
}

ProtocolKind parse_protocol(std::string_view name) {
  if (name == "t1_fock") return ProtocolKind::T1Fock;
  if (name == "t1_coherent") return ProtocolKind::T1Coherent;
  if (name == "t2_ramsey") return ProtocolKind::T2Ramsey;
  throw DomainError("unknown protocol '" + std::string(name) + "'");
}

std::vector<double> linear_grid(double span, int points) {
  if (points < 2) throw DomainError("linear_grid: need at least two points");
  if (!(span > 0.0) || !std::isfinite(span)) throw DomainError("linear_grid: span must be finite and > 0");
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) v[i] = span * i / (points - 1);
  return v;
}

double default_span(ProtocolKind kind, const DeviceModel& model) {
  return kind == ProtocolKind::T2Ramsey ? 3.0 * model.expected_cavity_T2() : 5.0 * model.cavity_T1;
}

PulseSequence build_protocol(ProtocolKind kind, const DeviceModel& model, const HilbertDims& dims,
                             const ProtocolParams& params) {
  model.validate();
  dims.validate();
  const double span = params.span.value_or(default_span(kind, model));
  PulseSequence seq;
  seq.sweep = {"delay", linear_grid(span, params.points)};
  switch (kind) {
    case ProtocolKind::T1Fock:
      seq.steps = snap_prepare_fock1(dims);
      seq.steps.emplace_back(Wait{0.0, true});
      break;
    case ProtocolKind::T1Coherent:
      seq.steps.emplace_back(Displace{params.alpha, 0.0});
      seq.steps.emplace_back(Wait{0.0, true});
      break;
    case ProtocolKind::T2Ramsey: {
      const double detuning = params.detuning.value_or(5.0 / span);
      seq.steps = snap_prepare_superposition(dims);
      seq.steps.emplace_back(Wait{0.0, true});
      // The readout displacement advances in phase with the delay.
      seq.steps.emplace_back(Displace{Complex(params.readout_displacement, 0.0), 2.0 * std::numbers::pi * detuning});
      break;
    }
  }
  seq.steps.emplace_back(MeasureSelective{0});
  seq.validate(dims);
  return seq;
}

FitModelKind fit_model_for(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::T1Fock:
      return FitModelKind::SingleExp;
    case ProtocolKind::T1Coherent:
      return FitModelKind::CoherentVacuum;
    case ProtocolKind::T2Ramsey:
      return FitModelKind::RamseyFringe;
  }
  return FitModelKind::SingleExp;
}

}  // namespace qmem
