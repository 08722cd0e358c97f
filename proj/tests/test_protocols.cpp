#include <gtest/gtest.h>

#include <cmath>

#include "qmem/protocols.hpp"
#include "qmem/sequence.hpp"

using namespace qmem;

namespace {

template <class T>
int count(const PulseSequence& seq) {
  int n = 0;
  for (const auto& s : seq.steps) n += std::holds_alternative<T>(s);
  return n;
}

DeviceModel ideal() {
  DeviceModel m;
  m.cavity_T1 = 1.4e-3;
  return m;
}

}  // namespace

TEST(Protocols, Names) {
  for (auto k : {ProtocolKind::T1Fock, ProtocolKind::T1Coherent, ProtocolKind::T2Ramsey}) {
    EXPECT_EQ(parse_protocol(to_string(k)), k);
  }
  EXPECT_THROW(parse_protocol("t3"), DomainError);
  EXPECT_EQ(fit_model_for(ProtocolKind::T1Coherent), FitModelKind::CoherentVacuum);
}

TEST(Protocols, GridAndSpan) {
  const auto g = linear_grid(7e-3, 41);
  ASSERT_EQ(g.size(), 41u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.back(), 7e-3);
  EXPECT_THROW(linear_grid(0.0, 41), DomainError);
  EXPECT_THROW(linear_grid(1e-3, 1), DomainError);
  EXPECT_DOUBLE_EQ(default_span(ProtocolKind::T1Fock, ideal()), 7e-3);
  EXPECT_DOUBLE_EQ(default_span(ProtocolKind::T2Ramsey, ideal()), 3 * 2.8e-3);
}

TEST(Protocols, SequenceShapes) {
  const HilbertDims dims{20, 2};
  const PulseSequence fock = build_protocol(ProtocolKind::T1Fock, ideal(), dims);
  EXPECT_EQ(count<Snap>(fock), 2);
  EXPECT_EQ(count<Wait>(fock), 1);
  EXPECT_TRUE(std::holds_alternative<MeasureSelective>(fock.steps.back()));
  const PulseSequence coh = build_protocol(ProtocolKind::T1Coherent, ideal(), dims);
  ASSERT_EQ(coh.steps.size(), 3u);
  EXPECT_NEAR(std::abs(std::get<Displace>(coh.steps[0]).alpha), std::sqrt(2.0), 1e-15);
  const PulseSequence ramsey = build_protocol(ProtocolKind::T2Ramsey, ideal(), dims);
  const auto& readout = std::get<Displace>(ramsey.steps[ramsey.steps.size() - 2]);
  EXPECT_NEAR(readout.phase_per_sweep_unit, 2 * M_PI * 5.0 / (3 * 2.8e-3), 1e-6);
  for (const auto* seq : {&fock, &coh, &ramsey}) {
    EXPECT_NO_THROW(seq->validate(dims));
    EXPECT_EQ(seq->sweep.values.size(), 41u);
  }
}

TEST(RunSequence, EmptyProgramGivesConstantTrace) {
  const HilbertDims dims{10, 2};
  ReadoutModel ro;
  ro.contrast = 0.8;
  ro.baseline = 0.05;
  RunOptions opt;
  opt.initial = coherent_state(0.6, dims);
  const PulseSequence seq{{}, {"delay", linear_grid(1e-3, 5)}};
  const Dataset d = run_sequence(seq, ideal(), dims, ro, opt);
  for (double p : d.probability) EXPECT_DOUBLE_EQ(p, readout_probability(*opt.initial, ro));
}

TEST(RunSequence, FockDecayMatchesBinomialLoss) {
  const HilbertDims dims{20, 2};
  const DeviceModel m = ideal();
  ReadoutModel ro;
  ro.contrast = 0.9;
  ro.baseline = 0.04;
  const PulseSequence seq = build_protocol(ProtocolKind::T1Fock, m, dims, {.points = 11});
  const Dataset d = run_sequence(seq, m, dims, ro);
  // Photon loss thins |n> binomially, so P0(t) = sum_n p_n (1 - e^{-t/T1})^n.
  const ComplexVector prepared = snap_recipe_fock1().prepare(dims.n_cav);
  for (std::size_t i = 0; i < d.sweep_values.size(); ++i) {
    const double lost = 1.0 - std::exp(-d.sweep_values[i] / m.cavity_T1);
    double p0 = 0.0;
    for (int n = 0; n < dims.n_cav; ++n) p0 += std::norm(prepared(n)) * std::pow(lost, n);
    EXPECT_NEAR(d.probability[i], ro.baseline + ro.contrast * p0, 1e-6) << "t=" << d.sweep_values[i];
  }
}

TEST(RunSequence, FockAndCoherentT1Agree) {
  const HilbertDims dims{20, 2};
  const DeviceModel m = ideal();
  const FitResult fock = fit(FitModelKind::SingleExp,
                             run_sequence(build_protocol(ProtocolKind::T1Fock, m, dims), m, dims, {}));
  const FitResult coh = fit(FitModelKind::CoherentVacuum,
                            run_sequence(build_protocol(ProtocolKind::T1Coherent, m, dims), m, dims, {}));
  ASSERT_TRUE(fock.converged);
  ASSERT_TRUE(coh.converged);
  EXPECT_NEAR(fock.param("T1") / coh.param("T1"), 1.0, 0.05);
  EXPECT_NEAR(coh.param("n0"), 2.0, 1e-3);
}

TEST(RunSequence, RamseyEnvelopeIsTwiceT1) {
  const HilbertDims dims{20, 2};
  const DeviceModel m = ideal();
  const Dataset d = run_sequence(build_protocol(ProtocolKind::T2Ramsey, m, dims, {.points = 81}), m, dims, {});
  const FitResult r = fit(FitModelKind::RamseyFringe, d);
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.param("T2") / (2 * m.cavity_T1), 1.0, 0.05);
}

TEST(RunSequence, ScheduleIndependent) {
  const HilbertDims dims{12, 2};
  DeviceModel m = ideal();
  m.nbar_th = 0.02;
  const PulseSequence seq = build_protocol(ProtocolKind::T1Coherent, m, dims, {.points = 9});
  RunOptions one, three;
  one.threads = 1;
  three.threads = 3;
  EXPECT_EQ(run_sequence(seq, m, dims, {}, one).probability, run_sequence(seq, m, dims, {}, three).probability);
}

TEST(RunSequence, IntegrationFailureCarriesSweepIndex) {
  const HilbertDims dims{10, 2};
  RunOptions opt;
  opt.auto_method = false;
  opt.evolve.integrator.max_steps = 2;
  const PulseSequence seq{{Displace{1.0}, Wait{0.0, true}}, {"delay", {0.0, 1e-3, 2e-3}}};
  try {
    run_sequence(seq, ideal(), dims, {}, opt);
    FAIL() << "expected a sequence error";
  } catch (const SequenceError& e) {
    EXPECT_EQ(e.sweep_index(), 1u);
  }
}
