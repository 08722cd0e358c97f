#pragma once

// Open-system dynamics of the dispersively coupled cavity-transmon pair, and
// the ideal instantaneous gates used by the measurement sequences.

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Sparse>

#include "qmem/hilbert.hpp"
#include "qmem/ode.hpp"

namespace qmem {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Physical parameters. SI units throughout: seconds and hertz.
struct DeviceModel {
  double chi_over_2pi = 500e3;
  /// Second-order dispersive shift; zero unless explicitly configured.
  double chi_prime_over_2pi = 0.0;
  double cavity_T1 = 1.4e-3;
  double cavity_Tphi = kInf;
  double nbar_th = 0.0;
  double transmon_T1 = 35e-6;
  double transmon_Tphi = kInf;
  double transmon_Pe_th = 0.0;
  // Bookkeeping only; the simulation runs in the rotating frame of both modes.
  double f_storage = 5.4e9;
  double f_transmon = 6.3e9;
  double f_readout = 8.9e9;

  void validate() const;
  [[nodiscard]] double kappa() const { return 1.0 / cavity_T1; }
  /// 1/T2 = 1/(2 T1) + 1/Tphi for a single-photon superposition.
  [[nodiscard]] double expected_cavity_T2() const;
};

// ---------------------------------------------------------------------------
// Gate program

struct Displace {
  Complex alpha{0.0, 0.0};
  /// Extra phase per unit of the swept parameter (artificial detuning).
  double phase_per_sweep_unit = 0.0;
};

struct Snap {
  /// Phase on Fock level n; levels past the list are left alone.
  std::vector<double> phases;
};

struct TransmonRotation {
  double axis_angle = 0.0;
  double rotation_angle = 0.0;
  /// Acts only on this photon-number subspace when set.
  std::optional<int> selective_photon;
};

struct Wait {
  double duration = 0.0;
  /// Duration is taken from the sweep value.
  bool swept = false;
};

/// Marks the readout point and its photon-number selectivity. Must be last.
struct MeasureSelective {
  int photon = 0;
};

using GateStep = std::variant<Displace, Snap, TransmonRotation, Wait, MeasureSelective>;

struct Sweep {
  std::string name;
  std::vector<double> values;
};

struct PulseSequence {
  std::vector<GateStep> steps;
  Sweep sweep;

  /// Throws DomainError on malformed steps, an empty or non-monotone grid.
  void validate(const HilbertDims& dims) const;
};

std::string describe(const GateStep& step);

// ---------------------------------------------------------------------------
// Generators

/// H / hbar in rad/s, rotating frame of both bare modes.
ComplexMatrix dispersive_hamiltonian(const DeviceModel& model, const HilbertDims& dims);

/// Lindblad jump operators with rates folded in; zero-rate channels are dropped.
std::vector<ComplexMatrix> collapse_operators(const DeviceModel& model, const HilbertDims& dims);

/// Sparse Lindblad generator: drho/dt = -i[H, rho] + sum_k D[L_k] rho.
class Liouvillian {
 public:
  Liouvillian(const ComplexMatrix& hamiltonian, const std::vector<ComplexMatrix>& jumps);
  Liouvillian(const DeviceModel& model, const HilbertDims& dims);

  [[nodiscard]] ComplexMatrix apply(const ComplexMatrix& rho) const;
  [[nodiscard]] int dim() const { return dim_; }

  /// Generator acting on column-major vec(rho), size dim^2.
  [[nodiscard]] Eigen::SparseMatrix<Complex> superoperator() const;

  /// exp(L t) rho, exactly, by exponentiating each invariant sector of the
  /// superoperator. Sectors are found once and shared between copies.
  [[nodiscard]] ComplexMatrix propagate(const ComplexMatrix& rho, double t) const;

 private:
  using Sparse = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;
  struct Sectors;

  int dim_ = 0;
  std::vector<Sparse> all_jumps_;
  std::shared_ptr<Sectors> sectors_;
  // Elementwise part: Hamiltonian, anticommutator and diagonal jump terms.
  bool elementwise_ = false;
  ComplexMatrix lambda_;
  // General fallback when H_eff is not diagonal.
  ComplexMatrix h_eff_;
  std::vector<Sparse> jumps_;
  std::vector<Sparse> jumps_adj_;
};

enum class EvolveMethod {
  /// Dormand-Prince 5(4).
  Adaptive,
  /// Sector-wise matrix exponential of the generator.
  Exponential,
};

struct EvolveOptions {
  EvolveMethod method = EvolveMethod::Adaptive;
  AdaptiveOptions integrator{};
  /// Allowed |Tr rho - 1| after integration.
  double max_trace_drift = 1e-8;
};

QuantumState evolve(const QuantumState& state, const Liouvillian& generator, double duration,
                    const EvolveOptions& options = {}, IntegrationStats* stats = nullptr);
QuantumState evolve(const QuantumState& state, const DeviceModel& model, double duration,
                    const EvolveOptions& options = {});

// ---------------------------------------------------------------------------
// Gates

/// exp(alpha a^dag - alpha* a) on the cavity factor.
ComplexMatrix displacement_operator(Complex alpha, int n_cav);
/// diag(e^{i theta_n}) on the cavity factor.
ComplexMatrix snap_operator(const std::vector<double>& phases, int n_cav);
/// exp(-i theta/2 (cos(phi) X + sin(phi) Y)) on the g-e pair of the transmon.
ComplexMatrix transmon_rotation_operator(double axis_angle, double rotation_angle, int n_qubit);

/// Full product-space unitary of a gate step. `sweep_value` feeds swept parameters.
ComplexMatrix gate_unitary(const GateStep& step, const HilbertDims& dims, double sweep_value = 0.0);

QuantumState apply_gate(const QuantumState& state, const GateStep& step, const HilbertDims& dims,
                        double sweep_value = 0.0);

// ---------------------------------------------------------------------------
// SNAP state preparation

/// Alternating displacements and SNAPs: D(b_0) S(theta_0) D(b_1) ... D(b_L).
struct SnapRecipe {
  std::vector<Complex> displacements;
  std::vector<std::vector<double>> snap_phases;

  [[nodiscard]] int layers() const { return static_cast<int>(snap_phases.size()); }
  [[nodiscard]] std::vector<GateStep> steps() const;
  /// Cavity ket produced from vacuum.
  [[nodiscard]] ComplexVector prepare(int n_cav) const;
};

/// Stored result of the one-layer calibration towards |1>.
SnapRecipe snap_recipe_fock1_single_layer();
/// Stored result of the two-layer calibration towards |1>.
SnapRecipe snap_recipe_fock1();
/// Stored result of the one-layer calibration towards (|0> + |1>)/sqrt(2).
SnapRecipe snap_recipe_superposition();

/// Gate steps preparing |1> from vacuum (two-layer recipe).
std::vector<GateStep> snap_prepare_fock1(const HilbertDims& dims);
/// Gate steps preparing (|0> + |1>)/sqrt(2) from vacuum.
std::vector<GateStep> snap_prepare_superposition(const HilbertDims& dims);

}  // namespace qmem
