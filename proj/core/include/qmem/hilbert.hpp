#pragma once

// Truncated Fock space for a storage cavity coupled to a transmon ancilla.
//
// Basis ordering is cavity (x) transmon: the product index of |n, q> is
// n * n_qubit + q. Every operator in this library follows that convention.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qmem {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical tolerances shared by every state check.
struct Tolerances {
  double hermiticity = 1e-12;
  double trace = 1e-10;
  double min_eigenvalue = -1e-9;
};

inline constexpr Tolerances kDefaultTolerances{};

struct HilbertDims {
  int n_cav = 20;
  int n_qubit = 2;

  /// Throws DomainError unless n_cav >= 2 and n_qubit is 2 or 3.
  void validate() const;
  [[nodiscard]] int dim() const { return n_cav * n_qubit; }
  [[nodiscard]] int index(int photon, int level) const { return photon * n_qubit + level; }

  friend bool operator==(const HilbertDims&, const HilbertDims&) = default;
};

enum class Factor { Cavity, Transmon };

struct StateDiagnostics {
  double hermiticity_error = 0.0;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;
};

/// Density matrix on the cavity (x) transmon product space.
class QuantumState {
 public:
  /// Validates Hermiticity, unit trace and positivity against `tol`.
  QuantumState(HilbertDims dims, ComplexMatrix rho, const Tolerances& tol = kDefaultTolerances);

  static QuantumState from_pure(HilbertDims dims, const ComplexVector& psi);

  /// Skips the eigenvalue check; for integrator output that is checked separately.
  static QuantumState trusted(HilbertDims dims, ComplexMatrix rho);

  [[nodiscard]] const HilbertDims& dims() const { return dims_; }
  [[nodiscard]] const ComplexMatrix& rho() const { return rho_; }

  [[nodiscard]] StateDiagnostics diagnostics() const;
  [[nodiscard]] double purity() const;

  /// Reduced density matrix of the cavity (transmon traced out).
  [[nodiscard]] ComplexMatrix cavity_reduced() const;
  /// Reduced density matrix of the transmon.
  [[nodiscard]] ComplexMatrix transmon_reduced() const;
  /// P(n) for n in [0, n_cav), transmon marginalized.
  [[nodiscard]] Eigen::VectorXd photon_distribution() const;

 private:
  QuantumState(HilbertDims dims, ComplexMatrix rho, int /*unchecked tag*/);

  HilbertDims dims_;
  ComplexMatrix rho_;
};

struct CoherentStateResult {
  QuantumState state;
  /// 1 - sum_n |<n|alpha>|^2 over the retained levels, before renormalization.
  double norm_deficit;
};

QuantumState fock_state(int n, const HilbertDims& dims);

/// Fock |n> on the cavity factor only (length n_cav).
ComplexVector fock_ket(int n, int n_cav);
/// Renormalized truncated coherent-state amplitudes on the cavity factor.
ComplexVector coherent_ket(Complex alpha, int n_cav, double* norm_deficit = nullptr);

/// |alpha> (x) |g>. Requires |alpha|^2 <= n_cav / 4.
CoherentStateResult coherent_state_with_diagnostics(Complex alpha, const HilbertDims& dims);
QuantumState coherent_state(Complex alpha, const HilbertDims& dims);

/// Cavity ket (x) transmon ground state, as a full product-space vector.
ComplexVector with_transmon_ground(const ComplexVector& cavity_ket, const HilbertDims& dims);

/// Cavity lowering operator, n_cav x n_cav.
ComplexMatrix annihilation_operator(const HilbertDims& dims);
/// Cavity a^dagger a, n_cav x n_cav.
ComplexMatrix number_operator(const HilbertDims& dims);
/// Transmon lowering operator sum_q sqrt(q) |q-1><q|, n_qubit x n_qubit.
ComplexMatrix transmon_lowering(const HilbertDims& dims);

/// Kronecker product with the identity on the other factor.
ComplexMatrix tensor_lift(const ComplexMatrix& op, Factor which, const HilbertDims& dims);

Complex expectation(const QuantumState& state, const ComplexMatrix& op);

/// <psi| rho |psi> for a pure target on the full product space.
double fidelity(const QuantumState& state, const ComplexVector& target);

}  // namespace qmem
