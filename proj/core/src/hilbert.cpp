#include "qmem/hilbert.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace qmem {

void HilbertDims::validate() const {
  if (n_cav < 2) {
    throw DomainError("HilbertDims: n_cav must be >= 2, got " + std::to_string(n_cav));
  }
  if (n_qubit != 2 && n_qubit != 3) {
    throw DomainError("HilbertDims: n_qubit must be 2 or 3, got " + std::to_string(n_qubit));
  }
}

QuantumState::QuantumState(HilbertDims dims, ComplexMatrix rho, int) : dims_(dims), rho_(std::move(rho)) {}

QuantumState::QuantumState(HilbertDims dims, ComplexMatrix rho, const Tolerances& tol)
    : dims_(dims), rho_(std::move(rho)) {
  dims_.validate();
  if (rho_.rows() != dims_.dim() || rho_.cols() != dims_.dim()) {
    throw DomainError("QuantumState: density matrix is " + std::to_string(rho_.rows()) + "x" +
                      std::to_string(rho_.cols()) + ", expected " + std::to_string(dims_.dim()));
  }
  const StateDiagnostics d = diagnostics();
  if (d.hermiticity_error > tol.hermiticity) {
    throw DomainError("QuantumState: not Hermitian (max |rho - rho^dag| = " +
                      std::to_string(d.hermiticity_error) + ")");
  }
  if (d.trace_error > tol.trace) {
    throw DomainError("QuantumState: trace deviates from 1 by " + std::to_string(d.trace_error));
  }
  if (d.min_eigenvalue < tol.min_eigenvalue) {
    throw DomainError("QuantumState: negative eigenvalue " + std::to_string(d.min_eigenvalue));
  }
}

QuantumState QuantumState::from_pure(HilbertDims dims, const ComplexVector& psi) {
  ComplexMatrix rho = psi * psi.adjoint();
  return QuantumState(dims, std::move(rho));
}

QuantumState QuantumState::trusted(HilbertDims dims, ComplexMatrix rho) {
  return QuantumState(dims, std::move(rho), 0);
}

StateDiagnostics QuantumState::diagnostics() const {
  StateDiagnostics d;
  d.hermiticity_error = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  d.trace_error = std::abs(rho_.trace() - Complex(1.0, 0.0));
  const ComplexMatrix herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

double QuantumState::purity() const { return (rho_ * rho_).trace().real(); }

ComplexMatrix QuantumState::cavity_reduced() const {
  const int nc = dims_.n_cav;
  const int nq = dims_.n_qubit;
  ComplexMatrix out = ComplexMatrix::Zero(nc, nc);
  for (int n = 0; n < nc; ++n) {
    for (int m = 0; m < nc; ++m) {
      Complex s = 0.0;
      for (int q = 0; q < nq; ++q) s += rho_(dims_.index(n, q), dims_.index(m, q));
      out(n, m) = s;
    }
  }
  return out;
}

ComplexMatrix QuantumState::transmon_reduced() const {
  const int nc = dims_.n_cav;
  const int nq = dims_.n_qubit;
  ComplexMatrix out = ComplexMatrix::Zero(nq, nq);
  for (int q = 0; q < nq; ++q) {
    for (int p = 0; p < nq; ++p) {
      Complex s = 0.0;
      for (int n = 0; n < nc; ++n) s += rho_(dims_.index(n, q), dims_.index(n, p));
      out(q, p) = s;
    }
  }
  return out;
}

Eigen::VectorXd QuantumState::photon_distribution() const {
  Eigen::VectorXd p(dims_.n_cav);
  for (int n = 0; n < dims_.n_cav; ++n) {
    double s = 0.0;
    for (int q = 0; q < dims_.n_qubit; ++q) {
      const int i = dims_.index(n, q);
      s += rho_(i, i).real();
    }
    p(n) = s;
  }
  return p;
}

ComplexVector fock_ket(int n, int n_cav) {
  if (n < 0 || n >= n_cav) {
    throw DomainError("fock state |" + std::to_string(n) + "> outside truncation n_cav = " +
                      std::to_string(n_cav));
  }
  ComplexVector v = ComplexVector::Zero(n_cav);
  v(n) = 1.0;
  return v;
}

ComplexVector with_transmon_ground(const ComplexVector& cavity_ket, const HilbertDims& dims) {
  ComplexVector psi = ComplexVector::Zero(dims.dim());
  for (int n = 0; n < dims.n_cav; ++n) psi(dims.index(n, 0)) = cavity_ket(n);
  return psi;
}

QuantumState fock_state(int n, const HilbertDims& dims) {
  dims.validate();
  return QuantumState::from_pure(dims, with_transmon_ground(fock_ket(n, dims.n_cav), dims));
}

ComplexVector coherent_ket(Complex alpha, int n_cav, double* norm_deficit) {
  ComplexVector v(n_cav);
  // Recurrence c_n = c_{n-1} * alpha / sqrt(n) avoids overflow in alpha^n / sqrt(n!).
  Complex c = std::exp(-0.5 * std::norm(alpha));
  double norm2 = 0.0;
  for (int n = 0; n < n_cav; ++n) {
    if (n > 0) c *= alpha / std::sqrt(static_cast<double>(n));
    v(n) = c;
    norm2 += std::norm(c);
  }
  if (norm_deficit != nullptr) *norm_deficit = 1.0 - norm2;
  v /= std::sqrt(norm2);
  return v;
}

CoherentStateResult coherent_state_with_diagnostics(Complex alpha, const HilbertDims& dims) {
  dims.validate();
  const double n_mean = std::norm(alpha);
  if (n_mean > dims.n_cav / 4.0) {
    const int required = static_cast<int>(std::ceil(4.0 * n_mean));
    std::ostringstream msg;
    msg << "coherent state |alpha|^2 = " << n_mean << " needs n_cav >= " << required << " (have "
        << dims.n_cav << ")";
    throw DomainError(msg.str());
  }
  double deficit = 0.0;
  const ComplexVector cav = coherent_ket(alpha, dims.n_cav, &deficit);
  return {QuantumState::from_pure(dims, with_transmon_ground(cav, dims)), deficit};
}

QuantumState coherent_state(Complex alpha, const HilbertDims& dims) {
  return coherent_state_with_diagnostics(alpha, dims).state;
}

ComplexMatrix annihilation_operator(const HilbertDims& dims) {
  ComplexMatrix a = ComplexMatrix::Zero(dims.n_cav, dims.n_cav);
  for (int n = 1; n < dims.n_cav; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

ComplexMatrix number_operator(const HilbertDims& dims) {
  ComplexMatrix num = ComplexMatrix::Zero(dims.n_cav, dims.n_cav);
  for (int n = 0; n < dims.n_cav; ++n) num(n, n) = static_cast<double>(n);
  return num;
}

ComplexMatrix transmon_lowering(const HilbertDims& dims) {
  ComplexMatrix b = ComplexMatrix::Zero(dims.n_qubit, dims.n_qubit);
  for (int q = 1; q < dims.n_qubit; ++q) b(q - 1, q) = std::sqrt(static_cast<double>(q));
  return b;
}

ComplexMatrix tensor_lift(const ComplexMatrix& op, Factor which, const HilbertDims& dims) {
  const int expected = which == Factor::Cavity ? dims.n_cav : dims.n_qubit;
  if (op.rows() != expected || op.cols() != expected) {
    throw DomainError("tensor_lift: operator is " + std::to_string(op.rows()) + "x" +
                      std::to_string(op.cols()) + ", factor dimension is " + std::to_string(expected));
  }
  if (which == Factor::Cavity) {
    return Eigen::kroneckerProduct(op, ComplexMatrix::Identity(dims.n_qubit, dims.n_qubit)).eval();
  }
  return Eigen::kroneckerProduct(ComplexMatrix::Identity(dims.n_cav, dims.n_cav), op).eval();
}

Complex expectation(const QuantumState& state, const ComplexMatrix& op) {
  const auto& rho = state.rho();
  if (op.rows() != rho.rows() || op.cols() != rho.cols()) {
    throw DomainError("expectation: operator dimension " + std::to_string(op.rows()) +
                      " does not match state dimension " + std::to_string(rho.rows()));
  }
  // Tr(rho op) without forming the product.
  return (rho.transpose().cwiseProduct(op)).sum();
}

double fidelity(const QuantumState& state, const ComplexVector& target) {
  if (target.size() != state.rho().rows()) {
    throw DomainError("fidelity: target dimension mismatch");
  }
  const ComplexVector n = target.normalized();
  return (n.adjoint() * state.rho() * n)(0, 0).real();
}

}  // namespace qmem
