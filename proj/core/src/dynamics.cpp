#include "qmem/dynamics.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace qmem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_positive_time(double value, const char* name) {
  if (!(value > 0.0)) {
    throw DomainError(std::string("DeviceModel: ") + name + " must be > 0");
  }
}

bool is_diagonal(const ComplexMatrix& m) {
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != Complex(0.0, 0.0)) return false;
    }
  }
  return true;
}

}  // namespace

void DeviceModel::validate() const {
  require_positive_time(cavity_T1, "cavity_T1");
  require_positive_time(cavity_Tphi, "cavity_Tphi");
  require_positive_time(transmon_T1, "transmon_T1");
  require_positive_time(transmon_Tphi, "transmon_Tphi");
  if (!(nbar_th >= 0.0 && nbar_th < 1.0)) throw DomainError("DeviceModel: nbar_th must be in [0, 1)");
  if (!(transmon_Pe_th >= 0.0 && transmon_Pe_th < 0.5)) {
    throw DomainError("DeviceModel: transmon_Pe_th must be in [0, 0.5)");
  }
  if (!std::isfinite(chi_over_2pi) || !std::isfinite(chi_prime_over_2pi)) {
    throw DomainError("DeviceModel: dispersive shifts must be finite");
  }
}

double DeviceModel::expected_cavity_T2() const {
  return 1.0 / (1.0 / (2.0 * cavity_T1) + 1.0 / cavity_Tphi);
}

// ---------------------------------------------------------------------------

void PulseSequence::validate(const HilbertDims& dims) const {
  dims.validate();
  if (sweep.name.empty()) throw DomainError("PulseSequence: sweep has no name");
  if (sweep.values.empty()) throw DomainError("PulseSequence: sweep grid is empty");
  for (std::size_t i = 1; i < sweep.values.size(); ++i) {
    if (!(sweep.values[i] > sweep.values[i - 1])) {
      throw DomainError("PulseSequence: sweep grid must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const GateStep& s = steps[i];
    if (const auto* w = std::get_if<Wait>(&s)) {
      if (!(w->duration >= 0.0)) throw DomainError("PulseSequence: negative wait at step " + std::to_string(i));
      if (w->swept) {
        for (double v : sweep.values) {
          if (v < 0.0) throw DomainError("PulseSequence: swept wait with negative delay");
        }
      }
    } else if (const auto* sn = std::get_if<Snap>(&s)) {
      if (static_cast<int>(sn->phases.size()) > dims.n_cav) {
        throw DomainError("PulseSequence: SNAP phase list longer than n_cav at step " + std::to_string(i));
      }
    } else if (const auto* m = std::get_if<MeasureSelective>(&s)) {
      if (i + 1 != steps.size()) throw DomainError("PulseSequence: MeasureSelective must be the last step");
      if (m->photon < 0 || m->photon >= dims.n_cav) {
        throw DomainError("PulseSequence: selective photon number out of range");
      }
    } else if (const auto* r = std::get_if<TransmonRotation>(&s)) {
      if (r->selective_photon && (*r->selective_photon < 0 || *r->selective_photon >= dims.n_cav)) {
        throw DomainError("PulseSequence: rotation selectivity out of range");
      }
    }
  }
}

std::string describe(const GateStep& step) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Displace>) {
          os << "Displace(" << g.alpha.real() << (g.alpha.imag() < 0 ? "" : "+") << g.alpha.imag() << "i";
          if (g.phase_per_sweep_unit != 0.0) os << ", " << g.phase_per_sweep_unit << " rad/unit";
          os << ")";
        } else if constexpr (std::is_same_v<T, Snap>) {
          os << "Snap(" << g.phases.size() << " phases)";
        } else if constexpr (std::is_same_v<T, TransmonRotation>) {
          os << "Rotation(axis " << g.axis_angle << ", angle " << g.rotation_angle;
          if (g.selective_photon) os << ", n=" << *g.selective_photon;
          os << ")";
        } else if constexpr (std::is_same_v<T, Wait>) {
          os << "Wait(" << (g.swept ? std::string("sweep") : std::to_string(g.duration)) << ")";
        } else {
          os << "MeasureSelective(" << g.photon << ")";
        }
      },
      step);
  return os.str();
}

// ---------------------------------------------------------------------------

ComplexMatrix dispersive_hamiltonian(const DeviceModel& model, const HilbertDims& dims) {
  dims.validate();
  const int d = dims.dim();
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  const double chi = kTwoPi * model.chi_over_2pi;
  const double chi_prime = kTwoPi * model.chi_prime_over_2pi;
  for (int n = 0; n < dims.n_cav; ++n) {
    for (int q = 0; q < dims.n_qubit; ++q) {
      // a^dag a (x) b^dag b; for two levels b^dag b = |e><e|.
      const double nq = static_cast<double>(n) * q;
      const double kerr = 0.5 * static_cast<double>(n) * (n - 1) * q;
      h(dims.index(n, q), dims.index(n, q)) = -chi * nq - chi_prime * kerr;
    }
  }
  return h;
}

std::vector<ComplexMatrix> collapse_operators(const DeviceModel& model, const HilbertDims& dims) {
  model.validate();
  dims.validate();
  const ComplexMatrix a = tensor_lift(annihilation_operator(dims), Factor::Cavity, dims);
  const ComplexMatrix n_op = tensor_lift(number_operator(dims), Factor::Cavity, dims);
  const ComplexMatrix b = tensor_lift(transmon_lowering(dims), Factor::Transmon, dims);

  std::vector<ComplexMatrix> ops;
  auto push = [&ops](double rate, const ComplexMatrix& op) {
    if (rate > 0.0) ops.push_back(std::sqrt(rate) * op);
  };
  const double kappa = model.kappa();
  push(kappa * (1.0 + model.nbar_th), a);
  push(kappa * model.nbar_th, a.adjoint());
  if (std::isfinite(model.cavity_Tphi)) push(2.0 / model.cavity_Tphi, n_op);

  const double gamma1 = 1.0 / model.transmon_T1;
  const double pe = model.transmon_Pe_th;
  // Down/up rates chosen so the two-level fixed point has P_e = pe.
  push(gamma1 * (1.0 - pe), b);
  push(gamma1 * pe, b.adjoint());
  if (std::isfinite(model.transmon_Tphi)) {
    if (dims.n_qubit == 2) {
      ComplexMatrix sz = ComplexMatrix::Zero(2, 2);
      sz(0, 0) = 1.0;
      sz(1, 1) = -1.0;
      push(1.0 / (2.0 * model.transmon_Tphi), tensor_lift(sz, Factor::Transmon, dims));
    } else {
      // b^dag b dephasing; same g-e coherence decay as the sigma_z channel.
      push(2.0 / model.transmon_Tphi, b.adjoint() * b);
    }
  }
  return ops;
}

// ---------------------------------------------------------------------------

Liouvillian::Liouvillian(const DeviceModel& model, const HilbertDims& dims)
    : Liouvillian(dispersive_hamiltonian(model, dims), collapse_operators(model, dims)) {}

Liouvillian::Liouvillian(const ComplexMatrix& hamiltonian, const std::vector<ComplexMatrix>& jumps)
    : dim_(static_cast<int>(hamiltonian.rows())), sectors_(std::make_shared<Sectors>()) {
  if (hamiltonian.rows() != hamiltonian.cols()) throw DomainError("Liouvillian: Hamiltonian not square");
  h_eff_ = hamiltonian;
  std::vector<Eigen::VectorXcd> diagonal_jumps;
  for (const ComplexMatrix& l : jumps) {
    if (l.rows() != dim_ || l.cols() != dim_) throw DomainError("Liouvillian: jump operator dimension mismatch");
    all_jumps_.push_back(l.sparseView());
    h_eff_ -= Complex(0.0, 0.5) * (l.adjoint() * l);
    if (is_diagonal(l)) {
      diagonal_jumps.push_back(l.diagonal());
    } else {
      jumps_.push_back(l.sparseView());
      jumps_adj_.push_back(jumps_.back().adjoint());
    }
  }
  elementwise_ = is_diagonal(h_eff_);
  if (!elementwise_) {
    // Diagonal jumps go back to the general sandwich path.
    for (const auto& v : diagonal_jumps) {
      ComplexMatrix l = v.asDiagonal();
      jumps_.push_back(l.sparseView());
      jumps_adj_.push_back(jumps_.back().adjoint());
    }
    return;
  }
  const Eigen::VectorXcd h = h_eff_.diagonal();
  lambda_.resize(dim_, dim_);
  for (int j = 0; j < dim_; ++j) {
    for (int i = 0; i < dim_; ++i) {
      Complex v = Complex(0.0, -1.0) * (h(i) - std::conj(h(j)));
      for (const auto& l : diagonal_jumps) v += l(i) * std::conj(l(j));
      lambda_(i, j) = v;
    }
  }
}

ComplexMatrix Liouvillian::apply(const ComplexMatrix& rho) const {
  ComplexMatrix out;
  if (elementwise_) {
    out = lambda_.cwiseProduct(rho);
  } else {
    const Complex minus_i(0.0, -1.0);
    out = minus_i * (h_eff_ * rho) - minus_i * (rho * h_eff_.adjoint());
  }
  for (std::size_t k = 0; k < jumps_.size(); ++k) {
    const ComplexMatrix left = jumps_[k] * rho;
    out.noalias() += left * jumps_adj_[k];
  }
  return out;
}

Eigen::SparseMatrix<Complex> Liouvillian::superoperator() const {
  // vec(A rho B) = (B^T (x) A) vec(rho), column-major.
  const Eigen::Index d = dim_;
  std::vector<Eigen::Triplet<Complex>> trips;
  const Complex minus_i(0.0, -1.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const Complex h = h_eff_(i, j);
      if (h == Complex(0.0)) continue;
      for (Eigen::Index c = 0; c < d; ++c) {
        trips.emplace_back(c * d + i, c * d + j, minus_i * h);             // -i (I (x) H)
        trips.emplace_back(i * d + c, j * d + c, -minus_i * std::conj(h));  // +i (conj(H) (x) I)
      }
    }
  }
  for (const Sparse& l : all_jumps_) {
    for (int k1 = 0; k1 < l.outerSize(); ++k1) {
      for (Sparse::InnerIterator a(l, k1); a; ++a) {
        for (int k2 = 0; k2 < l.outerSize(); ++k2) {
          for (Sparse::InnerIterator b(l, k2); b; ++b) {
            // conj(L) (x) L: row (a.row, b.row), column (a.col, b.col).
            trips.emplace_back(a.row() * d + b.row(), a.col() * d + b.col(), std::conj(a.value()) * b.value());
          }
        }
      }
    }
  }
  Eigen::SparseMatrix<Complex> s(d * d, d * d);
  s.setFromTriplets(trips.begin(), trips.end());
  s.prune(Complex(0.0));
  return s;
}

struct Liouvillian::Sectors {
  std::once_flag once;
  std::vector<std::vector<Eigen::Index>> members;
  std::vector<ComplexMatrix> blocks;
};

ComplexMatrix Liouvillian::propagate(const ComplexMatrix& rho, double t) const {
  std::call_once(sectors_->once, [this] {
    const Eigen::SparseMatrix<Complex> s = superoperator();
    const Eigen::Index n = s.rows();
    std::vector<Eigen::Index> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Eigen::Index x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (int k = 0; k < s.outerSize(); ++k) {
      for (Eigen::SparseMatrix<Complex>::InnerIterator it(s, k); it; ++it) {
        parent[find(it.row())] = find(it.col());
      }
    }
    std::vector<Eigen::Index> slot(n, -1);
    for (Eigen::Index v = 0; v < n; ++v) {
      const Eigen::Index root = find(v);
      if (slot[root] < 0) {
        slot[root] = static_cast<Eigen::Index>(sectors_->members.size());
        sectors_->members.emplace_back();
      }
      sectors_->members[slot[root]].push_back(v);
    }
    std::vector<Eigen::Index> position(n);
    for (const auto& m : sectors_->members) {
      for (std::size_t i = 0; i < m.size(); ++i) position[m[i]] = static_cast<Eigen::Index>(i);
      sectors_->blocks.push_back(ComplexMatrix::Zero(m.size(), m.size()));
    }
    for (int k = 0; k < s.outerSize(); ++k) {
      for (Eigen::SparseMatrix<Complex>::InnerIterator it(s, k); it; ++it) {
        sectors_->blocks[slot[find(it.row())]](position[it.row()], position[it.col()]) = it.value();
      }
    }
  });

  if (rho.rows() != dim_ || rho.cols() != dim_) throw DomainError("propagate: state dimension mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(dim_, dim_);
  const Complex* in = rho.data();
  Complex* res = out.data();
  for (std::size_t k = 0; k < sectors_->members.size(); ++k) {
    const auto& m = sectors_->members[k];
    Eigen::VectorXcd v(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) v(i) = in[m[i]];
    if (v.isZero(0.0)) continue;
    const ComplexMatrix u = (t * sectors_->blocks[k]).exp();
    const Eigen::VectorXcd w = u * v;
    for (std::size_t i = 0; i < m.size(); ++i) res[m[i]] = w(i);
  }
  return out;
}

QuantumState evolve(const QuantumState& state, const Liouvillian& generator, double duration,
                    const EvolveOptions& options, IntegrationStats* stats) {
  if (!(duration >= 0.0)) throw DomainError("evolve: duration must be >= 0");
  if (generator.dim() != state.dims().dim()) throw DomainError("evolve: generator dimension mismatch");
  if (duration == 0.0) return state;

  ComplexMatrix rho = state.rho();
  if (options.method == EvolveMethod::Exponential) {
    rho = generator.propagate(rho, duration);
    rho = (0.5 * (rho + rho.adjoint())).eval();
    if (stats != nullptr) *stats = IntegrationStats{};
  } else {
    auto rhs = [&generator](double, const ComplexMatrix& r) { return generator.apply(r); };
    auto symmetrize = [](double, ComplexMatrix& r) {
      r = (0.5 * (r + r.adjoint())).eval();
      return true;
    };
    const IntegrationStats s = integrate_dopri5(rhs, rho, 0.0, duration, options.integrator, symmetrize);
    if (stats != nullptr) *stats = s;
  }

  const double drift = std::abs(rho.trace() - state.rho().trace());
  if (drift > options.max_trace_drift) {
    std::ostringstream msg;
    msg << "evolve: trace drifted by " << drift;
    throw IntegrationError(msg.str(), duration);
  }
  return QuantumState::trusted(state.dims(), std::move(rho));
}

QuantumState evolve(const QuantumState& state, const DeviceModel& model, double duration,
                    const EvolveOptions& options) {
  return evolve(state, Liouvillian(model, state.dims()), duration, options);
}

// ---------------------------------------------------------------------------

ComplexMatrix displacement_operator(Complex alpha, int n_cav) {
  HilbertDims dims{n_cav, 2};
  const ComplexMatrix a = annihilation_operator(dims);
  const ComplexMatrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
  return gen.exp();
}

ComplexMatrix snap_operator(const std::vector<double>& phases, int n_cav) {
  if (static_cast<int>(phases.size()) > n_cav) throw DomainError("snap: more phases than Fock levels");
  ComplexMatrix s = ComplexMatrix::Identity(n_cav, n_cav);
  for (std::size_t n = 0; n < phases.size(); ++n) s(n, n) = std::polar(1.0, phases[n]);
  return s;
}

ComplexMatrix transmon_rotation_operator(double axis_angle, double rotation_angle, int n_qubit) {
  ComplexMatrix r = ComplexMatrix::Identity(n_qubit, n_qubit);
  const double c = std::cos(0.5 * rotation_angle);
  const double s = std::sin(0.5 * rotation_angle);
  // -i sin(theta/2) (cos(phi) X + sin(phi) Y), basis (g, e).
  r(0, 0) = c;
  r(1, 1) = c;
  r(0, 1) = Complex(0.0, -s) * std::polar(1.0, -axis_angle);
  r(1, 0) = Complex(0.0, -s) * std::polar(1.0, axis_angle);
  return r;
}

ComplexMatrix gate_unitary(const GateStep& step, const HilbertDims& dims, double sweep_value) {
  dims.validate();
  return std::visit(
      [&](const auto& g) -> ComplexMatrix {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Displace>) {
          const Complex alpha = g.alpha * std::polar(1.0, g.phase_per_sweep_unit * sweep_value);
          return tensor_lift(displacement_operator(alpha, dims.n_cav), Factor::Cavity, dims);
        } else if constexpr (std::is_same_v<T, Snap>) {
          return tensor_lift(snap_operator(g.phases, dims.n_cav), Factor::Cavity, dims);
        } else if constexpr (std::is_same_v<T, TransmonRotation>) {
          const ComplexMatrix r = transmon_rotation_operator(g.axis_angle, g.rotation_angle, dims.n_qubit);
          if (!g.selective_photon) return tensor_lift(r, Factor::Transmon, dims);
          const int sel = *g.selective_photon;
          if (sel < 0 || sel >= dims.n_cav) throw DomainError("rotation selectivity out of range");
          ComplexMatrix u = ComplexMatrix::Identity(dims.dim(), dims.dim());
          const int base = dims.index(sel, 0);
          u.block(base, base, dims.n_qubit, dims.n_qubit) = r;
          return u;
        } else {
          throw DomainError("gate_unitary: " + describe(step) + " is not a unitary gate");
        }
      },
      step);
}

QuantumState apply_gate(const QuantumState& state, const GateStep& step, const HilbertDims& dims,
                        double sweep_value) {
  if (!(state.dims() == dims)) throw DomainError("apply_gate: state dimensions differ from dims");
  const ComplexMatrix u = gate_unitary(step, dims, sweep_value);
  ComplexMatrix rho = u * state.rho() * u.adjoint();
  rho = (0.5 * (rho + rho.adjoint())).eval();
  return QuantumState::trusted(dims, std::move(rho));
}

// ---------------------------------------------------------------------------

std::vector<GateStep> SnapRecipe::steps() const {
  std::vector<GateStep> out;
  for (std::size_t i = 0; i < displacements.size(); ++i) {
    out.emplace_back(Displace{displacements[i], 0.0});
    if (i < snap_phases.size()) out.emplace_back(Snap{snap_phases[i]});
  }
  return out;
}

ComplexVector SnapRecipe::prepare(int n_cav) const {
  ComplexVector psi = fock_ket(0, n_cav);
  for (std::size_t i = 0; i < displacements.size(); ++i) {
    psi = displacement_operator(displacements[i], n_cav) * psi;
    if (i < snap_phases.size()) {
      for (std::size_t n = 0; n < snap_phases[i].size() && static_cast<int>(n) < n_cav; ++n) {
        psi(n) *= std::polar(1.0, snap_phases[i][n]);
      }
    }
  }
  return psi;
}

// Constants produced by calibrate_snap_recipe (fitting module) at n_cav = 20.
SnapRecipe snap_recipe_fock1_single_layer() {
  return SnapRecipe{{Complex(1.1429793, 0.0), Complex(-0.5802917, 0.0)}, {{std::numbers::pi}}};
}

SnapRecipe snap_recipe_fock1() {
  return SnapRecipe{{Complex(0.60863114, 0.0), Complex(-0.60336554, 0.0), Complex(0.60530166, 0.0)},
                    {{-0.38048730, 3.06736593, -0.06798616}, {3.50769106, 0.18734584, 0.02534002}}};
}

SnapRecipe snap_recipe_superposition() {
  return SnapRecipe{{Complex(-0.56078321, 0.0), Complex(0.24343839, 0.0)}, {{std::numbers::pi}}};
}

std::vector<GateStep> snap_prepare_fock1(const HilbertDims& dims) {
  dims.validate();
  return snap_recipe_fock1().steps();
}

std::vector<GateStep> snap_prepare_superposition(const HilbertDims& dims) {
  dims.validate();
  return snap_recipe_superposition().steps();
}

}  // namespace qmem
