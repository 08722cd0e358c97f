#include "qmem/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace qmem {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void ReadoutModel::validate() const {
  if (!(contrast > 0.0 && contrast <= 1.0)) throw DomainError("ReadoutModel: contrast must be in (0, 1]");
  if (!(baseline >= 0.0 && baseline < 1.0)) throw DomainError("ReadoutModel: baseline must be in [0, 1)");
  if (baseline + contrast > 1.0 + 1e-12) throw DomainError("ReadoutModel: baseline + contrast exceeds 1");
  if (selective_photon < 0) throw DomainError("ReadoutModel: selective_photon must be >= 0");
  if (shots && *shots < 1) throw DomainError("ReadoutModel: shots must be >= 1");
}

void Dataset::validate() const {
  if (sweep_values.size() != probability.size()) throw DomainError("Dataset: column lengths differ");
  if (!shot_fraction.empty() && shot_fraction.size() != probability.size()) {
    throw DomainError("Dataset: shot column length differs");
  }
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!std::all_of(probability.begin(), probability.end(), in_unit) ||
      !std::all_of(shot_fraction.begin(), shot_fraction.end(), in_unit)) {
    throw DomainError("Dataset: probabilities must lie in [0, 1]");
  }
}

const std::vector<double>& Dataset::observed() const {
  return shot_fraction.empty() ? probability : shot_fraction;
}

double readout_probability(const QuantumState& state, const ReadoutModel& ro, int selective_photon) {
  const auto& dims = state.dims();
  if (selective_photon < 0 || selective_photon >= dims.n_cav) {
    throw DomainError("readout_probability: selective photon number outside truncation");
  }
  double pop = 0.0;
  for (int q = 0; q < dims.n_qubit; ++q) {
    const int i = dims.index(selective_photon, q);
    pop += state.rho()(i, i).real();
  }
  return ro.baseline + ro.contrast * pop;
}

double readout_probability(const QuantumState& state, const ReadoutModel& ro) {
  return readout_probability(state, ro, ro.selective_photon);
}

double sample_shots(double p, const ReadoutModel& ro, std::uint64_t index) {
  if (!ro.shots) throw DomainError("sample_shots: readout model has no shot count");
  const double pc = std::clamp(p, 0.0, 1.0);
  const int shots = *ro.shots;
  // mt19937_64 output is fixed by the standard; uniform doubles are built by
  // hand so the stream does not depend on the library's distributions.
  std::mt19937_64 gen(splitmix64(ro.rng_seed ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
  int hits = 0;
  for (int s = 0; s < shots; ++s) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    if (u < pc) ++hits;
  }
  return static_cast<double>(hits) / shots;
}

ComplexMatrix parity_operator(const HilbertDims& dims) {
  dims.validate();
  ComplexMatrix p = ComplexMatrix::Zero(dims.n_cav, dims.n_cav);
  for (int n = 0; n < dims.n_cav; ++n) p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return tensor_lift(p, Factor::Cavity, dims);
}

// ---------------------------------------------------------------------------

double WignerGrid::integral() const {
  const double dx = re.size() > 1 ? (spec.re_max - spec.re_min) / (spec.n_re - 1) : 1.0;
  const double dy = im.size() > 1 ? (spec.im_max - spec.im_min) / (spec.n_im - 1) : 1.0;
  return values.sum() * dx * dy;
}

double wigner_bound_limit(int n_cav) { return std::sqrt(static_cast<double>(n_cav)) / 2.0; }

double wigner_at(const ComplexMatrix& rho_cavity, Complex alpha) {
  const int nc = static_cast<int>(rho_cavity.rows());
  // Columns of D(-alpha) restricted to the occupied levels, built in a padded
  // space so the sandwich is free of truncation error:
  //   D(-alpha)|n+1> = (a^dag + alpha*) D(-alpha)|n> / sqrt(n+1).
  const double reach = std::sqrt(static_cast<double>(nc)) + std::abs(alpha) + 7.0;
  const int k = static_cast<int>(std::ceil(reach * reach));
  ComplexMatrix cols(k, nc);
  cols.col(0) = coherent_ket(-alpha, k);
  const Complex ac = std::conj(alpha);
  for (int n = 0; n + 1 < nc; ++n) {
    const auto prev = cols.col(n);
    auto next = cols.col(n + 1);
    next(0) = ac * prev(0);
    for (int m = 1; m < k; ++m) next(m) = std::sqrt(static_cast<double>(m)) * prev(m - 1) + ac * prev(m);
    next /= std::sqrt(static_cast<double>(n + 1));
  }
  const ComplexMatrix c = cols * rho_cavity;
  double w = 0.0;
  for (int m = 0; m < k; ++m) {
    const double diag = c.row(m).dot(cols.row(m)).real();
    w += (m % 2 == 0) ? diag : -diag;
  }
  return 2.0 / std::numbers::pi * w;
}

WignerGrid wigner(const QuantumState& state, const WignerGridSpec& spec) {
  if (spec.n_re < 1 || spec.n_im < 1) throw DomainError("wigner: grid needs at least one point per axis");
  if (!(spec.re_max >= spec.re_min && spec.im_max >= spec.im_min)) throw DomainError("wigner: inverted bounds");
  const double limit = wigner_bound_limit(state.dims().n_cav);
  const double extent = std::max({std::abs(spec.re_min), std::abs(spec.re_max), std::abs(spec.im_min),
                                  std::abs(spec.im_max)});
  if (extent > limit + 1e-12) {
    std::ostringstream msg;
    msg << "wigner: grid bound " << extent << " exceeds sqrt(n_cav)/2 = " << limit << "; needs n_cav >= "
        << static_cast<int>(std::ceil(4.0 * extent * extent));
    throw DomainError(msg.str());
  }
  WignerGrid g;
  g.spec = spec;
  auto axis = [](double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
  };
  g.re = axis(spec.re_min, spec.re_max, spec.n_re);
  g.im = axis(spec.im_min, spec.im_max, spec.n_im);
  g.values.resize(spec.n_re, spec.n_im);
  const ComplexMatrix rho_c = state.cavity_reduced();
  for (int i = 0; i < spec.n_re; ++i) {
    for (int j = 0; j < spec.n_im; ++j) g.values(i, j) = wigner_at(rho_c, Complex(g.re[i], g.im[j]));
  }
  return g;
}

// ---------------------------------------------------------------------------

NbarEstimate nbar_estimate_detail(const DeviceModel& model, const HilbertDims& dims, const ReadoutModel& ro,
                                  const NbarOptions& options) {
  model.validate();
  ro.validate();
  const Liouvillian gen(model, dims);
  QuantumState state = fock_state(0, dims);
  double elapsed = options.settle_T1 * model.cavity_T1;
  state = evolve(state, gen, elapsed, options.evolve);
  auto residual = [&] { return gen.apply(state.rho()).cwiseAbs().maxCoeff() * model.cavity_T1; };
  double res = residual();
  while (res > options.residual_tol && elapsed < options.max_T1 * model.cavity_T1) {
    const double extra = options.extend_T1 * model.cavity_T1;
    state = evolve(state, gen, extra, options.evolve);
    elapsed += extra;
    res = residual();
  }
  if (res > options.residual_tol) {
    std::ostringstream msg;
    msg << "nbar_estimate: steady-state residual " << res << " after " << elapsed << " s";
    throw IntegrationError(msg.str(), elapsed);
  }
  const double measured = readout_probability(state, ro, 0);
  const double p0 = (measured - ro.baseline) / ro.contrast;
  if (!(p0 > 0.0)) throw DomainError("nbar_estimate: vacuum probability is not positive");
  return {std::max(0.0, -std::log(p0)), p0, elapsed, res};
}

double nbar_estimate(const DeviceModel& model, const HilbertDims& dims, const ReadoutModel& ro,
                     const NbarOptions& options) {
  return nbar_estimate_detail(model, dims, ro, options).nbar;
}

}  // namespace qmem
