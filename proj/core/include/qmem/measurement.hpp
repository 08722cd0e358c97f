#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmem/dynamics.hpp"
#include "qmem/hilbert.hpp"

namespace qmem {

/// Photon-number-selective transmon readout collapsed to an affine map of
/// the selected Fock population: p = baseline + contrast * P(n = selective_photon).
struct ReadoutModel {
  double contrast = 1.0;
  double baseline = 0.0;
  int selective_photon = 0;
  std::optional<int> shots;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// A sweep-indexed trace. `shot_fraction` is empty unless finite shots were sampled.
struct Dataset {
  std::string sweep_name;
  std::vector<double> sweep_values;
  std::vector<double> probability;
  std::optional<int> shots_per_point;
  std::vector<double> shot_fraction;

  void validate() const;
  /// The values a fit should use: shot fractions when present, else probabilities.
  [[nodiscard]] const std::vector<double>& observed() const;
};

double readout_probability(const QuantumState& state, const ReadoutModel& ro);
double readout_probability(const QuantumState& state, const ReadoutModel& ro, int selective_photon);

/// Binomial(shots, p) / shots, drawn from a stream keyed only by (ro.rng_seed, index).
double sample_shots(double p, const ReadoutModel& ro, std::uint64_t index);

/// diag((-1)^n) (x) I on the product space.
ComplexMatrix parity_operator(const HilbertDims& dims);

struct WignerGridSpec {
  double re_min = -2.5;
  double re_max = 2.5;
  double im_min = -2.5;
  double im_max = 2.5;
  int n_re = 61;
  int n_im = 61;
};

struct WignerGrid {
  WignerGridSpec spec;
  std::vector<double> re;
  std::vector<double> im;
  /// values(i, j) = W(re[i] + i im[j]).
  Eigen::MatrixXd values;

  /// Riemann sum of W over the grid cells.
  [[nodiscard]] double integral() const;
};

/// Largest |Re| or |Im| bound allowed for a truncation of n_cav levels.
double wigner_bound_limit(int n_cav);

/// W(alpha) = (2/pi) Tr[D(alpha) P D^dag(alpha) rho_cav] at a single point.
double wigner_at(const ComplexMatrix& rho_cavity, Complex alpha);

WignerGrid wigner(const QuantumState& state, const WignerGridSpec& spec = {});

struct NbarOptions {
  /// Initial settling time in units of cavity_T1.
  double settle_T1 = 10.0;
  /// Extra settling per retry, and the hard limit.
  double extend_T1 = 5.0;
  double max_T1 = 40.0;
  /// |L rho|_max * cavity_T1 below which the state counts as stationary.
  double residual_tol = 1e-6;
  EvolveOptions evolve{};
};

struct NbarEstimate {
  double nbar;
  double p0;
  double settle_time;
  double residual;
};

/// Steady-state thermal occupation from the readout's vacuum probability:
/// nbar ~= -ln P(0).
NbarEstimate nbar_estimate_detail(const DeviceModel& model, const HilbertDims& dims, const ReadoutModel& ro,
                                  const NbarOptions& options = {});
double nbar_estimate(const DeviceModel& model, const HilbertDims& dims, const ReadoutModel& ro,
                     const NbarOptions& options = {});

}  // namespace qmem
