#pragma once

// Embedded Dormand-Prince 5(4) integrator with adaptive step control.
//
// Works on any Eigen dense type (real or complex). Error is measured with the
// usual mixed absolute/relative RMS norm over all entries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace qmem {

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time_reached)
      : std::runtime_error(what), time_reached_(time_reached) {}
  [[nodiscard]] double time_reached() const { return time_reached_; }

 private:
  double time_reached_;
};

struct AdaptiveOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  /// 0 selects the step automatically.
  double initial_step = 0.0;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 20'000'000;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

namespace detail {

template <class M>
double error_norm(const M& err, const M& y0, const M& y1, double atol, double rtol) {
  const auto scale = (atol + rtol * y0.cwiseAbs().array().max(y1.cwiseAbs().array()));
  const double mean = (err.cwiseAbs().array() / scale).square().mean();
  return std::sqrt(mean);
}

// Dormand-Prince tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
// b - b_hat, the embedded error weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace detail

/// Integrates dy/dt = rhs(t, y) from t0 to t1 in place.
///
/// `on_accept(t, y)` runs after every accepted step and may modify y; it must
/// return true when it did, so the cached derivative is refreshed.
template <class M, class Rhs, class OnAccept>
IntegrationStats integrate_dopri5(Rhs&& rhs, M& y, double t0, double t1, const AdaptiveOptions& opt,
                                  OnAccept&& on_accept) {
  using namespace detail;
  IntegrationStats stats;
  if (!(t1 >= t0)) throw std::invalid_argument("integrate_dopri5: t1 must be >= t0");
  if (t1 == t0) return stats;

  const double span = t1 - t0;
  M k1 = rhs(t0, y);
  ++stats.rhs_evaluations;

  double h = opt.initial_step;
  if (h <= 0.0) {
    // Hairer & Wanner starting-step heuristic.
    const M zero = M::Zero(y.rows(), y.cols());
    const double d0 = error_norm(y, y, zero, opt.atol, opt.rtol);
    const double d1 = error_norm(k1, y, zero, opt.atol, opt.rtol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const M y1 = y + h0 * k1;
    const M f1 = rhs(t0 + h0, y1);
    ++stats.rhs_evaluations;
    const double d2 = error_norm(M(f1 - k1), y, zero, opt.atol, opt.rtol) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    h = std::min(100.0 * h0, h1);
  }
  h = std::min({h, span, opt.max_step});

  double t = t0;
  double err_prev = 1e-4;
  bool last_rejected = false;
  while (t < t1) {
    if (stats.accepted + stats.rejected >= opt.max_steps) {
      throw IntegrationError("integrate_dopri5: step budget exhausted", t);
    }
    const double remaining = t1 - t;
    const bool final_step = h >= remaining;
    if (final_step) h = remaining;
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), span)) {
      throw IntegrationError("integrate_dopri5: step size underflow", t);
    }

    const M k2 = rhs(t + c2 * h, M(y + h * (a21 * k1)));
    const M k3 = rhs(t + c3 * h, M(y + h * (a31 * k1 + a32 * k2)));
    const M k4 = rhs(t + c4 * h, M(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const M k5 = rhs(t + c5 * h, M(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const M k6 = rhs(t + h, M(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    M y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    M k7 = rhs(t + h, y_new);
    stats.rhs_evaluations += 6;

    const M err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err_norm = error_norm(err, y, y_new, opt.atol, opt.rtol);

    if (std::isfinite(err_norm) && err_norm <= 1.0) {
      t = final_step ? t1 : t + h;
      y = std::move(y_new);
      if (on_accept(t, y)) {
        k1 = rhs(t, y);
        ++stats.rhs_evaluations;
      } else {
        k1 = std::move(k7);
      }
      ++stats.accepted;
      // PI controller (Gustafsson), exponents 0.7/5 and 0.4/5.
      const double e = std::max(err_norm, 1e-10);
      double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h = std::min(h * fac, opt.max_step);
      err_prev = e;
      last_rejected = false;
    } else {
      ++stats.rejected;
      const double fac = std::isfinite(err_norm) ? std::max(0.2, 0.9 * std::pow(err_norm, -0.2)) : 0.1;
      h *= fac;
      last_rejected = true;
    }
  }
  return stats;
}

template <class M, class Rhs>
IntegrationStats integrate_dopri5(Rhs&& rhs, M& y, double t0, double t1, const AdaptiveOptions& opt) {
  return integrate_dopri5(std::forward<Rhs>(rhs), y, t0, t1, opt, [](double, M&) { return false; });
}

}  // namespace qmem
