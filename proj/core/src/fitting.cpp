#include "qmem/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

namespace qmem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr std::array<std::string_view, 3> kSingleExpNames{"A", "T1", "C"};
constexpr std::array<std::string_view, 4> kCoherentNames{"A", "n0", "T1", "C"};
constexpr std::array<std::string_view, 5> kRamseyNames{"A", "T2", "Delta", "phi", "C"};

void check_params(FitModelKind kind, std::span<const double> p) {
  if (static_cast<int>(p.size()) != parameter_count(kind)) {
    throw DomainError("model: expected " + std::to_string(parameter_count(kind)) + " parameters");
  }
  const double tau = p[time_constant_index(kind)];
  if (!(tau > 0.0)) throw DomainError("model: time constant must be > 0");
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_flat(std::span<const double> y) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double scale = std::max(1.0, std::abs(mean_of(y)));
  if (*hi - *lo <= 1e-12 * scale) throw FlatDataError("fit: data are flat, nothing to fit");
}

/// Slope and intercept of an ordinary least-squares line.
std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

std::vector<double> guess_single_exp(std::span<const double> t, std::span<const double> y) {
  const std::size_t n = y.size();
  const std::size_t n_tail = std::max<std::size_t>(3, n / 10);
  const double c = mean_of(y.subspan(n - std::min(n_tail, n)));
  const double a = y[0] - c;
  const double span = t.back() - t.front();
  std::vector<double> xs;
  std::vector<double> ls;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (y[i] - c) * (a >= 0 ? 1.0 : -1.0);
    if (d > 0.1 * std::abs(a)) {
      xs.push_back(t[i]);
      ls.push_back(std::log(d));
    }
  }
  double tau = span / 5.0;
  if (xs.size() >= 2) {
    const auto [slope, intercept] = line_fit(xs, ls);
    (void)intercept;
    if (slope < 0.0) tau = -1.0 / slope;
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) tau = span / 5.0;
  return {a, tau, c};
}

std::vector<double> guess_coherent_vacuum(std::span<const double> t, std::span<const double> y) {
  // Scan (n0, T1); for each pair A and C follow from linear least squares.
  const double span = std::max(t.back() - t.front(), 1e-300);
  double best_rss = std::numeric_limits<double>::infinity();
  std::vector<double> best{y.back() - y.front(), 2.0, span / 5.0, y.front()};
  for (int in = 1; in <= 24; ++in) {
    const double n0 = 0.25 * in;
    for (int it = 0; it < 40; ++it) {
      const double tau = span / 100.0 * std::pow(200.0, it / 39.0);
      double sg = 0.0, sgg = 0.0, sy = 0.0, sgy = 0.0;
      const double n = static_cast<double>(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double g = std::exp(-n0 * std::exp(-(t[i] - 0.0) / tau));
        sg += g;
        sgg += g * g;
        sy += y[i];
        sgy += g * y[i];
      }
      const double det = n * sgg - sg * sg;
      if (std::abs(det) < 1e-14 * n * sgg) continue;
      const double a = (n * sgy - sg * sy) / det;
      const double c = (sy - a * sg) / n;
      double rss = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = a * std::exp(-n0 * std::exp(-t[i] / tau)) + c - y[i];
        rss += r * r;
      }
      if (rss < best_rss) {
        best_rss = rss;
        best = {a, n0, tau, c};
      }
    }
  }
  return best;
}

std::vector<double> guess_ramsey(std::span<const double> t, std::span<const double> y) {
  const std::size_t n = t.size();
  const double c = mean_of(y);
  const double span = t.back() - t.front();
  std::vector<double> dts(n - 1);
  for (std::size_t i = 1; i < n; ++i) dts[i - 1] = t[i] - t[i - 1];
  std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
  const double nyquist = 0.5 / dts[dts.size() / 2];

  // Periodogram on a 4x oversampled frequency grid.
  const double df = 0.25 / span;
  double best_f = 1.0 / span;
  double best_power = -1.0;
  for (double f = 0.5 / span; f <= nyquist; f += df) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = kTwoPi * f * t[i];
      re += (y[i] - c) * std::cos(ph);
      im -= (y[i] - c) * std::sin(ph);
    }
    const double power = re * re + im * im;
    if (power > best_power) {
      best_power = power;
      best_f = f;
    }
  }

  // Quadrature amplitudes on each half of the record give the envelope decay.
  auto quadrature = [&](std::size_t lo, std::size_t hi, double tau) {
    Eigen::MatrixXd basis(hi - lo, 2);
    Eigen::VectorXd rhs(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      const double env = std::isfinite(tau) ? std::exp(-t[i] / tau) : 1.0;
      const double ph = kTwoPi * best_f * t[i];
      basis(i - lo, 0) = env * std::cos(ph);
      basis(i - lo, 1) = env * std::sin(ph);
      rhs(i - lo) = y[i] - c;
    }
    const Eigen::Vector2d ab = basis.colPivHouseholderQr().solve(rhs);
    return ab;
  };
  const std::size_t half = n / 2;
  const double inf = std::numeric_limits<double>::infinity();
  const double m1 = quadrature(0, half, inf).norm();
  const double m2 = quadrature(half, n, inf).norm();
  const double tm1 = 0.5 * (t[0] + t[half - 1]);
  const double tm2 = 0.5 * (t[half] + t[n - 1]);
  double tau = 2.0 * span;
  if (m1 > m2 && m2 > 0.0) tau = (tm2 - tm1) / std::log(m1 / m2);
  if (!(tau > 0.0) || !std::isfinite(tau)) tau = 2.0 * span;
  const Eigen::Vector2d ab = quadrature(0, n, tau);
  const double amp = ab.norm();
  const double phi = std::atan2(-ab(1), ab(0));
  return {amp, tau, best_f, phi, c};
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt on internal coordinates (log time constant).

struct Problem {
  FitModelKind kind;
  std::span<const double> t;
  std::span<const double> y;
  std::vector<double> sqrt_w;
  int tau_index;

  [[nodiscard]] std::vector<double> to_natural(const Eigen::VectorXd& x) const {
    std::vector<double> p(x.data(), x.data() + x.size());
    p[tau_index] = std::exp(x(tau_index));
    return p;
  }

  [[nodiscard]] Eigen::VectorXd residuals(const std::vector<double>& p) const {
    Eigen::VectorXd r(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) r(i) = sqrt_w[i] * (model_eval(kind, p, t[i]) - y[i]);
    return r;
  }

  /// Jacobian with respect to natural parameters (weighted).
  [[nodiscard]] Eigen::MatrixXd jacobian(const std::vector<double>& p) const {
    const int k = static_cast<int>(p.size());
    Eigen::MatrixXd j(t.size(), k);
    std::vector<double> g(k);
    for (std::size_t i = 0; i < t.size(); ++i) {
      model_gradient(kind, p, t[i], g);
      for (int c = 0; c < k; ++c) j(i, c) = sqrt_w[i] * g[c];
    }
    return j;
  }
};

FitResult levenberg_marquardt(const Problem& prob, const std::vector<double>& guess, const FitOptions& opt) {
  const int k = parameter_count(prob.kind);
  FitResult res;
  res.kind = prob.kind;

  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(guess.data(), k);
  if (!(guess[prob.tau_index] > 0.0)) throw FitError("fit: initial time constant must be > 0");
  x(prob.tau_index) = std::log(guess[prob.tau_index]);

  std::vector<double> p = prob.to_natural(x);
  Eigen::VectorXd r = prob.residuals(p);
  double rss = r.squaredNorm();
  double lambda = 1e-3;
  Eigen::VectorXd dscale = Eigen::VectorXd::Zero(k);
  bool converged = false;
  std::string message = "iteration limit reached";
  double grad_inf = 0.0;
  int it = 0;

  for (it = 1; it <= opt.max_iterations; ++it) {
    Eigen::MatrixXd j = prob.jacobian(p);
    j.col(prob.tau_index) *= p[prob.tau_index];  // chain rule for log T
    const Eigen::VectorXd g = j.transpose() * r;
    grad_inf = g.cwiseAbs().maxCoeff();
    if (grad_inf < opt.gradient_tol) {
      converged = true;
      message = "gradient below tolerance";
      break;
    }
    const Eigen::MatrixXd jtj = j.transpose() * j;
    dscale = dscale.cwiseMax(jtj.diagonal());
    for (int c = 0; c < k; ++c) {
      if (dscale(c) <= 0.0) dscale(c) = 1e-30;
    }

    bool accepted = false;
    double rss_new = rss;
    Eigen::VectorXd x_new;
    while (lambda < 1e16) {
      Eigen::MatrixXd lhs = jtj;
      lhs.diagonal() += lambda * dscale;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
      Eigen::VectorXd step;
      if (ldlt.info() == Eigen::Success) step = ldlt.solve(-g);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      x_new = x + step;
      const std::vector<double> p_new = prob.to_natural(x_new);
      if (!std::all_of(p_new.begin(), p_new.end(), [](double v) { return std::isfinite(v); }) ||
          !(p_new[prob.tau_index] > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd r_new = prob.residuals(p_new);
      rss_new = r_new.squaredNorm();
      if (std::isfinite(rss_new) && rss_new < rss) {
        accepted = true;
        x = x_new;
        p = p_new;
        r = r_new;
        lambda = std::max(lambda / 10.0, 1e-15);
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No descent direction improves the sum of squares any further.
      converged = rss <= 1e-28 * static_cast<double>(prob.t.size());
      message = converged ? "exact fit" : "stalled with gradient above tolerance";
      break;
    }
    const double rel = (rss - rss_new) / std::max(rss, 1e-300);
    rss = rss_new;
    if (rss <= 1e-28 * static_cast<double>(prob.t.size())) {
      converged = true;
      message = "exact fit";
      break;
    }
    // A stalled sum of squares only counts once the gradient confirms it.
    if (rel < opt.rss_rtol) message = "relative RSS change below tolerance, gradient pending";
  }

  res.params = p;
  res.rss = rss;
  res.converged = converged;
  res.iterations = std::min(it, opt.max_iterations);
  res.message = message;
  {
    Eigen::MatrixXd j = prob.jacobian(p);
    Eigen::MatrixXd jl = j;
    jl.col(prob.tau_index) *= p[prob.tau_index];
    res.gradient_norm = (jl.transpose() * r).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd jtj = j.transpose() * j;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    const int dof = static_cast<int>(prob.t.size()) - k;
    res.std_errors.assign(k, std::numeric_limits<double>::infinity());
    if (lu.isInvertible() && dof > 0) {
      const Eigen::MatrixXd cov = lu.inverse() * (rss / dof);
      for (int c = 0; c < k; ++c) res.std_errors[c] = std::sqrt(std::max(0.0, cov(c, c)));
    } else if (converged) {
      res.message += "; covariance singular";
    }
  }
  return res;
}

}  // namespace

std::string_view to_string(FitModelKind kind) {
  switch (kind) {
    case FitModelKind::SingleExp:
      return "single_exp";
    case FitModelKind::CoherentVacuum:
      return "coherent_vacuum";
    case FitModelKind::RamseyFringe:
      return "ramsey_fringe";
  }
  return "unknown";
}

FitModelKind parse_fit_model(std::string_view name) {
  if (name == "single_exp" || name == "SingleExp") return FitModelKind::SingleExp;
  if (name == "coherent_vacuum" || name == "CoherentVacuum") return FitModelKind::CoherentVacuum;
  if (name == "ramsey_fringe" || name == "RamseyFringe") return FitModelKind::RamseyFringe;
  throw DomainError("unknown fit model '" + std::string(name) + "'");
}

std::span<const std::string_view> parameter_names(FitModelKind kind) {
  switch (kind) {
    case FitModelKind::SingleExp:
      return kSingleExpNames;
    case FitModelKind::CoherentVacuum:
      return kCoherentNames;
    case FitModelKind::RamseyFringe:
      return kRamseyNames;
  }
  return {};
}

int parameter_count(FitModelKind kind) { return static_cast<int>(parameter_names(kind).size()); }

int time_constant_index(FitModelKind kind) { return kind == FitModelKind::CoherentVacuum ? 2 : 1; }

double model_eval(FitModelKind kind, std::span<const double> p, double t) {
  check_params(kind, p);
  switch (kind) {
    case FitModelKind::SingleExp:
      return p[0] * std::exp(-t / p[1]) + p[2];
    case FitModelKind::CoherentVacuum:
      return p[0] * std::exp(-p[1] * std::exp(-t / p[2])) + p[3];
    case FitModelKind::RamseyFringe:
      return p[0] * std::exp(-t / p[1]) * std::cos(kTwoPi * p[2] * t + p[3]) + p[4];
  }
  return 0.0;
}

void model_gradient(FitModelKind kind, std::span<const double> p, double t, std::span<double> g) {
  check_params(kind, p);
  switch (kind) {
    case FitModelKind::SingleExp: {
      const double e = std::exp(-t / p[1]);
      g[0] = e;
      g[1] = p[0] * e * t / (p[1] * p[1]);
      g[2] = 1.0;
      break;
    }
    case FitModelKind::CoherentVacuum: {
      const double u = std::exp(-t / p[2]);
      const double gv = std::exp(-p[1] * u);
      g[0] = gv;
      g[1] = -p[0] * gv * u;
      g[2] = -p[0] * gv * p[1] * u * t / (p[2] * p[2]);
      g[3] = 1.0;
      break;
    }
    case FitModelKind::RamseyFringe: {
      const double e = std::exp(-t / p[1]);
      const double ph = kTwoPi * p[2] * t + p[3];
      const double c = std::cos(ph);
      const double s = std::sin(ph);
      g[0] = e * c;
      g[1] = p[0] * e * c * t / (p[1] * p[1]);
      g[2] = -p[0] * e * s * kTwoPi * t;
      g[3] = -p[0] * e * s;
      g[4] = 1.0;
      break;
    }
  }
}

double FitResult::param(std::string_view name) const {
  const auto names = parameter_names(kind);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return params.at(i);
  }
  throw DomainError("FitResult: no parameter '" + std::string(name) + "'");
}

double FitResult::error(std::string_view name) const {
  const auto names = parameter_names(kind);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return std_errors.at(i);
  }
  throw DomainError("FitResult: no parameter '" + std::string(name) + "'");
}

std::vector<double> auto_guess(FitModelKind kind, std::span<const double> t, std::span<const double> y) {
  if (t.empty() || t.size() != y.size()) throw FitError("auto_guess: need a nonempty dataset of matching columns");
  check_flat(y);
  if (t.size() < 3) throw FitError("auto_guess: need at least three points");
  switch (kind) {
    case FitModelKind::SingleExp:
      return guess_single_exp(t, y);
    case FitModelKind::CoherentVacuum:
      return guess_coherent_vacuum(t, y);
    case FitModelKind::RamseyFringe:
      return guess_ramsey(t, y);
  }
  return {};
}

std::vector<double> shot_noise_weights(std::span<const double> y, int shots) {
  std::vector<double> w(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    // Floor p(1-p) at one count so saturated points keep finite weight.
    const double p = std::clamp(y[i], 1.0 / shots, 1.0 - 1.0 / shots);
    w[i] = shots / (p * (1.0 - p));
  }
  return w;
}

FitResult fit(FitModelKind kind, std::span<const double> t, std::span<const double> y,
              const std::optional<std::vector<double>>& initial, const FitOptions& options) {
  const int k = parameter_count(kind);
  if (t.size() != y.size()) throw FitError("fit: time and value columns differ in length");
  if (static_cast<int>(t.size()) < 2 * k) {
    throw FitError("fit: " + std::string(to_string(kind)) + " needs at least " + std::to_string(2 * k) +
                   " points, got " + std::to_string(t.size()));
  }
  check_flat(y);

  Problem prob{kind, t, y, std::vector<double>(t.size(), 1.0), time_constant_index(kind)};
  if (!options.weights.empty()) {
    if (options.weights.size() != t.size()) throw FitError("fit: weight vector length mismatch");
    for (std::size_t i = 0; i < t.size(); ++i) prob.sqrt_w[i] = std::sqrt(options.weights[i]);
  }

  const std::vector<double> guess = initial ? *initial : auto_guess(kind, t, y);
  if (static_cast<int>(guess.size()) != k) throw FitError("fit: initial guess has the wrong parameter count");

  FitResult best = levenberg_marquardt(prob, guess, options);
  const int tau = time_constant_index(kind);
  const std::array<double, 2> factors{0.5, 2.0};
  for (int s = 1; s < options.starts && !best.converged; ++s) {
    std::vector<double> g = guess;
    g[tau] *= factors[(s - 1) % factors.size()];
    FitResult attempt = levenberg_marquardt(prob, g, options);
    if ((attempt.converged && !best.converged) || (attempt.converged == best.converged && attempt.rss < best.rss)) {
      best = std::move(attempt);
    }
  }
  return best;
}

FitResult fit(FitModelKind kind, const Dataset& data, const std::optional<std::vector<double>>& initial,
              const FitOptions& options) {
  const auto& y = data.observed();
  return fit(kind, data.sweep_values, y, initial, options);
}

}  // namespace qmem
