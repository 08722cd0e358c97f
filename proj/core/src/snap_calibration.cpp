#include "qmem/snap_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qmem/optimize.hpp"

namespace qmem {

namespace {

ComplexVector padded(const ComplexVector& target, int n_cav) {
  if (target.size() > n_cav) {
    for (Eigen::Index n = n_cav; n < target.size(); ++n) {
      if (std::abs(target(n)) > 0.0) throw DomainError("calibrate_snap_recipe: target exceeds truncation");
    }
  }
  ComplexVector t = ComplexVector::Zero(n_cav);
  t.head(std::min<Eigen::Index>(n_cav, target.size())) = target.head(std::min<Eigen::Index>(n_cav, target.size()));
  const double norm = t.norm();
  if (!(norm > 0.0)) throw DomainError("calibrate_snap_recipe: target ket is zero");
  return t / norm;
}

SnapRecipe unpack(const std::vector<double>& x, int layers, int levels) {
  SnapRecipe r;
  for (int i = 0; i <= layers; ++i) r.displacements.emplace_back(x[i], 0.0);
  for (int l = 0; l < layers; ++l) {
    const auto first = x.begin() + (layers + 1) + l * levels;
    r.snap_phases.emplace_back(first, first + levels);
  }
  return r;
}

}  // namespace

double recipe_fidelity(const SnapRecipe& recipe, const ComplexVector& target, int n_cav) {
  const ComplexVector t = padded(target, n_cav);
  return std::norm(t.dot(recipe.prepare(n_cav)));
}

CalibrationResult calibrate_snap_recipe(const HilbertDims& dims, const ComplexVector& target,
                                        const CalibrationOptions& options) {
  dims.validate();
  if (options.layers < 1) throw DomainError("calibrate_snap_recipe: need at least one layer");
  const int layers = options.layers;
  const int levels = options.phase_levels > 0 ? options.phase_levels : (layers == 1 ? 1 : 3);
  if (levels > dims.n_cav) throw DomainError("calibrate_snap_recipe: more phase levels than Fock levels");
  const ComplexVector t = padded(target, dims.n_cav);

  int evaluations = 0;
  auto objective = [&](const std::vector<double>& x) {
    ++evaluations;
    return 1.0 - std::norm(t.dot(unpack(x, layers, levels).prepare(dims.n_cav)));
  };

  // Deterministic starts: alternating displacements, a pi phase on vacuum.
  std::vector<std::vector<double>> starts;
  for (const double beta : {0.6, 1.0, -0.6}) {
    std::vector<double> x;
    for (int i = 0; i <= layers; ++i) x.push_back(i % 2 == 0 ? beta : -0.5 * beta);
    for (int l = 0; l < layers; ++l) {
      for (int n = 0; n < levels; ++n) x.push_back(n == 0 ? std::numbers::pi : 0.0);
    }
    starts.push_back(std::move(x));
  }

  CalibrationResult best;
  double best_value = 2.0;
  const int budget = options.max_evaluations / static_cast<int>(starts.size());
  for (const auto& start : starts) {
    SimplexOptions so;
    so.max_evaluations = budget;
    so.initial_step = 0.3;
    so.value_tol = 1e-14;
    const SimplexResult sr = nelder_mead(objective, start, so);
    if (sr.value < best_value) {
      best_value = sr.value;
      best.recipe = unpack(sr.x, layers, levels);
    }
    if (best_value <= 1e-12) break;
  }
  best.fidelity = 1.0 - best_value;
  best.evaluations = evaluations;
  if (best.fidelity < options.min_fidelity) {
    std::ostringstream msg;
    msg << "calibrate_snap_recipe: best fidelity " << best.fidelity << " after " << evaluations
        << " evaluations is below " << options.min_fidelity;
    throw CalibrationError(msg.str(), best);
  }
  return best;
}

CalibrationResult calibrate_snap_recipe(const HilbertDims& dims, const CalibrationOptions& options) {
  return calibrate_snap_recipe(dims, fock_ket(1, dims.n_cav), options);
}

}  // namespace qmem
