#pragma once

// Offline calibration of Displace-Snap-Displace preparation recipes.

#include <stdexcept>
#include <vector>

#include "qmem/dynamics.hpp"

namespace qmem {

struct CalibrationOptions {
  int layers = 1;
  /// Fock levels carrying a free SNAP phase per layer; 0 picks 1 for one layer, 3 otherwise.
  int phase_levels = 0;
  int max_evaluations = 2000;
  double min_fidelity = 0.99;
};

struct CalibrationResult {
  SnapRecipe recipe;
  double fidelity = 0.0;
  int evaluations = 0;
};

/// Best recipe found when the fidelity floor was missed.
class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, CalibrationResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  [[nodiscard]] const CalibrationResult& best() const { return best_; }

 private:
  CalibrationResult best_;
};

/// |<target|psi>|^2 for the cavity ket the recipe prepares from vacuum.
double recipe_fidelity(const SnapRecipe& recipe, const ComplexVector& target, int n_cav);

/// Simplex search over real displacements and SNAP phases maximizing the
/// fidelity to `target` (a cavity ket, zero-padded to n_cav). Throws
/// CalibrationError below options.min_fidelity.
CalibrationResult calibrate_snap_recipe(const HilbertDims& dims, const ComplexVector& target,
                                        const CalibrationOptions& options = {});

/// Calibration towards |1>.
CalibrationResult calibrate_snap_recipe(const HilbertDims& dims, const CalibrationOptions& options = {});

}  // namespace qmem
