#pragma once

#include <functional>
#include <vector>

namespace qmem {

struct SimplexOptions {
  int max_evaluations = 2000;
  /// Stop once the spread of simplex values falls below this.
  double value_tol = 1e-12;
  /// Initial edge length per coordinate (uniform).
  double initial_step = 0.2;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead minimization with the standard reflection/expansion/contraction
/// coefficients (1, 2, 1/2, 1/2).
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          std::vector<double> start, const SimplexOptions& options = {});

}  // namespace qmem
