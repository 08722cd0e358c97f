#pragma once

// Static vector plots.

#include <optional>
#include <string>

#include "qmem/fitting.hpp"
#include "qmem/measurement.hpp"

namespace qmem::app {

/// Heatmap on a blue-white-red scale clipped at +-2/pi, with a color bar.
std::string wigner_svg(const WignerGrid& grid, const std::string& title);

/// Measured points, plus the fitted curve when given.
std::string trace_svg(const Dataset& data, const std::optional<FitResult>& fit, const std::string& title);

}  // namespace qmem::app
