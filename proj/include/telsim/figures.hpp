#pragma once

// Self-contained SVG renderings of experiment results.

#include "telsim/experiments.hpp"

#include <iosfwd>
#include <string_view>

namespace telsim {

/// Grid of |MACO| columns by |ACO| rows. White cells were declared compliant,
/// grey cells were not; a red dot marks a false positive, a blue dot a false
/// negative.
void write_heatmap_svg(std::ostream& out, const HeatmapResult& result, std::string_view title);

/// Grouped bars: one group per sample size, one bar per candidate path.
void write_selection_svg(std::ostream& out, const SelectionResult& result, std::string_view title);

} // namespace telsim
